mod common;

use common::*;
use hyperorient::flow::{build_network, max_flow};
use hyperorient::poisson::TruncatedPoisson;
use hyperorient::*;
use proptest::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

fn params() -> impl Strategy<Value = OrientationParams> {
    (prop_oneof![Just((2usize, 1usize)), Just((3, 1)), Just((3, 2)), Just((4, 2)), Just((4, 3)), Just((5, 2))], 1usize..4)
        .prop_map(|((h, w), k)| OrientationParams::new(h, w, k).unwrap())
}

fn instance(simple: bool, full: bool) -> impl Strategy<Value = (OrientationParams, Hypergraph)> {
    (params(), 5usize..=10, 0usize..25, any::<u64>()).prop_map(move |(p, n, m, seed)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (p, random_instance(&mut rng, n, m, &p, simple, full))
    })
}

fn subset_of(n: usize, bits: u32) -> Vec<usize> {
    (0..n).filter(|&v| bits >> v & 1 == 1).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn density_identity((p, hg) in instance(false, false)) {
        // n kappa = d - (h - w) m
        let kappa = w_density(&hg, &p).unwrap();
        let lhs = kappa * Rational::from_integer(hg.n() as i64);
        let rhs = hg.degree_sum() as i64 - ((p.h() - p.w()) * hg.m()) as i64;
        prop_assert_eq!(lhs, Rational::from_integer(rhs));
    }

    #[test]
    fn subset_stats_identities((p, hg) in instance(false, false), bits in any::<u32>()) {
        let s = subset_of(hg.n(), bits);
        let c: Vec<usize> = (0..hg.n()).filter(|v| !s.contains(v)).collect();
        let st = subset_stats(&hg, &s, &p).unwrap();
        let sc = subset_stats(&hg, &c, &p).unwrap();
        let by_size_sum: u64 = st.by_size.iter().map(|row| row.iter().enumerate().map(|(i, &m)| i as u64 * m).sum::<u64>()).sum();
        prop_assert_eq!(by_size_sum, st.degree_sum);
        for (j, row) in st.by_size.iter().enumerate() {
            prop_assert_eq!(st.q[j], row.iter().enumerate().map(|(i, &m)| i as u64 * m).sum::<u64>());
        }
        prop_assert!(st.rho <= st.nu && st.nu <= st.degree_sum);
        prop_assert_eq!(st.eta, sc.eta);
        // dstar by its alternative expression
        let excess: u64 = st.by_size.iter().enumerate().map(|(j, row)| {
            let cap = p.w() - j;
            row.iter().enumerate().filter(|(i, _)| *i > cap).map(|(i, &m)| (i - cap) as u64 * m).sum::<u64>()
        }).sum();
        prop_assert_eq!(st.dstar, st.degree_sum - excess);
    }

    #[test]
    fn expansion_matches_induced_density_pointwise((p, hg) in instance(false, false), bits in any::<u32>()) {
        // kappa(H_S) <= k  <=>  expansion condition on the complement
        let s = subset_of(hg.n(), bits);
        prop_assume!(!s.is_empty());
        let c: Vec<usize> = (0..hg.n()).filter(|v| !s.contains(v)).collect();
        let dense = w_density(&w_induced_subgraph(&hg, &s, &p).unwrap(), &p).unwrap()
            > Rational::from_integer(p.k() as i64);
        prop_assert_eq!(!dense, expansion_condition(&hg, &c, &p).unwrap());
    }

    #[test]
    fn core_idempotent_and_mode_independent((p, hg) in instance(false, true), seed in any::<u64>()) {
        let (a, _) = rancore(&hg, &p, PeelMode::Deterministic, false).unwrap();
        let (b, _) = rancore(&hg, &p, PeelMode::Randomized { seed: RngSeed::new(seed) }, false).unwrap();
        prop_assert_eq!(&a.core, &b.core);
        prop_assert_eq!(&a.core_vertices, &b.core_vertices);
        let (again, _) = rancore(&a.core, &p, PeelMode::Deterministic, false).unwrap();
        prop_assert_eq!(&again.core, &a.core);
        prop_assert!(a.core.degrees().iter().all(|&d| d > p.k()));
        for (v, edges) in &a.elimination {
            prop_assert!(edges.len() <= p.k(), "vertex {} signed {} times", v, edges.len());
        }
    }

    #[test]
    fn core_monotone_under_edge_removal((p, hg) in instance(false, true), drop in any::<u64>()) {
        let kept: Vec<Vec<usize>> = hg.edges().iter().enumerate()
            .filter(|(i, _)| drop >> (i % 64) & 1 == 0)
            .map(|(_, e)| e.clone()).collect();
        let sub = Hypergraph::new(hg.n(), kept).unwrap();
        let (big, _) = rancore(&hg, &p, PeelMode::Deterministic, false).unwrap();
        let (small, _) = rancore(&sub, &p, PeelMode::Deterministic, false).unwrap();
        prop_assert!(small.core_vertices.iter().all(|v| big.core_vertices.contains(v)));
    }

    #[test]
    fn trace_bookkeeping((p, hg) in instance(false, true), seed in any::<u64>()) {
        let (pr, tr) = rancore(&hg, &p, PeelMode::Randomized { seed: RngSeed::new(seed) }, true).unwrap();
        let tr = tr.unwrap();
        // n <= 1000 so every step is recorded
        let recs = &tr.records;
        prop_assert_eq!(recs[0].balls as usize, hg.degree_sum());
        for pair in recs.windows(2) {
            let (a, b) = (&pair[0], &pair[1]);
            prop_assert_eq!(b.step, a.step + 1);
            let lost = a.balls - b.balls;
            prop_assert!(lost == 1 || lost == (p.h() - p.w() + 1) as u64, "lost {}", lost);
            prop_assert!(b.heavy_vertices <= a.heavy_vertices);
            prop_assert_eq!(b.balls, b.light + b.heavy_by_size.iter().sum::<u64>());
        }
        let last = recs.last().unwrap();
        prop_assert_eq!(last.light, 0);
        prop_assert_eq!(last.balls as usize, pr.core.degree_sum());
    }

    #[test]
    fn flow_invariant_under_relabelling((p, hg) in instance(false, false), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut perm: Vec<usize> = (0..hg.n()).collect();
        rand::seq::SliceRandom::shuffle(perm.as_mut_slice(), &mut rng);
        let mut edges: Vec<Vec<usize>> = hg.edges().iter().map(|e| e.iter().map(|&v| perm[v]).collect()).collect();
        edges.reverse();
        let other = Hypergraph::new(hg.n(), edges).unwrap();
        let a = max_flow(&build_network(&hg, &p).unwrap()).value;
        let b = max_flow(&build_network(&other, &p).unwrap()).value;
        prop_assert_eq!(a, b);
    }

    #[test]
    fn orient_outcomes_are_certified((p, hg) in instance(false, false)) {
        match orient(&hg, &p).unwrap() {
            OrientOutcome::Orientable(o) => prop_assert!(verify_orientation(&hg, &o, &p).unwrap().is_valid()),
            OrientOutcome::Dense(c) => {
                prop_assert!(c.kappa > Rational::from_integer(p.k() as i64));
                if hg.has_simple_edges() {
                    prop_assert_eq!(c.induced_density(&hg, &p).unwrap(), c.kappa);
                }
            }
            OrientOutcome::DegenerateEdge { edge, distinct, required } => {
                prop_assert!(distinct < required);
                prop_assert_eq!(hg.distinct_vertices(edge).len(), distinct);
            }
        }
    }

    #[test]
    fn text_format_round_trip((_, hg) in instance(false, false)) {
        prop_assert_eq!(Hypergraph::parse(&hg.to_text()).unwrap(), hg);
    }

    #[test]
    fn tails_monotone(k in 0i64..60, mu in 0.0f64..120.0) {
        let f = |k, mu| poisson_upper_tail(k, mu).unwrap();
        prop_assert!(f(k + 1, mu) <= f(k, mu));
        prop_assert!(f(k, mu) <= f(k, mu + 0.5) + 1e-15);
        prop_assert!((f(k, mu) + poisson_lower_tail(k, mu).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn lambda_round_trip(k in 0i64..50, excess in 0.05f64..40.0) {
        // mean of Z_{>= k+1}(lambda0) maps back to lambda0
        let lambda0 = excess + k as f64 * 0.5;
        let mean = TruncatedPoisson::new(lambda0, k + 1).unwrap().mean();
        prop_assume!(mean > (k + 1) as f64 + 1e-9);
        let l = solve_lambda(mean, k).unwrap();
        prop_assert!((l - lambda0).abs() <= 1e-9 * lambda0.max(1.0), "{} vs {}", l, lambda0);
        prop_assert!(l <= mean);
    }
}
