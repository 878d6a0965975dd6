//! Acceptance gate. Runs every criterion, prints one PASS/FAIL line each and
//! exits nonzero if any fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use common::*;
use hyperorient::experiment::{core_profile, simulate_point, simulate_threshold, table1};
use hyperorient::ode::{predicted_kappa, find_threshold_with, LambdaMode};
use hyperorient::*;
use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = std::result::Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn params(h: usize, w: usize, k: usize) -> OrientationParams {
    OrientationParams::new(h, w, k).unwrap()
}

// (h, w, k, mu_tilde, tol, mu_hat, tol)
const TABLE: [(usize, usize, usize, f64, f64, f64, f64); 4] = [
    (3, 2, 4, 5.485, 0.005, 6.65086, 1e-3),
    (3, 2, 10, 14.766, 0.005, 15.5872, 1e-3),
    (3, 2, 40, 59.991, 0.01, 60.0773, 5e-3),
    (10, 2, 4, 19.99999, 1e-3, 20.0003, 1e-3),
];

fn table_reproduction() -> Outcome {
    let rows = table1(1e-7);
    let mut ok = true;
    let mut parts = Vec::new();
    for (h, w, k, mt, tt, mh, th) in TABLE {
        let row = rows.iter().find(|r| (r.h, r.w, r.k) == (h, w, k)).ok_or("missing row")?;
        let (Some(a), Some(b)) = (row.mu_tilde, row.mu_hat) else {
            ok = false;
            parts.push(format!("({h},{w},{k}) failed: {:?}", row.error));
            continue;
        };
        ok &= (a - mt).abs() <= tt && (b - mh).abs() <= th;
        parts.push(format!("({h},{w},{k}) mu~={a:.6} mu^={b:.6}"));
    }
    check(ok, parts.join("; "))
}

fn oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0a11);
    let mut total = 0;
    let mut orientable = 0;
    for (h, w) in [(2, 1), (3, 1), (3, 2), (4, 2)] {
        for k in 1..=3 {
            let p = params(h, w, k);
            for _ in 0..500 {
                let n = rng.gen_range(h..=8);
                // around the density threshold so both outcomes occur
                let m = rng.gen_range(0..=(3 * k * n / (2 * w) + 2));
                let hg = random_instance(&mut rng, n, m, &p, true, false);
                let flow = orient(&hg, &p).unwrap();
                if let OrientOutcome::Orientable(o) = &flow {
                    if !verify_orientation(&hg, o, &p).unwrap().is_valid() {
                        return Err(format!("invalid orientation for {hg:?}"));
                    }
                }
                let exhaustive = exhaustive_orientable(&hg, &p);
                let hakimi = hakimi_check(&hg, &p, BRUTE_FORCE_CAP).unwrap();
                let expansion = all_subsets(n).all(|s| expansion_condition(&hg, &s, &p).unwrap());
                let f = flow.is_orientable();
                if f != exhaustive || f != hakimi || f != expansion {
                    return Err(format!(
                        "({h},{w},{k}) disagreement flow={f} exhaustive={exhaustive} hakimi={hakimi} expansion={expansion} on {hg:?}"
                    ));
                }
                total += 1;
                orientable += f as usize;
            }
        }
    }
    Ok(format!("{total} instances over 12 triples, 100% agreement ({orientable} orientable)"))
}

fn core_correctness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xc0de);
    let triples = [(2, 1, 1), (2, 1, 2), (3, 1, 2), (3, 2, 1), (3, 2, 2), (4, 2, 2), (4, 3, 3), (5, 2, 3)];
    let mut extended = 0;
    let count = 1200;
    for i in 0..count {
        let (h, w, k) = triples[i % triples.len()];
        let p = params(h, w, k);
        let n = rng.gen_range(h.max(3)..=10);
        let m = rng.gen_range(0..=(3 * k * n / h + 3));
        let hg = random_instance(&mut rng, n, m, &p, i % 2 == 0, true);
        let (det, _) = rancore(&hg, &p, PeelMode::Deterministic, false).unwrap();
        let (ran, _) = rancore(&hg, &p, PeelMode::Randomized { seed: RngSeed::new(i as u64) }, false).unwrap();
        if det.core != ran.core || det.core_vertices != ran.core_vertices {
            return Err(format!("peeling modes differ on {hg:?}"));
        }
        if det.core_vertices != brute_core_vertices(&hg, &p) {
            return Err(format!("core is not the maximal fixed point on {hg:?}"));
        }
        // repeated vertices cannot take two signs of one edge, so extension
        // is only defined on simple edges
        if !hg.has_simple_edges() {
            continue;
        }
        if let OrientOutcome::Orientable(co) = orient(&det.core, &p).unwrap() {
            let full = extend_orientation(&det, &co, &p).unwrap();
            if !verify_orientation(&hg, &full, &p).unwrap().is_valid() {
                return Err(format!("extended orientation invalid on {hg:?}"));
            }
            extended += 1;
        }
    }
    Ok(format!("{count} instances, cores identical and maximal, {extended} orientations extended"))
}

fn theory_vs_simulation() -> Outcome {
    let p = params(3, 2, 4);
    let mut ok = true;
    let mut parts = Vec::new();
    for (i, mu) in [5.0, 5.485, 6.0].into_iter().enumerate() {
        let prof = core_profile(&p, mu, 100_000, 10, 2024 + i as u64).map_err(|e| e.to_string())?;
        let chi = prof.chi_square.passes(0.001);
        ok &= prof.rel_dev_alpha <= 0.01 && prof.rel_dev_mu_hat <= 0.01 && chi;
        parts.push(format!(
            "mu={mu}: alpha dev {:.3}%, mu^ dev {:.3}%, chi2 p={:.3}",
            100.0 * prof.rel_dev_alpha,
            100.0 * prof.rel_dev_mu_hat,
            prof.chi_square.p_value
        ));
    }
    check(ok, parts.join("; "))
}

fn sharp_transition() -> Outcome {
    let p = params(3, 2, 4);
    let n = 100_000;
    let below = simulate_point(&p, n, 5.4, 10, 77, 0).map_err(|e| e.to_string())?;
    let above = simulate_point(&p, n, 5.6, 10, 77, 1).map_err(|e| e.to_string())?;
    let cross = simulate_threshold(&p, n, 10, 78, 5.3, 5.7, 4).map_err(|e| e.to_string())?;
    check(
        below.orientable_fraction >= 0.9 && above.orientable_fraction <= 0.1 && (cross.estimate - 5.485).abs() <= 0.05,
        format!(
            "fraction {:.1} at 5.4, {:.1} at 5.6, crossing {:.4} +- {:.4}",
            below.orientable_fraction, above.orientable_fraction, cross.estimate, cross.half_width
        ),
    )
}

fn analytics_round_trips() -> Outcome {
    let mut worst_round_trip = 0.0f64;
    for k in 0..=40i64 {
        for i in 1..=60 {
            let lambda0 = 0.25 * i as f64 + 0.5 * k as f64;
            let mean = TruncatedPoisson::new(lambda0, k + 1).unwrap().mean();
            if mean <= (k + 1) as f64 + 1e-9 {
                continue;
            }
            let l = solve_lambda(mean, k).unwrap();
            if l > mean {
                return Err(format!("lambda {l} > mu {mean} at k={k}"));
            }
            worst_round_trip = worst_round_trip.max((l - lambda0).abs() / lambda0.max(1.0));
        }
    }
    let mut worst_tail = 0.0f64;
    for (num, den) in [(1i64, 3i64), (3, 2), (6, 1), (23, 4), (15, 1), (53, 2)] {
        let mu_q = BigRational::new(BigInt::from(num), BigInt::from(den));
        let mu = num as f64 / den as f64;
        for k in 0..=20 {
            let (up, _) = f_exact(k, &mu_q);
            worst_tail = worst_tail.max(((poisson_upper_tail(k, mu).unwrap() - up) / up).abs());
        }
    }
    let p = params(3, 2, 10);
    let ctl = OdeParams { lambda_mode: LambdaMode::Integrated, ..OdeParams::new(p, 14.766) };
    let (traj, _) = integrate(&ctl).map_err(|e| e.to_string())?;
    let worst_lambda = traj
        .states()
        .map(|s| (s.lambda - solve_lambda(s.mu, 10).unwrap()).abs())
        .fold(0.0f64, f64::max);
    check(
        worst_round_trip <= 1e-9 && worst_tail <= 1e-12 && worst_lambda <= 1e-6,
        format!(
            "round trip {worst_round_trip:.1e}, tail rel err {worst_tail:.1e}, integrated lambda dev {worst_lambda:.1e}"
        ),
    )
}

fn numerical_robustness() -> Outcome {
    let tol = 1e-6;
    let mut ok = true;
    let mut parts = Vec::new();
    for (h, w, k, _, _, _, _) in TABLE {
        let p = params(h, w, k);
        let base = OdeParams::new(p, 0.0);
        let a = find_threshold_with(&base, tol).map_err(|e| e.to_string())?;
        let b = find_threshold_with(&base.scale_tolerances(0.5), tol).map_err(|e| e.to_string())?;
        let (dt, dh) = ((a.mu_tilde - b.mu_tilde).abs(), (a.mu_hat - b.mu_hat).abs());
        ok &= dt < tol && dh < tol;
        let grid: Vec<f64> = (0..11).map(|i| a.mu_tilde * (0.8 + 0.04 * i as f64)).collect();
        let kappas: Vec<f64> = grid.iter().map(|&mu| predicted_kappa(&base, mu).unwrap().0).collect();
        let monotone = kappas.windows(2).all(|x| x[1] >= x[0]);
        ok &= monotone;
        parts.push(format!("({h},{w},{k}) dmu~={dt:.1e} dmu^={dh:.1e} monotone={monotone}"));
    }
    check(ok, parts.join("; "))
}

fn main() {
    let criteria: [Criterion; 7] = [
        ("reference table reproduction", table_reproduction),
        ("orientability oracle equivalence", oracle_equivalence),
        ("core correctness", core_correctness),
        ("theory vs simulation", theory_vs_simulation),
        ("sharp transition", sharp_transition),
        ("analytics round trips", analytics_round_trips),
        ("numerical robustness", numerical_robustness),
    ];
    let only: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let id = (i + 1).to_string();
        if !only.is_empty() && !only.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(d) => println!("criterion {id} {name}: PASS ({secs:.1}s) {d}"),
            Err(d) => {
                failed += 1;
                println!("criterion {id} {name}: FAIL ({secs:.1}s) {d}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
