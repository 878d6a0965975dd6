//! Independent brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use hyperorient::{Hypergraph, OrientationParams};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;

/// Random hypergraph with edge sizes in `[h - w + 1, h]`. With `simple`
/// set, no edge repeats a vertex (edges may still repeat).
pub fn random_instance<R: Rng>(rng: &mut R, n: usize, m: usize, p: &OrientationParams, simple: bool, full_only: bool) -> Hypergraph {
    let (h, w) = (p.h(), p.w());
    let edges = (0..m)
        .map(|_| {
            let size = if full_only { h } else { rng.gen_range(h - w + 1..=h) };
            if simple {
                rand::seq::index::sample(rng, n, size).into_vec()
            } else {
                (0..size).map(|_| rng.gen_range(0..n)).collect()
            }
        })
        .collect();
    Hypergraph::new(n, edges).unwrap()
}

fn distinct(e: &[usize]) -> Vec<usize> {
    let mut d = e.to_vec();
    d.sort_unstable();
    d.dedup();
    d
}

fn choose(items: &[usize], r: usize) -> Vec<Vec<usize>> {
    if r == 0 {
        return vec![Vec::new()];
    }
    if items.len() < r {
        return Vec::new();
    }
    let mut out = Vec::new();
    for (i, &x) in items.iter().enumerate() {
        for mut rest in choose(&items[i + 1..], r - 1) {
            rest.insert(0, x);
            out.push(rest);
        }
    }
    out
}

/// Backtracking over every per-edge choice of signed vertex sets.
pub fn exhaustive_orientable(hg: &Hypergraph, p: &OrientationParams) -> bool {
    let options: Vec<Vec<Vec<usize>>> = hg
        .edges()
        .iter()
        .map(|e| choose(&distinct(e), p.w() - (p.h() - e.len())))
        .collect();
    let demand: usize = options.iter().filter_map(|o| o.first()).map(Vec::len).sum();
    if options.iter().any(Vec::is_empty) || demand > p.k() * hg.n() {
        return false;
    }
    let mut load = vec![0usize; hg.n()];
    fn go(i: usize, options: &[Vec<Vec<usize>>], load: &mut [usize], k: usize) -> bool {
        if i == options.len() {
            return true;
        }
        for choice in &options[i] {
            if choice.iter().all(|&v| load[v] < k) {
                for &v in choice {
                    load[v] += 1;
                }
                let ok = go(i + 1, options, load, k);
                for &v in choice {
                    load[v] -= 1;
                }
                if ok {
                    return true;
                }
            }
        }
        false
    }
    go(0, &options, &mut load, p.k())
}

/// Smallest k for which the exhaustive search succeeds.
pub fn brute_min_max_indegree(hg: &Hypergraph, h: usize, w: usize) -> usize {
    if hg.m() == 0 {
        return 0;
    }
    (1..)
        .find(|&k| exhaustive_orientable(hg, &OrientationParams::new(h, w, k).unwrap()))
        .unwrap()
}

/// Core vertex set by enumerating every subset: the largest `S` whose
/// w-induced subgraph has minimum degree at least `k + 1`.
pub fn brute_core_vertices(hg: &Hypergraph, p: &OrientationParams) -> Vec<usize> {
    let n = hg.n();
    let floor = p.h() - p.w();
    let mut best: u32 = 0;
    let mut fixed_points = Vec::new();
    for s in 0u32..(1u32 << n) {
        let mut deg = vec![0usize; n];
        for e in hg.edges() {
            let inside: Vec<usize> = e.iter().copied().filter(|&v| s >> v & 1 == 1).collect();
            if inside.len() > floor {
                for v in inside {
                    deg[v] += 1;
                }
            }
        }
        if (0..n).filter(|&v| s >> v & 1 == 1).all(|v| deg[v] > p.k()) {
            fixed_points.push(s);
            if s.count_ones() > best.count_ones() {
                best = s;
            }
        }
    }
    // the maximal fixed point contains every other one
    assert!(fixed_points.iter().all(|&s| s & best == s));
    (0..n).filter(|&v| best >> v & 1 == 1).collect()
}

/// Augmenting paths by depth-first search on a dense capacity matrix.
pub fn naive_max_flow(cap: &[Vec<u64>], s: usize, t: usize) -> u64 {
    let n = cap.len();
    let mut res: Vec<Vec<u64>> = cap.to_vec();
    let mut total = 0;
    loop {
        let mut prev = vec![usize::MAX; n];
        prev[s] = s;
        let mut stack = vec![s];
        while let Some(u) = stack.pop() {
            for v in 0..n {
                if res[u][v] > 0 && prev[v] == usize::MAX {
                    prev[v] = u;
                    stack.push(v);
                }
            }
        }
        if prev[t] == usize::MAX {
            return total;
        }
        let mut f = u64::MAX;
        let mut v = t;
        while v != s {
            f = f.min(res[prev[v]][v]);
            v = prev[v];
        }
        let mut v = t;
        while v != s {
            res[prev[v]][v] -= f;
            res[v][prev[v]] += f;
            v = prev[v];
        }
        total += f;
    }
}

/// All subsets of `0..n` as sorted vertex lists.
pub fn all_subsets(n: usize) -> impl Iterator<Item = Vec<usize>> {
    (0u32..(1u32 << n)).map(move |s| (0..n).filter(|&v| s >> v & 1 == 1).collect())
}

/// `(f_k(mu), 1 - f_k(mu))` from the exact rational series.
pub fn f_exact(k: i64, mu: &BigRational) -> (f64, f64) {
    // e^{mu} f_k(mu) = sum_{i >= k} mu^i / i!, truncated far in the tail
    let mut term = BigRational::one();
    let mut lower = BigRational::zero();
    let mut upper = BigRational::zero();
    for i in 0..(k + 400) {
        if i > 0 {
            term = term * mu / BigRational::from_integer(BigInt::from(i));
        }
        if i < k {
            lower += &term;
        } else {
            upper += &term;
        }
    }
    let e = (-mu.to_f64().unwrap()).exp();
    (e * upper.to_f64().unwrap(), e * lower.to_f64().unwrap())
}
