//! Samplers for the random hypergraph models: uniform multihypergraphs,
//! their simple conditioning, non-uniform edge sizes, and the
//! minimum-degree model that describes a core given its parameters.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use crate::hypergraph::EdgeCountVector;
use crate::error::{invalid, Error, Result};
use crate::hypergraph::Hypergraph;
use crate::poisson::{heavy_mean, solve_lambda, TruncatedPoisson};

/// Master seed plus stream index. Equal pairs give equal draw sequences on
/// every platform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngSeed {
    pub seed: u64,
    pub stream: u64,
}

impl RngSeed {
    pub fn new(seed: u64) -> Self {
        Self { seed, stream: 0 }
    }

    /// Sub-stream for trial `index`.
    pub fn derive(&self, index: u64) -> Self {
        Self {
            seed: self.seed,
            stream: index,
        }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        use rand::SeedableRng;
        let mut r = ChaCha8Rng::seed_from_u64(self.seed);
        r.set_stream(self.stream);
        r
    }
}

/// `m` edges of `h` independent uniform vertices each.
pub fn sample_uniform_multi<R: Rng + ?Sized>(
    n: usize,
    m: usize,
    h: usize,
    rng: &mut R,
) -> Result<Hypergraph> {
    if n == 0 {
        return invalid("need n >= 1");
    }
    if h == 0 {
        return invalid("need h >= 1");
    }
    let edges = (0..m)
        .map(|_| (0..h).map(|_| rng.gen_range(0..n)).collect())
        .collect();
    Hypergraph::new(n, edges)
}

fn binomial(n: usize, r: usize) -> f64 {
    if r > n {
        return 0.0;
    }
    let r = r.min(n - r);
    (0..r).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Uniform simple `h`-hypergraph: rejection from the multi model until no
/// edge repeats a vertex and no two edges coincide as sets.
pub fn sample_uniform_simple<R: Rng + ?Sized>(
    n: usize,
    m: usize,
    h: usize,
    rng: &mut R,
    max_attempts: u64,
) -> Result<Hypergraph> {
    if n == 0 || h == 0 {
        return invalid("need n >= 1 and h >= 1");
    }
    if m as f64 > binomial(n, h) {
        return invalid(format!("m = {m} exceeds C({n}, {h})"));
    }
    for _ in 0..max_attempts {
        let hg = sample_uniform_multi(n, m, h, rng)?;
        if is_simple(&hg) {
            return Ok(hg);
        }
    }
    Err(Error::RetryBudget {
        attempts: max_attempts,
        acceptance_rate: 0.0,
    })
}

/// No repeated vertex inside an edge and no repeated edge.
pub fn is_simple(hg: &Hypergraph) -> bool {
    let mut seen = HashSet::with_capacity(hg.m());
    hg.edges().iter().all(|e| {
        let mut s = e.clone();
        s.sort_unstable();
        let before = s.len();
        s.dedup();
        s.len() == before && seen.insert(s)
    })
}

/// Edges of each size with independent uniform vertices; edges are emitted
/// from the largest size down.
pub fn sample_nonuniform_multi<R: Rng + ?Sized>(
    n: usize,
    counts: &EdgeCountVector,
    rng: &mut R,
) -> Result<Hypergraph> {
    if n == 0 {
        return invalid("need n >= 1");
    }
    let mut edges = Vec::with_capacity(counts.total_edges() as usize);
    for (j, &c) in counts.counts().iter().enumerate() {
        let size = counts.size_of(j);
        for _ in 0..c {
            edges.push((0..size).map(|_| rng.gen_range(0..n)).collect());
        }
    }
    Hypergraph::new(n, edges)
}

/// Default rejection budget, `200 * ceil(sqrt(D))`.
pub fn default_rejection_budget(degree_sum: u64) -> u64 {
    200 * (degree_sum as f64).sqrt().ceil().max(1.0) as u64
}

/// Parameter of the truncated Poisson `Z_{>=k+1}` whose mean is `mean`.
pub(crate) fn lambda_for_mean(mean: f64, k: usize) -> Result<f64> {
    let k = k as i64;
    if mean >= (k + 2) as f64 {
        return solve_lambda(mean, k);
    }
    // below k + 2: bisect the increasing mean function on (0, mean]
    let (mut lo, mut hi) = (0.0f64, mean);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if heavy_mean(mid, k) < mean {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * mean {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Degree vector distributed as a multinomial with `n` parts summing to `d`
/// conditioned on every part being at least `k + 1`: i.i.d. truncated
/// Poisson draws, rejected until the sum is exactly `d`.
pub fn sample_truncated_degree_sequence<R: Rng + ?Sized>(
    n: usize,
    d: u64,
    k: usize,
    rng: &mut R,
    max_rejections: Option<u64>,
) -> Result<Vec<usize>> {
    let floor = (k as u64 + 1) * n as u64;
    if n == 0 {
        return if d == 0 { Ok(Vec::new()) } else { invalid("n = 0 with positive degree sum") };
    }
    if d < floor {
        return invalid(format!("degree sum {d} below (k + 1) n = {floor}"));
    }
    if d == floor {
        return Ok(vec![k + 1; n]);
    }
    let lambda = lambda_for_mean(d as f64 / n as f64, k)?;
    let table = TruncatedPoisson::new(lambda, k as i64 + 1)?.table();
    let budget = max_rejections.unwrap_or_else(|| default_rejection_budget(d));
    let mut degrees = vec![0usize; n];
    for _ in 0..budget {
        let mut sum = 0u64;
        for slot in degrees.iter_mut() {
            let x = table.sample(rng) as usize;
            *slot = x;
            sum += x as u64;
        }
        if sum == d {
            return Ok(degrees);
        }
    }
    Err(Error::RetryBudget {
        attempts: budget,
        acceptance_rate: 1.0 / budget as f64,
    })
}

/// Uniform multihypergraph with the given edge counts and minimum degree at
/// least `k + 1`: degrees first, then a uniform colouring and partition of
/// the resulting ball slots.
pub fn sample_core_model<R: Rng + ?Sized>(
    n: usize,
    counts: &EdgeCountVector,
    k: usize,
    rng: &mut R,
) -> Result<Hypergraph> {
    let d = counts.degree_sum();
    if d < (k as u64 + 1) * n as u64 {
        return invalid(format!(
            "degree sum {d} cannot give {n} vertices degree at least {}",
            k + 1
        ));
    }
    let degrees = sample_truncated_degree_sequence(n, d, k, rng, None)?;
    let mut balls: Vec<usize> = Vec::with_capacity(d as usize);
    for (v, &deg) in degrees.iter().enumerate() {
        balls.extend(std::iter::repeat_n(v, deg));
    }
    // a uniform shuffle cut into consecutive chunks is a uniform colouring
    // followed by a uniform partition of each colour class
    balls.shuffle(rng);
    let mut edges = Vec::with_capacity(counts.total_edges() as usize);
    let mut at = 0;
    for (j, &c) in counts.counts().iter().enumerate() {
        let size = counts.size_of(j);
        for _ in 0..c {
            edges.push(balls[at..at + size].to_vec());
            at += size;
        }
    }
    Hypergraph::new(n, edges)
}
