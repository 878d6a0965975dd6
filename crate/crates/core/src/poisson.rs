//! Poisson tails, truncated Poisson variables and the lambda-mu relation
//! that links the mean degree of heavy vertices to their truncated-Poisson
//! parameter.

use rand::Rng;
use statrs::function::factorial::ln_factorial;

use crate::error::{Error, Result};

/// Neumaier-compensated running sum.
#[derive(Default, Clone, Copy)]
struct Compensated {
    sum: f64,
    comp: f64,
}

impl Compensated {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// `P(Poisson(mu) = j)`, zero for negative `j`.
pub fn poisson_pmf(j: i64, mu: f64) -> f64 {
    if j < 0 {
        return 0.0;
    }
    if mu == 0.0 {
        return if j == 0 { 1.0 } else { 0.0 };
    }
    (-mu + j as f64 * mu.ln() - ln_factorial(j as u64)).exp()
}

/// Upper tail `P(Poisson(mu) >= k)` without argument checks.
pub(crate) fn upper_tail(k: i64, mu: f64) -> f64 {
    if k <= 0 {
        return 1.0;
    }
    if mu == 0.0 {
        return 0.0;
    }
    if k as f64 > mu {
        direct_upper(k, mu)
    } else {
        1.0 - direct_lower(k, mu)
    }
}

/// Lower tail `P(Poisson(mu) <= k - 1) = 1 - f_k(mu)` without cancellation.
pub(crate) fn lower_tail(k: i64, mu: f64) -> f64 {
    if k <= 0 {
        return 0.0;
    }
    if mu == 0.0 {
        return 1.0;
    }
    if k as f64 > mu {
        1.0 - direct_upper(k, mu)
    } else {
        direct_lower(k, mu)
    }
}

// terms decrease from i = k upward since k > mu
fn direct_upper(k: i64, mu: f64) -> f64 {
    let mut term = poisson_pmf(k, mu);
    let mut acc = Compensated::default();
    let mut i = k;
    while term > 0.0 {
        acc.add(term);
        i += 1;
        term *= mu / i as f64;
        if term < acc.value() * 1e-18 {
            break;
        }
    }
    acc.value()
}

// terms decrease from i = k - 1 downward since k - 1 < mu
fn direct_lower(k: i64, mu: f64) -> f64 {
    let mut term = poisson_pmf(k - 1, mu);
    let mut acc = Compensated::default();
    let mut i = k - 1;
    loop {
        acc.add(term);
        if i == 0 {
            break;
        }
        term *= i as f64 / mu;
        i -= 1;
        if term < acc.value() * 1e-18 {
            break;
        }
    }
    acc.value()
}

/// `f_k(mu) = P(Poisson(mu) >= k)`, with `f_k = 1` for `k <= 0`.
pub fn poisson_upper_tail(k: i64, mu: f64) -> Result<f64> {
    check_mu(mu)?;
    Ok(upper_tail(k, mu))
}

/// `1 - f_k(mu)`, accurate when `f_k(mu)` is close to one.
pub fn poisson_lower_tail(k: i64, mu: f64) -> Result<f64> {
    check_mu(mu)?;
    Ok(lower_tail(k, mu))
}

fn check_mu(mu: f64) -> Result<()> {
    if !(mu >= 0.0) || !mu.is_finite() {
        return Err(Error::Domain(format!("Poisson mean must be finite and >= 0, got {mu}")));
    }
    Ok(())
}

/// Mean of `Z_{>=k+1}(y)`: `y f_k(y) / f_{k+1}(y)`, strictly increasing in `y`
/// from `k + 1` (as `y -> 0`).
pub(crate) fn heavy_mean(y: f64, k: i64) -> f64 {
    // y f_k / f_{k+1} = y (1 + pmf(k) / f_{k+1})
    let tail = upper_tail(k + 1, y);
    if tail == 0.0 {
        return (k + 1) as f64;
    }
    y * (1.0 + poisson_pmf(k, y) / tail)
}

fn heavy_mean_derivative(y: f64, k: i64) -> f64 {
    let fk = upper_tail(k, y);
    let fk1 = upper_tail(k + 1, y);
    (fk + y * poisson_pmf(k - 1, y)) / fk1 - y * fk * poisson_pmf(k, y) / (fk1 * fk1)
}

/// Solves `lambda f_k(lambda) = mu f_{k+1}(lambda)` for `lambda`.
///
/// A solution exists iff `mu > k + 1`; the returned root satisfies
/// `lambda <= mu`.
pub fn solve_lambda(mu: f64, k: i64) -> Result<f64> {
    if k < 0 {
        return Err(Error::Domain(format!("k must be >= 0, got {k}")));
    }
    let inf = (k + 1) as f64;
    if !(mu > inf) || !mu.is_finite() {
        return Err(Error::NoSolution(format!(
            "mean degree {mu} is not above the infimum {inf} of y f_k(y) / f_(k+1)(y)"
        )));
    }
    // r(y) = heavy_mean(y) - mu is increasing; r(mu) >= 0.
    let mut hi = mu;
    let mut lo = (mu - 8.0 * mu.sqrt() - 8.0).max(0.0);
    if lo > 0.0 && heavy_mean(lo, k) > mu {
        lo = 0.0;
    }
    if lo == 0.0 {
        // heavy_mean(0) = k + 1 < mu, so halving terminates
        lo = mu;
        while heavy_mean(lo, k) > mu {
            hi = lo;
            lo *= 0.5;
            if lo < 1e-300 {
                lo = 0.0;
                break;
            }
        }
    }
    let tol = 1e-13 * mu;
    let mut y = 0.5 * (lo + hi);
    for _ in 0..200 {
        let r = heavy_mean(y, k) - mu;
        if r.abs() <= tol {
            return Ok(y);
        }
        if r > 0.0 {
            hi = y;
        } else {
            lo = y;
        }
        let d = heavy_mean_derivative(y, k);
        let newton = y - r / d;
        y = if d > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo <= f64::EPSILON * hi {
            return Ok(y);
        }
    }
    Ok(y)
}

/// Poisson(lambda) conditioned on being at least `k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncatedPoisson {
    lambda: f64,
    k: i64,
}

impl TruncatedPoisson {
    pub fn new(lambda: f64, k: i64) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::Domain(format!("lambda must be positive, got {lambda}")));
        }
        Ok(Self { lambda, k: k.max(0) })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn k(&self) -> i64 {
        self.k
    }

    pub fn pmf(&self, j: i64) -> f64 {
        if j < self.k {
            return 0.0;
        }
        poisson_pmf(j, self.lambda) / upper_tail(self.k, self.lambda)
    }

    /// `lambda f_{k-1}(lambda) / f_k(lambda)`.
    pub fn mean(&self) -> f64 {
        if self.k == 0 {
            return self.lambda;
        }
        heavy_mean(self.lambda, self.k - 1)
    }

    pub fn variance(&self) -> f64 {
        // E[Z(Z-1)] = lambda^2 f_{k-2} / f_k
        let fk = upper_tail(self.k, self.lambda);
        let second = self.lambda * self.lambda * upper_tail(self.k - 2, self.lambda) / fk;
        let m = self.mean();
        second + m - m * m
    }

    /// Inversion sampling, walking the support upward from `k`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> i64 {
        let u: f64 = rng.gen();
        let mut j = self.k;
        let mut p = self.pmf(j);
        let mut cdf = p;
        while cdf < u {
            j += 1;
            p *= self.lambda / j as f64;
            let next = cdf + p;
            if next == cdf {
                // rounding left the cdf short of u; restart the draw
                return self.sample(rng);
            }
            cdf = next;
        }
        j
    }

    /// Precomputed cumulative table for repeated sampling.
    pub fn table(&self) -> TruncatedPoissonTable {
        let mut cdf = Vec::new();
        let mut j = self.k;
        let mut p = self.pmf(j);
        let mut acc = Compensated::default();
        loop {
            acc.add(p);
            cdf.push(acc.value());
            j += 1;
            p *= self.lambda / j as f64;
            if (j as f64 > self.lambda && p < 1e-18) || cdf.len() > 100_000 {
                break;
            }
        }
        TruncatedPoissonTable { k: self.k, cdf }
    }
}

/// Cumulative distribution of a truncated Poisson for fast inversion.
#[derive(Debug, Clone)]
pub struct TruncatedPoissonTable {
    k: i64,
    cdf: Vec<f64>,
}

impl TruncatedPoissonTable {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> i64 {
        let total = *self.cdf.last().unwrap_or(&1.0);
        let u: f64 = rng.gen::<f64>() * total;
        let idx = self.cdf.partition_point(|&c| c < u);
        self.k + idx.min(self.cdf.len() - 1) as i64
    }
}

/// Predicted fraction of heavy vertices holding exactly `k + 1` balls:
/// `e^{-lambda} lambda^{k+1} / ((k+1)! f_{k+1}(lambda))`.
pub fn heavy_bucket_fraction(lambda: f64, k: i64) -> f64 {
    let tail = upper_tail(k + 1, lambda);
    if tail == 0.0 {
        return 1.0;
    }
    (poisson_pmf(k + 1, lambda) / tail).clamp(0.0, 1.0)
}

/// Starting point of the scaled peeling process for mean degree `mu_bar`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialConditions {
    pub z_l: f64,
    pub z_b: f64,
    pub z_hv: f64,
    pub lambda: f64,
}

pub fn initial_conditions(mu_bar: f64, k: i64) -> Result<InitialConditions> {
    if !(mu_bar > 0.0) || !mu_bar.is_finite() {
        return Err(Error::Domain(format!("mean degree must be positive, got {mu_bar}")));
    }
    Ok(InitialConditions {
        z_l: mu_bar * lower_tail(k, mu_bar),
        z_b: mu_bar,
        z_hv: upper_tail(k + 1, mu_bar),
        lambda: mu_bar,
    })
}
