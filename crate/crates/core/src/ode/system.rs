//! State layout and right-hand side of the peeling differential equations.
//!
//! The raw state vector is
//! `[z_{L,h-1} .. z_{L,h-w+1}, z_{H,h-1} .. z_{H,h-w+1}, z_L, z_B, z_HV]`,
//! followed by `lambda` when it is integrated instead of solved. The
//! size-`h` components are derived from the totals.

use serde::{Deserialize, Serialize};

use crate::hypergraph::OrientationParams;
use crate::poisson::{heavy_bucket_fraction, poisson_pmf, solve_lambda, upper_tail};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LambdaMode {
    /// Solve `lambda f_k(lambda) = mu f_{k+1}(lambda)` at every evaluation.
    Algebraic,
    /// Carry `lambda` as a state variable driven by its own derivative.
    Integrated,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OdeParams {
    pub p: OrientationParams,
    pub mu_bar: f64,
    pub rtol: f64,
    pub atol: f64,
    /// Defaults to a tenth of `z_L(0)`; larger values are clipped to that.
    pub initial_step: Option<f64>,
    pub min_step: f64,
    /// Integration stops once `z_L` falls to this level; the crossing is
    /// then extrapolated linearly.
    pub event_tol: f64,
    pub lambda_mode: LambdaMode,
}

impl OdeParams {
    pub fn new(p: OrientationParams, mu_bar: f64) -> Self {
        Self {
            p,
            mu_bar,
            rtol: 1e-11,
            atol: 1e-14,
            initial_step: None,
            min_step: 1e-18,
            event_tol: 1e-14,
            lambda_mode: LambdaMode::Algebraic,
        }
    }

    /// Same controls with both tolerances scaled by `factor`.
    pub fn scale_tolerances(mut self, factor: f64) -> Self {
        self.rtol *= factor;
        self.atol *= factor;
        self.event_tol *= factor;
        self
    }

    pub fn dim(&self) -> usize {
        let base = 2 * (self.p.w() - 1) + 3;
        match self.lambda_mode {
            LambdaMode::Algebraic => base,
            LambdaMode::Integrated => base + 1,
        }
    }

    pub(crate) fn idx_l(&self) -> usize {
        2 * (self.p.w() - 1)
    }
}

/// Which boundary of the domain stopped the integration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Termination {
    /// `z_L` reached zero: the core has been found.
    LightExhausted,
    /// `z_B - z_L` reached zero.
    HeavyBallsExhausted,
    /// `z_HV` reached zero.
    HeavyVerticesExhausted,
    /// The heavy mean degree fell to `k + 2`.
    DegreeBound,
    /// The initial state is already outside the domain.
    StartOutsideDomain,
}

/// Full state at one point, with derived quantities filled in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OdeState {
    pub x: f64,
    /// `z_{L,h-j}` for `j = 0..w`.
    pub z_l_by_size: Vec<f64>,
    /// `z_{H,h-j}` for `j = 0..w`.
    pub z_h_by_size: Vec<f64>,
    pub z_l: f64,
    pub z_b: f64,
    pub z_hv: f64,
    pub lambda: f64,
    pub mu: f64,
    pub z_a: f64,
}

impl OdeState {
    pub fn z_b_by_size(&self, j: usize) -> f64 {
        self.z_l_by_size[j] + self.z_h_by_size[j]
    }

    pub fn z_h(&self) -> f64 {
        self.z_b - self.z_l
    }

    /// Builds the state from a raw vector. `None` outside the domain where
    /// the right-hand side is defined.
    pub fn from_raw(x: f64, y: &[f64], params: &OdeParams) -> Option<Self> {
        let (w, k) = (params.p.w(), params.p.k() as i64);
        let il = params.idx_l();
        let (z_l, z_b, z_hv) = (y[il], y[il + 1], y[il + 2]);
        if !(z_l > 0.0 && z_b - z_l > 0.0 && z_hv > 0.0) || y.iter().any(|v| !v.is_finite()) {
            return None;
        }
        let mu = (z_b - z_l) / z_hv;
        let lambda = match params.lambda_mode {
            LambdaMode::Algebraic => solve_lambda(mu, k).ok()?,
            LambdaMode::Integrated => {
                if mu <= (k + 1) as f64 {
                    return None;
                }
                y[il + 3]
            }
        };
        if !(lambda > 0.0) {
            return None;
        }
        let mut z_l_by_size = Vec::with_capacity(w);
        let mut z_h_by_size = Vec::with_capacity(w);
        z_l_by_size.push(z_l - y[..w - 1].iter().sum::<f64>());
        z_h_by_size.push(z_b - z_l - y[w - 1..il].iter().sum::<f64>());
        z_l_by_size.extend_from_slice(&y[..w - 1]);
        z_h_by_size.extend_from_slice(&y[w - 1..il]);
        Some(Self {
            x,
            z_l_by_size,
            z_h_by_size,
            z_l,
            z_b,
            z_hv,
            lambda,
            mu,
            z_a: heavy_bucket_fraction(lambda, k) * z_hv,
        })
    }

    /// Residual of the lambda-mu relation.
    pub fn lambda_residual(&self, k: usize) -> f64 {
        let k = k as i64;
        self.lambda * upper_tail(k, self.lambda) - self.mu * upper_tail(k + 1, self.lambda)
    }
}

/// `a / b` clamped to `[0, 1]`, and `0` when `b` vanishes.
fn ratio(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        0.0
    } else {
        (a / b).clamp(0.0, 1.0)
    }
}

/// Derivative vector in the raw layout.
pub fn derivatives(s: &OdeState, params: &OdeParams) -> Vec<f64> {
    let (h, w, k) = (params.p.h(), params.p.w(), params.p.k());
    let hf = h as f64;
    let drop = (h - w) as f64;
    let kf = k as f64;
    let l = &s.z_l_by_size;
    let hv = &s.z_h_by_size;
    let b = |j: usize| l[j] + hv[j];
    let z_h = s.z_h();
    let last = w - 1;
    // chance that the chosen light ball sits in an edge about to be removed
    let pk = l[last] / s.z_l;
    // chance that a removed ball hits a heavy vertex of degree k + 1
    let heavyhit = ratio(hv[last], b(last)) * (kf + 1.0) * s.z_a / z_h;
    let migrate = pk * drop * heavyhit * kf / z_h;

    let mut out = vec![0.0; params.dim()];
    for j in 1..w {
        let jf = j as f64;
        let stay = l[j] / s.z_l;
        let arrive = l[j - 1] / s.z_l * (hf - jf);
        out[j - 1] = stay * (-1.0 - (hf - jf - 1.0) * ratio(l[j], b(j)))
            + migrate * hv[j]
            + arrive * ratio(l[j - 1], b(j - 1));
        out[w - 1 + j - 1] = stay * (-(hf - jf - 1.0) * ratio(hv[j], b(j))) - migrate * hv[j]
            + arrive * ratio(hv[j - 1], b(j - 1));
    }
    let il = params.idx_l();
    let dz_l = -1.0 + pk * (-drop * ratio(l[last], b(last)) + drop * kf * heavyhit);
    let dz_b = -1.0 - drop * pk;
    let dz_hv = -pk * drop * heavyhit;
    out[il] = dz_l;
    out[il + 1] = dz_b;
    out[il + 2] = dz_hv;
    if params.lambda_mode == LambdaMode::Integrated {
        out[il + 3] = lambda_derivative(s, dz_l, dz_b, dz_hv, k as i64);
    }
    out
}

/// `lambda'` from differentiating the lambda-mu relation.
pub fn lambda_derivative(s: &OdeState, dz_l: f64, dz_b: f64, dz_hv: f64, k: i64) -> f64 {
    let dmu = ((dz_b - dz_l) * s.z_hv - (s.z_b - s.z_l) * dz_hv) / (s.z_hv * s.z_hv);
    let lam = s.lambda;
    let denom = upper_tail(k, lam) + lam * poisson_pmf(k - 1, lam) - s.mu * poisson_pmf(k, lam);
    dmu * upper_tail(k + 1, lam) / denom
}

/// Right-hand side on raw vectors; `None` outside the domain.
pub fn rhs(params: &OdeParams, x: f64, y: &[f64]) -> Option<Vec<f64>> {
    let s = OdeState::from_raw(x, y, params)?;
    let d = derivatives(&s, params);
    d.iter().all(|v| v.is_finite()).then_some(d)
}
