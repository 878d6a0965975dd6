//! Fluid limit of the randomized peeling process and the orientability
//! threshold it predicts.

pub mod integrator;
pub mod system;

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypergraph::OrientationParams;
use crate::peeling::ProcessTrace;
use crate::poisson::initial_conditions;
use integrator::{step_factor, try_step};
pub use system::{derivatives, rhs, LambdaMode, OdeParams, OdeState, Termination};

/// Accepted points of an integration with their derivatives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub params: OdeParams,
    pub xs: Vec<f64>,
    pub ys: Vec<Vec<f64>>,
    pub dys: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn x_end(&self) -> f64 {
        *self.xs.last().expect("trajectory has a start point")
    }

    /// Raw state at `x` by cubic Hermite interpolation between accepted
    /// points. `None` outside `[0, x_end]`.
    pub fn raw_at(&self, x: f64) -> Option<Vec<f64>> {
        if !(x >= self.xs[0] && x <= self.x_end()) {
            return None;
        }
        let i = self.xs.partition_point(|&t| t <= x).clamp(1, self.xs.len().max(2) - 1);
        if self.xs.len() == 1 {
            return Some(self.ys[0].clone());
        }
        let (x0, x1) = (self.xs[i - 1], self.xs[i]);
        let dx = x1 - x0;
        if dx == 0.0 {
            return Some(self.ys[i].clone());
        }
        let t = (x - x0) / dx;
        let (t2, t3) = (t * t, t * t * t);
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        let (y0, y1, d0, d1) = (&self.ys[i - 1], &self.ys[i], &self.dys[i - 1], &self.dys[i]);
        Some(
            (0..y0.len())
                .map(|c| h00 * y0[c] + h10 * dx * d0[c] + h01 * y1[c] + h11 * dx * d1[c])
                .collect(),
        )
    }

    pub fn state_at(&self, x: f64) -> Option<OdeState> {
        OdeState::from_raw(x, &self.raw_at(x)?, &self.params)
    }

    /// Stored states; the terminal point is skipped when it sits on the
    /// boundary where the state is undefined.
    pub fn states(&self) -> impl Iterator<Item = OdeState> + '_ {
        self.xs
            .iter()
            .zip(&self.ys)
            .filter_map(|(&x, y)| OdeState::from_raw(x, y, &self.params))
    }

    /// Columns `x, z_L, z_B, z_HV, z_A, z_L_{h-j}.., z_H_{h-j}.., lambda, mu`.
    pub fn to_csv(&self) -> String {
        let (h, w) = (self.params.p.h(), self.params.p.w());
        let mut out = String::from("x,z_L,z_B,z_HV,z_A");
        for j in 0..w {
            let _ = write!(out, ",z_L_{}", h - j);
        }
        for j in 0..w {
            let _ = write!(out, ",z_H_{}", h - j);
        }
        out.push_str(",lambda,mu\n");
        for s in self.states() {
            let _ = write!(out, "{},{},{},{},{}", s.x, s.z_l, s.z_b, s.z_hv, s.z_a);
            for v in s.z_l_by_size.iter().chain(&s.z_h_by_size) {
                let _ = write!(out, ",{v}");
            }
            let _ = writeln!(out, ",{},{}", s.lambda, s.mu);
        }
        out
    }
}

/// Limit values at the end of an integration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoreStats {
    pub x_star: f64,
    pub alpha: f64,
    /// `beta_{h-j} = z_{H,h-j}(x*) / (h - j)` for `j = 0..w`.
    pub beta: Vec<f64>,
    pub kappa: f64,
    pub mu_hat: f64,
    pub terminated_by: Termination,
}

impl CoreStats {
    /// Whether integration reached `z_L = 0`, i.e. a nonempty core.
    pub fn has_core(&self) -> bool {
        self.terminated_by == Termination::LightExhausted
    }

    /// Core w-density, taken as zero for degenerate runs.
    pub fn effective_kappa(&self) -> f64 {
        if self.has_core() {
            self.kappa
        } else {
            0.0
        }
    }

    fn from_raw(y: &[f64], x: f64, params: &OdeParams, terminated_by: Termination) -> Self {
        let (h, w) = (params.p.h(), params.p.w());
        let il = params.idx_l();
        let (z_l, z_b, z_hv) = (y[il], y[il + 1], y[il + 2]);
        let mut heavy = vec![z_b - z_l - y[w - 1..il].iter().sum::<f64>()];
        heavy.extend_from_slice(&y[w - 1..il]);
        let beta: Vec<f64> = (0..w).map(|j| heavy[j] / (h - j) as f64).collect();
        let alpha = z_hv;
        let (kappa, mu_hat) = if alpha > 0.0 {
            (
                (0..w).map(|j| (w - j) as f64 * beta[j]).sum::<f64>() / alpha,
                (0..w).map(|j| (h - j) as f64 * beta[j]).sum::<f64>() / alpha,
            )
        } else {
            (0.0, 0.0)
        };
        Self {
            x_star: x,
            alpha,
            beta,
            kappa,
            mu_hat,
            terminated_by,
        }
    }
}

/// Integrates from the initial conditions at `params.mu_bar` to the first
/// boundary event. A start outside the domain is reported as terminated at
/// `x = 0`.
pub fn integrate(params: &OdeParams) -> Result<(Trajectory, CoreStats)> {
    let p = params.p;
    let k = p.k() as i64;
    if !(params.mu_bar > 0.0 && params.rtol > 0.0 && params.atol > 0.0 && params.event_tol > 0.0) {
        return Err(Error::InvalidInput("mu_bar and tolerances must be positive".into()));
    }
    let ic = initial_conditions(params.mu_bar, k)?;
    let il = params.idx_l();
    let mut y = vec![0.0; params.dim()];
    y[il] = ic.z_l;
    y[il + 1] = ic.z_b;
    y[il + 2] = ic.z_hv;
    if params.lambda_mode == LambdaMode::Integrated {
        y[il + 3] = crate::poisson::solve_lambda((ic.z_b - ic.z_l) / ic.z_hv, k).unwrap_or(0.0);
    }
    let f = |x: f64, y: &[f64]| rhs(params, x, y);
    let bound = (k + 2) as f64;
    let events = |y: &[f64]| {
        let heavy = y[il + 1] - y[il];
        [heavy, y[il + 2], heavy / y[il + 2] - bound]
    };
    let kinds = [
        Termination::HeavyBallsExhausted,
        Termination::HeavyVerticesExhausted,
        Termination::DegreeBound,
    ];

    let mut traj = Trajectory {
        params: *params,
        xs: vec![0.0],
        ys: vec![y.clone()],
        dys: Vec::new(),
    };
    let start_ok = events(&y).iter().all(|&g| g > 0.0);
    let mut dy = match (start_ok, f(0.0, &y)) {
        (true, Some(d)) => d,
        _ => {
            traj.dys.push(vec![0.0; y.len()]);
            let stats = CoreStats::from_raw(&y, 0.0, params, Termination::StartOutsideDomain);
            return Ok((traj, stats));
        }
    };
    traj.dys.push(dy.clone());

    let mut x = 0.0;
    let cap0 = ic.z_l / 10.0;
    let mut h = params.initial_step.map_or(cap0, |s| s.min(cap0));
    loop {
        let (z_l, dz_l) = (y[il], dy[il]);
        if z_l <= params.event_tol {
            // extrapolate the last stretch to the crossing
            let dx = if dz_l < 0.0 { z_l / -dz_l } else { 0.0 };
            let y_end: Vec<f64> = y.iter().zip(&dy).map(|(v, d)| v + d * dx).collect();
            x += dx;
            let stats = CoreStats::from_raw(&y_end, x, params, Termination::LightExhausted);
            traj.xs.push(x);
            traj.ys.push(y_end);
            traj.dys.push(dy);
            return Ok((traj, stats));
        }
        if dz_l < 0.0 {
            h = h.min(0.5 * z_l / -dz_l);
        }
        if h < params.min_step || x + h == x {
            return Err(Error::StepUnderflow { x, step: h });
        }
        let step = match try_step(&f, x, &y, &dy, h, params.rtol, params.atol) {
            None => {
                h *= 0.5;
                continue;
            }
            Some(s) if s.err > 1.0 => {
                h *= step_factor(s.err);
                continue;
            }
            Some(s) => s,
        };
        let g_new = events(&step.y);
        let crossed: Vec<usize> = (0..3).filter(|&i| !(g_new[i] > 0.0)).collect();
        if !crossed.is_empty() {
            // first root among the crossed event functions, by bisection on
            // the continuous extension
            let mut best: Option<(f64, usize)> = None;
            for &i in &crossed {
                let (mut lo, mut hi) = (0.0f64, 1.0f64);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if events(&step.interpolate(mid))[i] > 0.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                    if (hi - lo) * step.h <= params.event_tol {
                        break;
                    }
                }
                if best.is_none_or(|(t, _)| hi < t) {
                    best = Some((hi, i));
                }
            }
            let (theta, i) = best.expect("at least one crossing");
            let y_end = step.interpolate(theta);
            let x_end = x + theta * step.h;
            let stats = CoreStats::from_raw(&y_end, x_end, params, kinds[i]);
            traj.xs.push(x_end);
            traj.ys.push(y_end);
            traj.dys.push(dy);
            return Ok((traj, stats));
        }
        x = step.x;
        y = step.y;
        dy = step.dy;
        h *= step_factor(step.err);
        traj.xs.push(x);
        traj.ys.push(y.clone());
        traj.dys.push(dy.clone());
    }
}

/// Core w-density predicted at `mu_bar`, zero when no core forms.
pub fn predicted_kappa(controls: &OdeParams, mu_bar: f64) -> Result<(f64, CoreStats)> {
    let params = OdeParams { mu_bar, ..*controls };
    let (_, stats) = integrate(&params)?;
    Ok((stats.effective_kappa(), stats))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdResult {
    pub p: OrientationParams,
    pub mu_tilde: f64,
    /// Core mean degree predicted at `mu_tilde`.
    pub mu_hat: f64,
    pub lo: f64,
    pub hi: f64,
    pub kappa_lo: f64,
    pub kappa_hi: f64,
    pub iterations: usize,
    pub stats_lo: CoreStats,
    pub stats_hi: CoreStats,
    pub stats_mid: CoreStats,
}

/// Bisects on `mu_bar` for the point where the core w-density reaches `k`.
pub fn find_threshold(p: OrientationParams, tol: f64) -> Result<ThresholdResult> {
    find_threshold_with(&OdeParams::new(p, 0.0), tol)
}

/// As [`find_threshold`] with explicit integration controls.
pub fn find_threshold_with(controls: &OdeParams, tol: f64) -> Result<ThresholdResult> {
    if !(tol > 0.0) {
        return Err(Error::InvalidInput("tolerance must be positive".into()));
    }
    let p = controls.p;
    let k = p.k() as f64;
    let mut lo = k;
    let mut hi = (p.h() * p.k()) as f64 / p.w() as f64;
    let (mut k_lo, mut s_lo) = predicted_kappa(controls, lo)?;
    let (mut k_hi, mut s_hi) = predicted_kappa(controls, hi)?;
    let mut expand = 0;
    while k_lo >= k || k_hi < k {
        if expand == 40 {
            return Err(Error::Bracket { lo, hi });
        }
        expand += 1;
        if k_lo >= k {
            lo *= 0.5;
            (k_lo, s_lo) = predicted_kappa(controls, lo)?;
        }
        if k_hi < k {
            hi *= 1.25;
            (k_hi, s_hi) = predicted_kappa(controls, hi)?;
        }
    }
    let mut iterations = 0;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let (km, sm) = predicted_kappa(controls, mid)?;
        if km < k {
            (lo, k_lo, s_lo) = (mid, km, sm);
        } else {
            (hi, k_hi, s_hi) = (mid, km, sm);
        }
        iterations += 1;
    }
    let mu_tilde = 0.5 * (lo + hi);
    let (_, stats_mid) = predicted_kappa(controls, mu_tilde)?;
    Ok(ThresholdResult {
        p,
        mu_tilde,
        mu_hat: stats_mid.mu_hat,
        lo,
        hi,
        kappa_lo: k_lo,
        kappa_hi: k_hi,
        iterations,
        stats_lo: s_lo,
        stats_hi: s_hi,
        stats_mid,
    })
}

/// Sup-norm deviation between a trajectory and a scaled process trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariableDeviation {
    pub name: String,
    pub max_abs: f64,
    /// `max_abs` divided by the peak magnitude of the variable along the
    /// trajectory.
    pub max_rel: f64,
}

/// Compares the trace with the trajectory at every record whose scaled time
/// lies inside the integrated range.
pub fn trajectory_vs_trace(traj: &Trajectory, trace: &ProcessTrace) -> Vec<VariableDeviation> {
    let (h, w) = (traj.params.p.h(), traj.params.p.w());
    let mut names = vec!["z_L".to_string(), "z_B".to_string(), "z_HV".to_string()];
    names.extend((0..w).map(|j| format!("z_L_{}", h - j)));
    names.extend((0..w).map(|j| format!("z_H_{}", h - j)));
    let vars = |l: f64, b: f64, hv: f64, ls: &[f64], hs: &[f64]| {
        let mut v = vec![l, b, hv];
        v.extend_from_slice(ls);
        v.extend_from_slice(hs);
        v
    };
    let mut max_abs = vec![0.0f64; names.len()];
    let mut peak = vec![0.0f64; names.len()];
    for s in traj.states() {
        let v = vars(s.z_l, s.z_b, s.z_hv, &s.z_l_by_size, &s.z_h_by_size);
        for (p, x) in peak.iter_mut().zip(v) {
            *p = p.max(x.abs());
        }
    }
    let n = trace.n as f64;
    for r in &trace.records {
        let x = r.step as f64 / n;
        let Some(raw) = traj.raw_at(x) else { continue };
        let il = traj.params.idx_l();
        let mut ls = vec![raw[il] - raw[..w - 1].iter().sum::<f64>()];
        ls.extend_from_slice(&raw[..w - 1]);
        let mut hs = vec![raw[il + 1] - raw[il] - raw[w - 1..il].iter().sum::<f64>()];
        hs.extend_from_slice(&raw[w - 1..il]);
        let ode = vars(raw[il], raw[il + 1], raw[il + 2], &ls, &hs);
        let lt: Vec<f64> = r.light_by_size.iter().map(|&c| c as f64 / n).collect();
        let ht: Vec<f64> = r.heavy_by_size.iter().map(|&c| c as f64 / n).collect();
        let sim = vars(
            r.light as f64 / n,
            r.balls as f64 / n,
            r.heavy_vertices as f64 / n,
            &lt,
            &ht,
        );
        for i in 0..names.len() {
            max_abs[i] = max_abs[i].max((ode[i] - sim[i]).abs());
        }
    }
    names
        .into_iter()
        .enumerate()
        .map(|(i, name)| VariableDeviation {
            name,
            max_abs: max_abs[i],
            max_rel: if peak[i] > 0.0 { max_abs[i] / peak[i] } else { max_abs[i] },
        })
        .collect()
}
