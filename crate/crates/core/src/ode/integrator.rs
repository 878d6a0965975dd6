//! Dormand–Prince 5(4) steps with the standard continuous extension.
//!
//! Only single steps live here; step-size policy and event handling are
//! the caller's business. The right-hand side may refuse a point by
//! returning `None`, which makes the step fail.

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// Result of one trial step.
pub struct Step {
    pub x: f64,
    pub h: f64,
    pub y: Vec<f64>,
    /// Derivative at the new point (reused as the next first stage).
    pub dy: Vec<f64>,
    /// Scaled RMS error estimate; the step is acceptable when `<= 1`.
    pub err: f64,
    dense: [Vec<f64>; 5],
}

impl Step {
    /// Continuous extension at `x + theta h`, `theta` in `[0, 1]`.
    pub fn interpolate(&self, theta: f64) -> Vec<f64> {
        let s1 = 1.0 - theta;
        let [r1, r2, r3, r4, r5] = &self.dense;
        (0..r1.len())
            .map(|i| r1[i] + theta * (r2[i] + s1 * (r3[i] + theta * (r4[i] + s1 * r5[i]))))
            .collect()
    }
}

fn combo(y: &[f64], h: f64, terms: &[(f64, &[f64])]) -> Vec<f64> {
    (0..y.len())
        .map(|i| y[i] + h * terms.iter().map(|(a, k)| a * k[i]).sum::<f64>())
        .collect()
}

/// One step of size `h` from `(x, y)` with first stage `k1 = f(x, y)`.
/// Returns `None` when any stage lies outside the domain of `f`.
pub fn try_step<F>(f: &F, x: f64, y: &[f64], k1: &[f64], h: f64, rtol: f64, atol: f64) -> Option<Step>
where
    F: Fn(f64, &[f64]) -> Option<Vec<f64>>,
{
    let k2 = f(x + C2 * h, &combo(y, h, &[(A21, k1)]))?;
    let k3 = f(x + C3 * h, &combo(y, h, &[(A31, k1), (A32, &k2)]))?;
    let k4 = f(x + C4 * h, &combo(y, h, &[(A41, k1), (A42, &k2), (A43, &k3)]))?;
    let k5 = f(
        x + C5 * h,
        &combo(y, h, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
    )?;
    let k6 = f(
        x + h,
        &combo(y, h, &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
    )?;
    let y1 = combo(y, h, &[(A71, k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
    let k7 = f(x + h, &y1)?;
    let mut acc = 0.0;
    for i in 0..y.len() {
        let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        let sc = atol + rtol * y[i].abs().max(y1[i].abs());
        acc += (e / sc).powi(2);
    }
    let err = (acc / y.len() as f64).sqrt();
    let ydiff: Vec<f64> = (0..y.len()).map(|i| y1[i] - y[i]).collect();
    let bspl: Vec<f64> = (0..y.len()).map(|i| h * k1[i] - ydiff[i]).collect();
    let r4: Vec<f64> = (0..y.len()).map(|i| ydiff[i] - h * k7[i] - bspl[i]).collect();
    let r5: Vec<f64> = (0..y.len())
        .map(|i| h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]))
        .collect();
    Some(Step {
        x: x + h,
        h,
        y: y1,
        dy: k7,
        err,
        dense: [y.to_vec(), ydiff, bspl, r4, r5],
    })
}

/// Step-size factor for the next attempt after an error estimate `err`.
pub fn step_factor(err: f64) -> f64 {
    if err == 0.0 {
        return 5.0;
    }
    (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
}
