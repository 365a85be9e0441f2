//! Adaptive Dormand–Prince 5(4) integration of `y' = A(t)·y` for complex `y`.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// A time-dependent linear right-hand side `y ↦ A(t)·y`.
///
/// For Schrödinger problems `A(t) = −i·H(t)` and is anti-Hermitian, so the
/// exact flow preserves the norm.
pub trait LinearGenerator {
    fn dim(&self) -> usize;
    /// Write `A(t)·y` into `out`.
    fn apply(&self, t: f64, y: &[C64], out: &mut [C64]);
}

impl<F> LinearGenerator for (usize, F)
where
    F: Fn(f64, &[C64], &mut [C64]),
{
    fn dim(&self) -> usize {
        self.0
    }

    fn apply(&self, t: f64, y: &[C64], out: &mut [C64]) {
        (self.1)(t, y, out)
    }
}

#[derive(Debug, Clone)]
pub struct OdeOptions {
    /// Absolute and relative local error tolerance.
    pub tol: f64,
    /// Upper bound on the step; `None` means unbounded.
    pub max_step: Option<f64>,
    pub initial_step: Option<f64>,
    pub max_steps: usize,
    /// Record every accepted step (`true`) or only the endpoints.
    pub record_all: bool,
}

impl OdeOptions {
    pub fn new(tol: f64) -> Self {
        OdeOptions { tol, max_step: None, initial_step: None, max_steps: 5_000_000, record_all: true }
    }
}

/// Accepted steps of an integration run.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<C64>>,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
}

impl Trajectory {
    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("trajectory is never empty")
    }

    pub fn final_state(&self) -> &[C64] {
        self.states.last().expect("trajectory is never empty")
    }

    pub fn norms(&self) -> impl Iterator<Item = f64> + '_ {
        self.states.iter().map(|s| super::linalg::norm(s))
    }

    pub fn max_norm_deviation(&self, reference: f64) -> f64 {
        self.norms().map(|n| (n - reference).abs()).fold(0.0, f64::max)
    }
}

// Dormand–Prince 5(4) tableau.
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
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// b - b*, the difference between the 5th and embedded 4th order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;
const BETA: f64 = 0.04;
const ALPHA: f64 = 0.2 - 0.75 * BETA;

/// Integrate from `t0` to `t1` with default options at local tolerance `tol`.
pub fn ode_evolve<G: LinearGenerator + ?Sized>(rhs: &G, y0: &[C64], t0: f64, t1: f64, tol: f64) -> Result<Trajectory> {
    ode_evolve_with(rhs, y0, t0, t1, &OdeOptions::new(tol))
}

pub fn ode_evolve_with<G: LinearGenerator + ?Sized>(
    rhs: &G,
    y0: &[C64],
    t0: f64,
    t1: f64,
    opts: &OdeOptions,
) -> Result<Trajectory> {
    let n = rhs.dim();
    if y0.len() != n {
        return Err(Error::Contract(format!("initial state has length {}, generator dimension {n}", y0.len())));
    }
    if !(t0 < t1) || !t0.is_finite() || !t1.is_finite() {
        return Err(Error::Contract(format!("need finite t0 < t1, got [{t0}, {t1}]")));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::Contract("tolerance must be positive".into()));
    }
    let tol = opts.tol;
    let span = t1 - t0;
    let h_max = opts.max_step.unwrap_or(span).min(span);

    let zero = C64::new(0.0, 0.0);
    let mut k: [Vec<C64>; 7] = std::array::from_fn(|_| vec![zero; n]);
    let mut stage = vec![zero; n];
    let mut y = y0.to_vec();
    let mut y_new = vec![zero; n];
    let mut t = t0;

    let mut traj = Trajectory { times: vec![t0], states: vec![y.clone()], accepted_steps: 0, rejected_steps: 0 };

    rhs.apply(t, &y, &mut k[0]);
    let mut h = match opts.initial_step {
        Some(h) => h,
        None => {
            // Hairer's first guess from the scale of y and y'.
            let d0 = rms(&y, &y, tol);
            let d1 = rms(&k[0], &y, tol);
            let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
            h0.min(h_max)
        }
    }
    .min(h_max);
    let mut err_prev: f64 = 1e-4;
    let mut attempts = 0usize;

    while t < t1 {
        attempts += 1;
        if attempts > opts.max_steps {
            return Err(Error::Integration { t, reason: format!("exceeded {} step attempts", opts.max_steps) });
        }
        let last = t + h >= t1 || (t1 - (t + h)) < 1e-12 * span;
        if last {
            h = t1 - t;
        }
        if h <= 1e-14 * t.abs().max(1.0) {
            return Err(Error::Integration { t, reason: format!("step size underflow (h = {h:e})") });
        }

        let combos: [(&[f64], f64); 5] = [
            (&[A21], C2),
            (&[A31, A32], C3),
            (&[A41, A42, A43], C4),
            (&[A51, A52, A53, A54], C5),
            (&[A61, A62, A63, A64, A65], 1.0),
        ];
        for (s, (coefs, c)) in combos.iter().enumerate() {
            for i in 0..n {
                let mut acc = zero;
                for (j, a) in coefs.iter().enumerate() {
                    acc += k[j][i] * *a;
                }
                stage[i] = y[i] + acc * h;
            }
            rhs.apply(t + c * h, &stage, &mut k[s + 1]);
        }
        for i in 0..n {
            y_new[i] = y[i] + (k[0][i] * B1 + k[2][i] * B3 + k[3][i] * B4 + k[4][i] * B5 + k[5][i] * B6) * h;
        }
        rhs.apply(t + h, &y_new, &mut k[6]);

        let mut err: f64 = 0.0;
        for i in 0..n {
            let e = (k[0][i] * E1 + k[2][i] * E3 + k[3][i] * E4 + k[4][i] * E5 + k[5][i] * E6 + k[6][i] * E7) * h;
            let sc = tol * (1.0 + y[i].norm().max(y_new[i].norm()));
            err = err.max(e.norm() / sc);
        }
        if !err.is_finite() {
            return Err(Error::Integration { t, reason: "non-finite error estimate".into() });
        }

        if err <= 1.0 {
            let factor = if err == 0.0 {
                MAX_FACTOR
            } else {
                (SAFETY * err.powf(-ALPHA) * err_prev.powf(BETA)).clamp(MIN_FACTOR, MAX_FACTOR)
            };
            err_prev = err.max(1e-4);
            t = if last { t1 } else { t + h };
            std::mem::swap(&mut y, &mut y_new);
            k.swap(0, 6);
            traj.accepted_steps += 1;
            if opts.record_all || t >= t1 {
                traj.times.push(t);
                traj.states.push(y.clone());
            }
            h = (h * factor).min(h_max);
        } else {
            traj.rejected_steps += 1;
            let factor = (SAFETY * err.powf(-ALPHA)).clamp(MIN_FACTOR, 1.0);
            h *= factor;
        }
    }
    Ok(traj)
}

fn rms(v: &[C64], scale: &[C64], tol: f64) -> f64 {
    let n = v.len().max(1) as f64;
    (v.iter().zip(scale).map(|(a, s)| (a.norm() / (tol * (1.0 + s.norm()))).powi(2)).sum::<f64>() / n).sqrt()
}
