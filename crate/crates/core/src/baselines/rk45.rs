//! Adaptive Dormand–Prince 5(4) integrator.
//!
//! Elementary step-size controller (safety 0.9, growth clamped to
//! `[0.2, 5.0]`), error measured in the RMS norm against
//! `abs_tol + rel_tol * max(|y_n|, |y_{n+1}|)`. The run stops with
//! `StepUnderflow` once the proposed step falls below `1e-14 * max(|x|, 1)`,
//! and with `SingularityDetected` once any state component exceeds the
//! blow-up guard in magnitude or the right-hand side cannot be evaluated.

use std::time::Instant;

use crate::types::{ErrorKind, HaltReason, Location, NumericError, Point2, Trajectory};

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
// Fifth-order weights; also the last stage row (FSAL).
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// Difference between fifth- and fourth-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;

type Rhs<'a> = dyn Fn(f64, &[f64], &mut [f64]) -> Result<(), NumericError> + 'a;

/// `state' = rhs(x, state)` in `dimension` unknowns.
pub struct FirstOrderSystem<'a> {
    pub dimension: usize,
    rhs: Box<Rhs<'a>>,
}

impl<'a> FirstOrderSystem<'a> {
    pub fn new(
        dimension: usize,
        rhs: impl Fn(f64, &[f64], &mut [f64]) -> Result<(), NumericError> + 'a,
    ) -> Self {
        Self {
            dimension,
            rhs: Box::new(rhs),
        }
    }

    pub fn eval(&self, x: f64, state: &[f64], out: &mut [f64]) -> Result<(), NumericError> {
        debug_assert_eq!(state.len(), self.dimension);
        (self.rhs)(x, state, out)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Rk45Options {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_steps: usize,
    /// Any `|state_i|` above this is reported as a singularity.
    pub blowup: f64,
    pub min_step_factor: f64,
    /// Record the wall time of every accepted step.
    pub time_steps: bool,
}

impl Rk45Options {
    pub fn new(rel_tol: f64, abs_tol: f64) -> Self {
        Self {
            rel_tol,
            abs_tol,
            max_steps: 1_000_000,
            blowup: 1e8,
            min_step_factor: 1e-14,
            time_steps: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Rk45Result {
    pub xs: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    /// `None` when `x_end` was reached.
    pub failure: Option<NumericError>,
    pub accepted: usize,
    pub rejected: usize,
    pub step_seconds: Vec<f64>,
}

impl Rk45Result {
    pub fn completed(&self) -> bool {
        self.failure.is_none()
    }

    pub fn last_x(&self) -> f64 {
        *self.xs.last().expect("at least the initial point")
    }

    pub fn last_state(&self) -> &[f64] {
        self.states.last().expect("at least the initial point")
    }

    /// `(x, state[0])` samples as a trajectory.
    pub fn to_trajectory(&self) -> Trajectory {
        let points = self
            .xs
            .iter()
            .zip(&self.states)
            .map(|(&x, s)| Point2::new(x, s[0]))
            .collect();
        let halt = match &self.failure {
            None => HaltReason::ReachedEnd { x: self.last_x() },
            Some(e) => HaltReason::Error(e.clone()),
        };
        Trajectory {
            points,
            diagnostics: Vec::new(),
            halt,
        }
    }
}

fn rms_error(err: &[f64], y0: &[f64], y1: &[f64], opts: &Rk45Options) -> f64 {
    let n = err.len() as f64;
    let sum: f64 = err
        .iter()
        .zip(y0.iter().zip(y1))
        .map(|(e, (a, b))| {
            let sc = opts.abs_tol + opts.rel_tol * a.abs().max(b.abs());
            (e / sc).powi(2)
        })
        .sum();
    (sum / n).sqrt()
}

fn wrap_rhs_failure(x: f64, e: NumericError) -> NumericError {
    if e.kind == ErrorKind::SingularityDetected {
        e
    } else {
        NumericError::singularity(x, format!("right-hand side undefined: {}", e.detail))
    }
}

/// Starting step in the spirit of Hairer–Nørsett–Wanner.
fn initial_step(
    sys: &FirstOrderSystem<'_>,
    x0: f64,
    y0: &[f64],
    f0: &[f64],
    dir: f64,
    span: f64,
    opts: &Rk45Options,
) -> f64 {
    let n = y0.len() as f64;
    let sc: Vec<f64> = y0
        .iter()
        .map(|v| opts.abs_tol + opts.rel_tol * v.abs())
        .collect();
    let d0 = (y0.iter().zip(&sc).map(|(v, s)| (v / s).powi(2)).sum::<f64>() / n).sqrt();
    let d1 = (f0.iter().zip(&sc).map(|(v, s)| (v / s).powi(2)).sum::<f64>() / n).sqrt();
    let mut h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    h0 = h0.min(span);
    let y1: Vec<f64> = y0.iter().zip(f0).map(|(y, f)| y + dir * h0 * f).collect();
    let mut f1 = vec![0.0; y0.len()];
    if sys.eval(x0 + dir * h0, &y1, &mut f1).is_err() {
        return h0 * 1e-3;
    }
    let d2 = (f1
        .iter()
        .zip(f0)
        .zip(&sc)
        .map(|((a, b), s)| ((a - b) / s).powi(2))
        .sum::<f64>()
        / n)
        .sqrt()
        / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(1.0 / 5.0)
    };
    (100.0 * h0).min(h1).min(span)
}

/// Integrates from `x0` to `x_end` (either direction).
pub fn rk45_integrate_with(
    sys: &FirstOrderSystem<'_>,
    x0: f64,
    state0: &[f64],
    x_end: f64,
    opts: &Rk45Options,
) -> Rk45Result {
    let n = sys.dimension;
    let mut result = Rk45Result {
        xs: vec![x0],
        states: vec![state0.to_vec()],
        failure: None,
        accepted: 0,
        rejected: 0,
        step_seconds: Vec::new(),
    };
    if x_end == x0 {
        return result;
    }
    let dir = (x_end - x0).signum();
    let span = (x_end - x0).abs();

    let mut x = x0;
    let mut y = state0.to_vec();
    let mut k1 = vec![0.0; n];
    if let Err(e) = sys.eval(x, &y, &mut k1) {
        result.failure = Some(wrap_rhs_failure(x, e));
        return result;
    }
    let mut h = initial_step(sys, x, &y, &k1, dir, span, opts);

    let (mut k2, mut k3, mut k4, mut k5, mut k6, mut k7) = (
        vec![0.0; n],
        vec![0.0; n],
        vec![0.0; n],
        vec![0.0; n],
        vec![0.0; n],
        vec![0.0; n],
    );
    let mut tmp = vec![0.0; n];
    let mut y_new = vec![0.0; n];
    let mut err = vec![0.0; n];

    let mut step_start = Instant::now();
    loop {
        if result.accepted + result.rejected >= opts.max_steps {
            result.failure = Some(NumericError::new(
                ErrorKind::StepUnderflow,
                Location::X(x),
                format!("step budget of {} exhausted", opts.max_steps),
            ));
            break;
        }
        let remaining = (x_end - x).abs();
        let last = h >= remaining;
        if last {
            h = remaining;
        }
        if h < opts.min_step_factor * x.abs().max(1.0) {
            result.failure = Some(NumericError::new(
                ErrorKind::StepUnderflow,
                Location::X(x),
                format!("step size {h:e} underflowed"),
            ));
            break;
        }
        let hs = dir * h;

        let stages = (|| -> Result<(), NumericError> {
            for i in 0..n {
                tmp[i] = y[i] + hs * A21 * k1[i];
            }
            sys.eval(x + C2 * hs, &tmp, &mut k2)?;
            for i in 0..n {
                tmp[i] = y[i] + hs * (A31 * k1[i] + A32 * k2[i]);
            }
            sys.eval(x + C3 * hs, &tmp, &mut k3)?;
            for i in 0..n {
                tmp[i] = y[i] + hs * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
            }
            sys.eval(x + C4 * hs, &tmp, &mut k4)?;
            for i in 0..n {
                tmp[i] = y[i] + hs * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
            }
            sys.eval(x + C5 * hs, &tmp, &mut k5)?;
            for i in 0..n {
                tmp[i] = y[i]
                    + hs * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
            }
            sys.eval(x + hs, &tmp, &mut k6)?;
            for i in 0..n {
                y_new[i] = y[i]
                    + hs * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i]);
            }
            sys.eval(x + hs, &y_new, &mut k7)?;
            Ok(())
        })();

        let err_norm = match stages {
            Ok(()) if y_new.iter().all(|v| v.is_finite()) => {
                for i in 0..n {
                    err[i] = hs
                        * (E1 * k1[i]
                            + E3 * k3[i]
                            + E4 * k4[i]
                            + E5 * k5[i]
                            + E6 * k6[i]
                            + E7 * k7[i]);
                }
                rms_error(&err, &y, &y_new, opts)
            }
            // Undefined or non-finite stage: shrink and retry.
            _ => f64::INFINITY,
        };

        if err_norm <= 1.0 {
            x = if last { x_end } else { x + hs };
            std::mem::swap(&mut y, &mut y_new);
            std::mem::swap(&mut k1, &mut k7);
            result.accepted += 1;
            result.xs.push(x);
            result.states.push(y.clone());
            if opts.time_steps {
                let now = Instant::now();
                result.step_seconds.push((now - step_start).as_secs_f64());
                step_start = now;
            }
            if let Some(v) = y.iter().find(|v| v.abs() > opts.blowup) {
                result.failure = Some(NumericError::singularity(
                    x,
                    format!("state magnitude {v:e} exceeded blow-up guard"),
                ));
                break;
            }
            if last {
                break;
            }
            let factor = if err_norm == 0.0 {
                MAX_FACTOR
            } else {
                (SAFETY * err_norm.powf(-0.2)).clamp(MIN_FACTOR, MAX_FACTOR)
            };
            h *= factor;
        } else {
            result.rejected += 1;
            let factor = if err_norm.is_finite() {
                (SAFETY * err_norm.powf(-0.2)).clamp(MIN_FACTOR, 1.0)
            } else {
                MIN_FACTOR
            };
            h *= factor;
        }
    }
    result
}

/// Integrates with default guards (`|state| > 1e8` is a singularity).
pub fn rk45_integrate(
    sys: &FirstOrderSystem<'_>,
    x0: f64,
    state0: &[f64],
    x_end: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> Rk45Result {
    rk45_integrate_with(sys, x0, state0, x_end, &Rk45Options::new(rel_tol, abs_tol))
}
