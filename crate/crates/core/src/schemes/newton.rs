//! Damped two-dimensional Newton on the step equations.

use super::{step_problem, SchemeState, StepProblem};
use crate::types::{ErrorKind, Location, NumericError, Point2, STEP_TOL};

pub const MAX_ITER: u32 = 50;
pub const MAX_HALVINGS: u32 = 20;
const FD_REL_STEP: f64 = 1e-7;

/// Offsets, in units of the last chord, tried across the chord by [`newton_multistart`].
const START_OFFSETS: [f64; 11] = [0.0, 0.05, -0.05, 0.1, -0.1, 0.25, -0.25, 0.5, -0.5, 1.0, -1.0];

fn diverged(at: &Point2, detail: impl Into<String>) -> NumericError {
    NumericError::new(ErrorKind::NewtonDivergence, Location::Point(*at), detail)
}

/// Extra iterations allowed once the residual is below tolerance.
const MAX_POLISH: u32 = 4;

/// Damped Newton on `eval` (residuals, or `None` outside the domain),
/// converging on the true step residual `norm_of`.
///
/// Iteration continues past [`STEP_TOL`] while full steps still reduce the
/// residual, so the returned point is accurate to rounding rather than to
/// the tolerance.
fn damped_newton(
    eval: &dyn Fn(&Point2) -> Option<[f64; 2]>,
    norm_of: &dyn Fn(&Point2) -> f64,
    guess: Point2,
) -> Result<(Point2, u32), NumericError> {
    let merit = |q: &Point2| eval(q).map_or(f64::INFINITY, |f| f[0].abs().max(f[1].abs()));
    let mut q = guess;
    let mut m = merit(&q);
    if !m.is_finite() {
        return Err(diverged(&guess, "residual undefined at the initial guess"));
    }
    let mut polish = 0;
    for iter in 0..MAX_ITER {
        let converged = norm_of(&q) <= STEP_TOL;
        if converged && (polish >= MAX_POLISH || m == 0.0) {
            return Ok((q, iter));
        }
        let f = eval(&q).expect("finite merit");
        let hx = FD_REL_STEP * q.x.abs().max(1.0);
        let hy = FD_REL_STEP * q.y.abs().max(1.0);
        let probe = |p: Point2| eval(&p).ok_or_else(|| diverged(&q, "Jacobian probe left the domain"));
        let fx = probe(Point2::new(q.x + hx, q.y))?;
        let fy = probe(Point2::new(q.x, q.y + hy))?;
        let (j11, j21) = ((fx[0] - f[0]) / hx, (fx[1] - f[1]) / hx);
        let (j12, j22) = ((fy[0] - f[0]) / hy, (fy[1] - f[1]) / hy);
        let det = j11 * j22 - j12 * j21;
        let scale = (j11.abs() + j12.abs()) * (j21.abs() + j22.abs());
        if !(det.abs() > 1e-14 * scale) || !det.is_finite() {
            if converged {
                return Ok((q, iter));
            }
            return Err(diverged(&q, "singular Jacobian"));
        }
        let dx = (j22 * f[0] - j12 * f[1]) / det;
        let dy = (j11 * f[1] - j21 * f[0]) / det;
        if converged {
            let trial = Point2::new(q.x - dx, q.y - dy);
            let mt = merit(&trial);
            if !(mt < m) {
                return Ok((q, iter));
            }
            q = trial;
            m = mt;
            polish += 1;
            continue;
        }
        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            let trial = Point2::new(q.x - lambda * dx, q.y - lambda * dy);
            let mt = merit(&trial);
            if mt < m {
                accepted = Some((trial, mt));
                break;
            }
            lambda *= 0.5;
        }
        match accepted {
            Some((trial, mt)) => {
                q = trial;
                m = mt;
            }
            None => return Err(diverged(&q, format!("no descent (residual {:e})", norm_of(&q)))),
        }
    }
    if norm_of(&q) <= STEP_TOL {
        Ok((q, MAX_ITER))
    } else {
        Err(diverged(&q, format!("no convergence in {MAX_ITER} iterations (residual {:e})", norm_of(&q))))
    }
}

/// Newton from `guess` on the step equations; finite-difference Jacobian.
pub fn newton_on_problem(problem: &StepProblem, guess: Point2) -> Result<(Point2, u32), NumericError> {
    damped_newton(
        &|q| problem.residuals(q).ok(),
        &|q| problem.residual_norm(q),
        guess,
    )
}

/// Newton from `guess` on the equations of the state's next step.
pub fn newton_fallback_step(state: &SchemeState, guess: Point2) -> Result<(Point2, u32), NumericError> {
    newton_on_problem(&step_problem(state)?, guess)
}

/// Newton from the extrapolated point and offsets across the chord; only
/// solutions turning the way the target demands are accepted.
///
/// Small offsets come first: near the edge of the sl4 domain the two
/// intersections can be much closer together than the chord is long.
pub fn newton_multistart(problem: &StepProblem) -> Result<(Point2, u32), NumericError> {
    let (ex, ey) = problem.p1.sub(&problem.p0);
    let ahead = Point2::new(problem.p1.x + ex, problem.p1.y + ey);
    let mut total = 0;
    let mut last = None;
    for &s in &START_OFFSETS {
        let guess = Point2::new(ahead.x - s * ey, ahead.y + s * ex);
        match newton_on_problem(problem, guess) {
            Ok((q, it)) => {
                total += it;
                if q.x > 0.0 && problem.turns_correctly(&q) {
                    return Ok((q, total));
                }
            }
            Err(e) => last = Some(e),
        }
    }
    Err(last.unwrap_or_else(|| diverged(&problem.p1, "only wrongly turning solutions found")))
}
