//! Invariant difference schemes.
//!
//! Every step, for either order, prescribes two quantities on the new point
//! `q` given the last two mesh points `p0`, `p1`:
//!
//! * the mesh equation `I(p1, q) = K`;
//! * a target `T` for the travel-oriented `J1` of `(p0, p1, q)`. Second order
//!   uses `T = C`. Third order solves `J2 = F(J1)` for the new `J1`, which
//!   gives `T = J1' + (I_a + I_b + K)/3 · G(J1')` where `J1'` is the `J1` of
//!   the previous window, `I_a`, `I_b` its two mesh invariants and
//!   `G(u) = F(u)` (sl3) or `F(u) - 6u² - 3` (sl4).
//!
//! Fixing `J1 = T` and both mesh invariants fixes the outer invariant
//! `I(p0, q)`, so `q` lies on two loci of constant two-point invariant: a
//! circle (sl3) or a hyperbola (sl4) around each of `p0` and `p1`. The loci
//! share their quadratic part, so subtracting them leaves a line. The two
//! line∩conic roots are mirror images with opposite turning; the one whose
//! turning sign matches `T` is the step.

pub mod bootstrap;
pub mod conic;
pub mod newton;

use std::time::Instant;

use crate::invariants::{signed_j1, signed_j2, turning, two_point};
use crate::types::{
    ErrorKind, HaltReason, Location, NumericError, Order, Point2, Realization, SchemeSpec,
    StepDiagnostics, Trajectory, CROSS_TOL, STEP_TOL,
};

pub use bootstrap::{bootstrap, bootstrap_from_conic, InitialData};
pub use conic::{line_conic_roots, solve_line_conic, ConicCoeffs, LineCoeffs};
pub use newton::{newton_fallback_step, newton_multistart, newton_on_problem};

/// `|T| · K` at or above this means the mesh no longer resolves the curvature.
pub const RESOLUTION_LIMIT: f64 = 1.0;
/// Below this `|T|` the turning sign cannot separate the roots.
const AMBIGUOUS_TARGET: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct SchemeState {
    /// The last `order` mesh points (2 or 3).
    pub window: Vec<Point2>,
    pub spec: SchemeSpec,
    /// Travel-oriented `J1` of the newest complete window, if any.
    pub last_j1: Option<f64>,
}

impl SchemeState {
    pub fn new(window: Vec<Point2>, spec: SchemeSpec) -> Result<Self, NumericError> {
        spec.validate()?;
        let need = spec.order.stencil_width() - 1;
        if window.len() != need {
            return Err(NumericError::domain(
                Location::None,
                format!("window needs {need} points, got {}", window.len()),
            ));
        }
        for (i, p) in window.iter().enumerate() {
            if !crate::types::validate_point(p, spec.realization) {
                return Err(NumericError::domain(
                    Location::Index(i),
                    format!("window point {p} outside x > 0"),
                ));
            }
        }
        for (i, pair) in window.windows(2).enumerate() {
            let k = two_point(spec.realization, &pair[0], &pair[1])?;
            if (k - spec.k).abs() > CROSS_TOL * (1.0 + spec.k) {
                return Err(NumericError::domain(
                    Location::Index(i + 1),
                    format!("mesh condition violated: I = {k}, K = {}", spec.k),
                ));
            }
        }
        let last_j1 = if window.len() == 3 {
            Some(signed_j1(spec.realization, &window[0], &window[1], &window[2])?)
        } else {
            None
        };
        Ok(Self {
            window,
            spec,
            last_j1,
        })
    }

    pub fn realization(&self) -> Realization {
        self.spec.realization
    }

    fn push(&mut self, q: Point2, j1: f64) {
        self.window.remove(0);
        self.window.push(q);
        self.last_j1 = Some(j1);
    }
}

/// The two equations of a single step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepProblem {
    pub realization: Realization,
    pub p0: Point2,
    pub p1: Point2,
    pub k: f64,
    /// Target travel-oriented `J1` of `(p0, p1, q)`.
    pub target: f64,
    /// Implied value of `I(p0, q)`.
    pub outer: f64,
}

/// `I(p0, q)` implied by `J1(p0, p1, q) = target`, `I(p0, p1) = inner`, `I(p1, q) = k`.
pub fn outer_invariant(realization: Realization, inner: f64, k: f64, target: f64) -> f64 {
    let sum = inner + k;
    match realization {
        Realization::Sl3 => sum - (target * target - 1.0) * inner * k * sum / 8.0,
        Realization::Sl4 => sum + (0.5 * target * target + 1.0) * inner * k * sum,
    }
}

/// `T` for the current state.
pub fn step_target(state: &SchemeState) -> Result<f64, NumericError> {
    let spec = &state.spec;
    match spec.order {
        Order::Second => Ok(spec.c.expect("validated")),
        Order::Third => {
            let r = spec.realization;
            let w = &state.window;
            let j1 = match state.last_j1 {
                Some(j) => j,
                None => signed_j1(r, &w[0], &w[1], &w[2])?,
            };
            let ia = two_point(r, &w[0], &w[1])?;
            let ib = two_point(r, &w[1], &w[2])?;
            let f = spec.forcing.as_ref().expect("validated").eval(j1);
            let g = match r {
                Realization::Sl3 => f,
                Realization::Sl4 => f - 6.0 * j1 * j1 - 3.0,
            };
            Ok(j1 + (ia + ib + spec.k) / 3.0 * g)
        }
    }
}

pub fn step_problem(state: &SchemeState) -> Result<StepProblem, NumericError> {
    let r = state.realization();
    let n = state.window.len();
    let (p0, p1) = (state.window[n - 2], state.window[n - 1]);
    let k = state.spec.k;
    let target = step_target(state)?;
    if !target.is_finite() || target.abs() * k >= RESOLUTION_LIMIT {
        return Err(NumericError::singularity(
            p1.x,
            format!("target J1 = {target} is unresolved by mesh constant K = {k}"),
        ));
    }
    let inner = two_point(r, &p0, &p1)?;
    let outer = outer_invariant(r, inner, k, target);
    if !(outer > 0.0) {
        return Err(NumericError::new(
            ErrorKind::NoIntersection,
            Location::Point(p1),
            format!("implied outer invariant {outer} is not positive"),
        ));
    }
    Ok(StepProblem {
        realization: r,
        p0,
        p1,
        k,
        target,
        outer,
    })
}

/// The locus `I(centre, q) = value` as a conic in `q`.
pub fn invariant_locus(realization: Realization, centre: &Point2, value: f64) -> ConicCoeffs {
    local_locus(realization, (centre.x, centre.y), centre.x, value, 0.0)
}

/// The same locus in coordinates `(u, v) = (x - ox, y - oy)`.
///
/// `centre_local` is the centre in those coordinates and `centre_x` its
/// absolute abscissa; the locus depends on absolute x through `x = u + ox`.
fn local_locus(
    realization: Realization,
    centre_local: (f64, f64),
    centre_x: f64,
    value: f64,
    ox: f64,
) -> ConicCoeffs {
    let (cu, cv) = centre_local;
    match realization {
        // (u - cu)² + (v - cv)² = value² cx (u + ox)
        Realization::Sl3 => {
            let w = value * value * centre_x;
            ConicCoeffs {
                xx: 1.0,
                xy: 0.0,
                yy: 1.0,
                x: -2.0 * cu - w,
                y: -2.0 * cv,
                c: cu * cu + cv * cv - w * ox,
            }
        }
        // (v - cv)² - (u - cu)² = 4 P cx (u + ox) with P = value² / (1 + value²)
        Realization::Sl4 => {
            let w = 4.0 * value * value / (1.0 + value * value) * centre_x;
            ConicCoeffs {
                xx: -1.0,
                xy: 0.0,
                yy: 1.0,
                x: 2.0 * cu - w,
                y: -2.0 * cv,
                c: cv * cv - cu * cu - w * ox,
            }
        }
    }
}

impl StepProblem {
    /// `[I(p0, q) - outer, I(p1, q) - K]`.
    pub fn residuals(&self, q: &Point2) -> Result<[f64; 2], NumericError> {
        Ok([
            two_point(self.realization, &self.p0, q)? - self.outer,
            two_point(self.realization, &self.p1, q)? - self.k,
        ])
    }

    pub fn residual_norm(&self, q: &Point2) -> f64 {
        match self.residuals(q) {
            Ok([a, b]) if a.is_finite() && b.is_finite() => a.abs().max(b.abs()),
            _ => f64::INFINITY,
        }
    }

    /// Mesh locus around `p1` and the line through both loci's
    /// intersections, in coordinates centred at `p1`.
    pub fn local_line_and_conic(&self) -> Result<(LineCoeffs, ConicCoeffs), NumericError> {
        let r = self.realization;
        let (x1, y1) = (self.p1.x, self.p1.y);
        let u0 = (self.p0.x - x1, self.p0.y - y1);
        let mesh = local_locus(r, (0.0, 0.0), x1, self.k, x1);
        let outer = local_locus(r, u0, self.p0.x, self.outer, x1);
        let line = mesh.difference_line(&outer)?;
        if !(line.a.is_finite() && line.b.is_finite() && line.d.is_finite()) {
            return Err(NumericError::domain(Location::Point(self.p1), "non-finite reduction"));
        }
        Ok((line, mesh))
    }

    /// The reduction in absolute coordinates.
    pub fn line_and_conic(&self) -> Result<(LineCoeffs, ConicCoeffs), NumericError> {
        let (line, conic) = self.local_line_and_conic()?;
        Ok((line.shifted(&self.p1), conic.shifted(&self.p1)))
    }

    /// Intersection roots, solved in the local frame.
    pub fn roots(&self) -> Result<Vec<Point2>, NumericError> {
        let (line, conic) = self.local_line_and_conic()?;
        let roots = line_conic_roots(&line, &conic, &Point2::new(0.0, 0.0))?;
        Ok(roots
            .into_iter()
            .map(|q| Point2::new(self.p1.x + q.x, self.p1.y + q.y))
            .collect())
    }

    fn forward(&self) -> (f64, f64) {
        self.p1.sub(&self.p0)
    }

    /// Whether `q` turns the way the target demands.
    pub fn turns_correctly(&self, q: &Point2) -> bool {
        if self.target.abs() <= AMBIGUOUS_TARGET {
            return true;
        }
        turning(self.realization, &self.p0, &self.p1, q) * self.target > 0.0
    }

    /// Chooses among the intersection roots.
    pub fn select_root(&self, roots: &[Point2]) -> Option<Point2> {
        let valid: Vec<Point2> = roots
            .iter()
            .copied()
            .filter(|q| q.is_finite() && q.x > 0.0)
            .collect();
        let matched: Vec<Point2> = valid
            .iter()
            .copied()
            .filter(|q| turning(self.realization, &self.p0, &self.p1, q) * self.target > 0.0)
            .collect();
        if matched.len() == 1 && self.target.abs() > AMBIGUOUS_TARGET {
            return Some(matched[0]);
        }
        if self.target.abs() <= AMBIGUOUS_TARGET || matched.len() == 2 {
            return conic::pick_forward(&valid, &self.p1, self.forward());
        }
        None
    }
}

/// Reduced explicit form of the current step.
pub fn reduce_to_line_conic(state: &SchemeState) -> Result<(LineCoeffs, ConicCoeffs), NumericError> {
    step_problem(state)?.line_and_conic()
}

/// Solves one step by the explicit path, falling back to Newton.
pub fn solve_step(problem: &StepProblem) -> Result<(Point2, u32), NumericError> {
    let explicit = problem.roots();
    let missed = matches!(&explicit, Err(e) if e.kind == ErrorKind::NoIntersection);
    if let Some(q) = explicit.ok().and_then(|roots| problem.select_root(&roots)) {
        if problem.residual_norm(&q) <= STEP_TOL {
            return Ok((q, 0));
        }
        if let Ok(polished) = newton_on_problem(problem, q) {
            if problem.turns_correctly(&polished.0) {
                return Ok(polished);
            }
        }
    }
    newton_multistart(problem).map_err(|e| {
        if missed {
            NumericError::new(ErrorKind::NoIntersection, e.location, e.detail)
        } else {
            e
        }
    })
}

fn diagnostics_for(
    state: &SchemeState,
    problem: &StepProblem,
    q: &Point2,
    iterations: u32,
) -> Result<StepDiagnostics, NumericError> {
    let r = state.realization();
    let j1 = signed_j1(r, &problem.p0, &problem.p1, q)?;
    let j2 = match state.spec.order {
        Order::Second => None,
        Order::Third => {
            let w = &state.window;
            Some(signed_j2(r, &[w[0], w[1], w[2], *q])?)
        }
    };
    Ok(StepDiagnostics {
        j1,
        j2,
        mesh_residual: (two_point(r, &problem.p1, q)? - problem.k).abs(),
        step_residual: problem.residual_norm(q),
        solver_iterations: iterations,
    })
}

fn step_with_order(state: &SchemeState, order: Order) -> Result<(Point2, StepDiagnostics), NumericError> {
    if state.spec.order != order {
        return Err(NumericError::domain(
            Location::None,
            format!("state holds an order-{} scheme", state.spec.order.as_u8()),
        ));
    }
    let problem = step_problem(state)?;
    let (q, iterations) = solve_step(&problem)?;
    let diag = diagnostics_for(state, &problem, &q, iterations)?;
    Ok((q, diag))
}

/// Next point of a second-order scheme: `J1 = C` and `I(p1, q) = K`.
pub fn step_order2(state: &SchemeState) -> Result<(Point2, StepDiagnostics), NumericError> {
    step_with_order(state, Order::Second)
}

/// Next point of a third-order scheme: `J2 = F(J1)` and `I(p2, q) = K`.
pub fn step_order3(state: &SchemeState) -> Result<(Point2, StepDiagnostics), NumericError> {
    step_with_order(state, Order::Third)
}

pub fn step(state: &SchemeState) -> Result<(Point2, StepDiagnostics), NumericError> {
    step_with_order(state, state.spec.order)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StopRule {
    pub max_steps: usize,
    pub x_min: f64,
    pub x_max: f64,
}

impl StopRule {
    pub fn max_steps(max_steps: usize) -> Self {
        Self {
            max_steps,
            x_min: f64::MIN_POSITIVE,
            x_max: f64::INFINITY,
        }
    }
}

/// Steps until the stop rule fires; returns the trajectory and per-step wall times.
pub fn run_scheme_timed(mut state: SchemeState, stop: &StopRule) -> (Trajectory, Vec<f64>) {
    let mut points = state.window.clone();
    let mut diagnostics = Vec::new();
    let mut seconds = Vec::new();
    let mut halt = HaltReason::MaxSteps;
    for _ in 0..stop.max_steps {
        let start = Instant::now();
        let outcome = step(&state);
        seconds.push(start.elapsed().as_secs_f64());
        match outcome {
            Ok((q, diag)) => {
                if q.x < stop.x_min || q.x > stop.x_max {
                    halt = HaltReason::LeftWindow { x: q.x };
                    break;
                }
                points.push(q);
                diagnostics.push(diag);
                state.push(q, diag.j1);
            }
            Err(e) => {
                halt = HaltReason::Error(e);
                break;
            }
        }
    }
    (
        Trajectory {
            points,
            diagnostics,
            halt,
        },
        seconds,
    )
}

pub fn run_scheme(state: SchemeState, stop: &StopRule) -> Trajectory {
    run_scheme_timed(state, stop).0
}
