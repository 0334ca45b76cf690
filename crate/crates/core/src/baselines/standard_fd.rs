//! Standard finite differences on a uniform x-mesh with a scalar Newton solve.
//!
//! Second-order equations use three-point central stencils at `x_n`;
//! third-order equations use the four-point stencils at `x_{n+1/2}`. Each step
//! solves for the newest ordinate only. Newton failure is reported, never
//! retried with a different guess or step.

use std::time::Instant;

use crate::baselines::odes::InvariantOde;
use crate::baselines::stencil::{
    central_d1_3pt, central_d2_3pt, stencil_d1_4pt, stencil_d2_4pt, stencil_d3_4pt,
};
use crate::invariants::JetPoint;
use crate::types::{ErrorKind, HaltReason, Location, NumericError, Order, Point2, Trajectory};

pub const NEWTON_TOL: f64 = 1e-12;
pub const NEWTON_MAX_ITER: u32 = 50;
const FD_REL_STEP: f64 = 1e-7;
const BLOWUP: f64 = 1e8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformMesh {
    pub x0: f64,
    pub h: f64,
}

impl UniformMesh {
    pub fn new(x0: f64, h: f64) -> Result<Self, NumericError> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(NumericError::domain(
                Location::X(x0),
                format!("mesh spacing must be positive, got {h}"),
            ));
        }
        Ok(Self { x0, h })
    }

    pub fn node(&self, i: usize) -> f64 {
        self.x0 + i as f64 * self.h
    }
}

/// Stencil-substituted residual with the newest ordinate as the unknown.
///
/// `window` holds the known ordinates starting at node `first`; its length is
/// the equation's order.
fn stencil_residual(
    ode: &InvariantOde,
    window: &[f64],
    mesh: &UniformMesh,
    first: usize,
    y_new: f64,
) -> Result<f64, NumericError> {
    let h = mesh.h;
    match ode.order() {
        Order::Second => {
            let y = [window[0], window[1], y_new];
            let x = mesh.node(first + 1);
            ode.residual(&JetPoint::second(
                x,
                central_d1_3pt(&y, h),
                central_d2_3pt(&y, h),
            ))
        }
        Order::Third => {
            let y = [window[0], window[1], window[2], y_new];
            let x = 0.5 * (mesh.node(first + 1) + mesh.node(first + 2));
            ode.residual(&JetPoint::third(
                x,
                stencil_d1_4pt(&y, h),
                stencil_d2_4pt(&y, h),
                stencil_d3_4pt(&y, h),
            ))
        }
    }
}

/// Solves one step; returns the new ordinate and the Newton iteration count.
pub fn standard_fd_step(
    ode: &InvariantOde,
    window: &[f64],
    mesh: &UniformMesh,
    first: usize,
    guess: f64,
) -> Result<(f64, u32), NumericError> {
    let width = ode.order().as_u8() as usize;
    if window.len() != width {
        return Err(NumericError::domain(
            Location::Index(first),
            format!("window needs {width} known values, got {}", window.len()),
        ));
    }
    let at = Location::X(mesh.node(first + width));
    let diverged = |detail: String| NumericError::new(ErrorKind::NewtonDivergence, at, detail);
    let residual = |y: f64| stencil_residual(ode, window, mesh, first, y);

    let mut y = guess;
    for iter in 0..NEWTON_MAX_ITER {
        let f = residual(y).map_err(|e| diverged(format!("residual undefined: {}", e.detail)))?;
        if !f.is_finite() {
            return Err(diverged(format!("non-finite residual at y = {y}")));
        }
        if f.abs() <= NEWTON_TOL {
            return Ok((y, iter));
        }
        let dy = FD_REL_STEP * y.abs().max(1.0);
        let fp = residual(y + dy)
            .map_err(|e| diverged(format!("residual undefined: {}", e.detail)))?;
        let slope = (fp - f) / dy;
        if slope == 0.0 || !slope.is_finite() {
            return Err(diverged(format!("singular derivative at y = {y}")));
        }
        let step = f / slope;
        y -= step;
        if !y.is_finite() {
            return Err(diverged("iterate became non-finite".into()));
        }
        if step.abs() <= NEWTON_TOL * (1.0 + y.abs()) {
            return Ok((y, iter + 1));
        }
    }
    Err(diverged(format!(
        "no convergence in {NEWTON_MAX_ITER} iterations"
    )))
}

#[derive(Debug, Clone)]
pub struct FdRun {
    pub trajectory: Trajectory,
    pub iterations: Vec<u32>,
    pub step_seconds: Vec<f64>,
}

/// Marches from the seed ordinates (on nodes `0..seeds.len()`) until a stop.
pub fn run_standard_fd(
    ode: &InvariantOde,
    mesh: &UniformMesh,
    seeds: &[f64],
    max_steps: usize,
    x_max: f64,
) -> FdRun {
    let width = ode.order().as_u8() as usize;
    assert_eq!(seeds.len(), width, "standard FD needs {width} seed values");
    let mut ys: Vec<f64> = seeds.to_vec();
    let mut iterations = Vec::new();
    let mut step_seconds = Vec::new();
    let mut halt = HaltReason::MaxSteps;
    for _ in 0..max_steps {
        let first = ys.len() - width;
        let next_x = mesh.node(ys.len());
        if next_x > x_max {
            halt = HaltReason::LeftWindow { x: next_x };
            break;
        }
        let guess = 2.0 * ys[ys.len() - 1] - ys[ys.len() - 2];
        let start = Instant::now();
        let solved = standard_fd_step(ode, &ys[first..], mesh, first, guess);
        step_seconds.push(start.elapsed().as_secs_f64());
        match solved {
            Ok((y, iters)) => {
                iterations.push(iters);
                ys.push(y);
                if y.abs() > BLOWUP {
                    halt = HaltReason::Error(NumericError::singularity(
                        next_x,
                        format!("|y| = {} exceeds {BLOWUP}", y.abs()),
                    ));
                    break;
                }
            }
            Err(e) => {
                halt = HaltReason::Error(e);
                break;
            }
        }
    }
    let points = ys
        .iter()
        .enumerate()
        .map(|(i, &y)| Point2::new(mesh.node(i), y))
        .collect();
    FdRun {
        trajectory: Trajectory {
            points,
            diagnostics: Vec::new(),
            halt,
        },
        iterations,
        step_seconds,
    }
}
