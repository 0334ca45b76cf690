//! Starting windows from classical initial data.
//!
//! Extra points come from a reference RK4(5) solution at tolerance `1e-12`,
//! spaced so that each chord has Euclidean length about `h`. The first chord
//! defines `K`; for third order the second point is placed by bisection on
//! the reference solution so its chord carries the same `K` to rounding.

use super::SchemeState;
use crate::baselines::odes::InvariantOde;
use crate::baselines::rk45::rk45_integrate;
use crate::exact::ConicPath;
use crate::invariants::two_point;
use crate::types::{Location, NumericError, Order, Point2, SchemeSpec};

const REFERENCE_REL_TOL: f64 = 1e-12;
const REFERENCE_ABS_TOL: f64 = 1e-13;
/// Required agreement of the second chord's invariant with `K`.
pub const SECOND_CHORD_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialData {
    pub x0: f64,
    pub y0: f64,
    pub yp0: f64,
    pub ypp0: Option<f64>,
}

fn reference_y(ode: &InvariantOde, ics: &InitialData, x: f64) -> Result<f64, NumericError> {
    let state0: Vec<f64> = match ode.order() {
        Order::Second => vec![ics.y0, ics.yp0],
        Order::Third => vec![
            ics.y0,
            ics.yp0,
            ics.ypp0.ok_or_else(|| {
                NumericError::domain(Location::X(ics.x0), "third order needs y''(x0)")
            })?,
        ],
    };
    let sys = ode.system();
    let run = rk45_integrate(&sys, ics.x0, &state0, x, REFERENCE_REL_TOL, REFERENCE_ABS_TOL);
    match run.failure {
        None => Ok(run.last_state()[0]),
        Some(e) => Err(e),
    }
}

fn spec_for(ode: &InvariantOde, k: f64) -> Result<SchemeSpec, NumericError> {
    match ode {
        InvariantOde::Second { realization, c } => SchemeSpec::second_order(*realization, *c, k),
        InvariantOde::Third {
            realization,
            forcing,
        } => SchemeSpec::third_order(*realization, forcing.clone(), k),
    }
}

/// Window of `order` points marching towards increasing x.
pub fn bootstrap(ode: &InvariantOde, ics: &InitialData, h: f64) -> Result<SchemeState, NumericError> {
    let r = ode.realization();
    let p0 = Point2::new(ics.x0, ics.y0);
    if !crate::types::validate_point(&p0, r) {
        return Err(NumericError::domain(Location::Point(p0), "initial point outside x > 0"));
    }
    if !(h > 0.0 && h.is_finite()) {
        return Err(NumericError::domain(Location::Point(p0), format!("step must be positive, got {h}")));
    }
    let dx = h / (1.0 + ics.yp0 * ics.yp0).sqrt();
    let at = |x: f64| reference_y(ode, ics, x).map(|y| Point2::new(x, y));
    let p1 = at(ics.x0 + dx)?;
    let k = two_point(r, &p0, &p1)?;
    let mut window = vec![p0, p1];

    if ode.order() == Order::Third {
        let gap = |x: f64| -> Result<f64, NumericError> { Ok(two_point(r, &p1, &at(x)?)? - k) };
        let mut lo = p1.x;
        let mut hi = p1.x + 2.0 * dx;
        let mut expansions = 0;
        while gap(hi)? < 0.0 {
            hi = p1.x + 1.5 * (hi - p1.x);
            expansions += 1;
            if expansions > 10 {
                return Err(NumericError::domain(
                    Location::Point(p1),
                    "could not bracket the second bootstrap point",
                ));
            }
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if gap(mid)? < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let (glo, ghi) = (gap(lo)?, gap(hi)?);
        let x2 = if glo.abs() <= ghi.abs() { lo } else { hi };
        let p2 = at(x2)?;
        let miss = (two_point(r, &p1, &p2)? - k).abs();
        if miss > SECOND_CHORD_TOL {
            return Err(NumericError::domain(
                Location::Point(p2),
                format!("second chord misses K by {miss:e}"),
            ));
        }
        window.push(p2);
    }
    SchemeState::new(window, spec_for(ode, k)?)
}

/// Second-order window taken directly from an exact conic path.
pub fn bootstrap_from_conic(path: &ConicPath, c: f64, h: f64) -> Result<SchemeState, NumericError> {
    let r = path.conic.realization();
    let p0 = path.point_at(0.0);
    let p1 = path.point_at(path.arc_increment(0.0, h));
    let k = two_point(r, &p0, &p1)?;
    SchemeState::new(vec![p0, p1], SchemeSpec::second_order(r, c, k)?)
}
