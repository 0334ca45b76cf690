//! Helpers shared by the integration tests.
#![allow(dead_code)]

use invscheme::baselines::InvariantOde;
use invscheme::schemes::{bootstrap, run_scheme, InitialData, SchemeState, StopRule};
use invscheme::{Forcing, Order, Point2, Realization};
use rand::Rng;

pub fn ode(r: Realization, order: Order, c: f64) -> InvariantOde {
    match order {
        Order::Second => InvariantOde::Second { realization: r, c },
        Order::Third => InvariantOde::Third {
            realization: r,
            forcing: Forcing::square(),
        },
    }
}

/// A bootstrapped window from random initial data, advanced a random number
/// of steps. `None` when the draw is outside the ODE's domain.
pub fn random_window<R: Rng>(rng: &mut R, r: Realization, order: Order) -> Option<SchemeState> {
    random_window_with(rng, r, order, 0.03..0.1)
}

/// As [`random_window`], with the arc step drawn from `hs`.
pub fn random_window_with<R: Rng>(
    rng: &mut R,
    r: Realization,
    order: Order,
    hs: std::ops::Range<f64>,
) -> Option<SchemeState> {
    let c = rng.gen_range(-2.0..2.0);
    let ics = InitialData {
        x0: rng.gen_range(1.0..2.0),
        y0: rng.gen_range(-1.0..1.0),
        // sl4 invariants need |y'| > 1.
        yp0: match r {
            Realization::Sl3 => rng.gen_range(-0.8..0.8),
            Realization::Sl4 => rng.gen_range(1.2..2.5) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 },
        },
        ypp0: Some(rng.gen_range(-1.0..1.0)),
    };
    let h = rng.gen_range(hs);
    let state = bootstrap(&ode(r, order, c), &ics, h).ok()?;
    let spec = state.spec.clone();
    let steps = rng.gen_range(0..8);
    let traj = run_scheme(state, &StopRule::max_steps(steps));
    if traj.halt.is_error() {
        return None;
    }
    let w = order.as_u8() as usize;
    let window = traj.points[traj.points.len() - w..].to_vec();
    SchemeState::new(window, spec).ok()
}

pub fn relative_gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

pub fn max_dist(a: &[Point2], b: &[Point2]) -> f64 {
    a.iter().zip(b).map(|(p, q)| p.dist(q)).fold(0.0, f64::max)
}
