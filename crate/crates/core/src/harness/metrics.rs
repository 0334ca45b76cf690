//! Trajectory metrics used in run reports.

use serde::Serialize;

use crate::exact::{conic_distance, ExactConic};
use crate::invariants::{signed_j1, signed_j2, two_point};
use crate::types::{ErrorKind, Forcing, HaltReason, Point2, Realization, Trajectory};

/// Secant slope above which [`detect_singularity`] reports a blow-up.
pub const BLOWUP_SLOPE: f64 = 1e4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum SingularityKind {
    BlowUp,
    TangentCrossing,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Singularity {
    pub x: f64,
    pub kind: SingularityKind,
}

fn events(points: &[Point2]) -> Vec<Singularity> {
    let mut out = Vec::new();
    let mut prev_dx: Option<f64> = None;
    for (i, w) in points.windows(2).enumerate() {
        let (dx, dy) = w[1].sub(&w[0]);
        if let Some(pdx) = prev_dx {
            if pdx * dx < 0.0 {
                out.push(Singularity {
                    x: points[i].x,
                    kind: SingularityKind::TangentCrossing,
                });
            }
        }
        let steep = if dx == 0.0 {
            dy != 0.0
        } else {
            (dy / dx).abs() > BLOWUP_SLOPE
        };
        if steep {
            out.push(Singularity {
                x: w[1].x,
                kind: SingularityKind::BlowUp,
            });
        }
        if dx != 0.0 {
            prev_dx = Some(dx);
        }
    }
    out
}

/// First point where the secant slope exceeds [`BLOWUP_SLOPE`] or the x
/// direction reverses.
///
/// Integrators stop on their own blow-up guards before the secant gets that
/// steep, so a run that halted with `SingularityDetected` or `StepUnderflow`
/// is reported as a blow-up at its halt point when nothing earlier fired.
pub fn detect_singularity(traj: &Trajectory) -> Option<Singularity> {
    if traj.points.len() < 3 {
        return None;
    }
    events(&traj.points).into_iter().next().or_else(|| match &traj.halt {
        HaltReason::Error(e)
            if matches!(e.kind, ErrorKind::SingularityDetected | ErrorKind::StepUnderflow) =>
        {
            Some(Singularity {
                x: e.x().or(traj.last_x())?,
                kind: SingularityKind::BlowUp,
            })
        }
        _ => None,
    })
}

/// Every tangent crossing along the trajectory, in order.
pub fn tangent_crossings(points: &[Point2]) -> Vec<f64> {
    events(points)
        .into_iter()
        .filter(|s| s.kind == SingularityKind::TangentCrossing)
        .map(|s| s.x)
        .collect()
}

/// Total signed angle swept around `centre`.
pub fn winding_angle(points: &[Point2], centre: &Point2) -> f64 {
    let angle = |p: &Point2| (p.y - centre.y).atan2(p.x - centre.x);
    points
        .windows(2)
        .map(|w| {
            let mut d = angle(&w[1]) - angle(&w[0]);
            if d > std::f64::consts::PI {
                d -= std::f64::consts::TAU;
            } else if d < -std::f64::consts::PI {
                d += std::f64::consts::TAU;
            }
            d
        })
        .sum()
}

pub fn max_conic_distance(conic: &ExactConic, points: &[Point2]) -> f64 {
    points
        .iter()
        .map(|p| conic_distance(conic, p))
        .fold(0.0, f64::max)
}

/// Largest deviation of consecutive two-point invariants from the first one.
///
/// Non-finite when some pair is outside the invariant's domain.
pub fn mesh_drift(realization: Realization, points: &[Point2]) -> f64 {
    let values: Vec<f64> = points
        .windows(2)
        .map(|w| two_point(realization, &w[0], &w[1]).unwrap_or(f64::NAN))
        .collect();
    let Some(&k) = values.first() else {
        return 0.0;
    };
    values.iter().map(|v| (v - k).abs()).fold(0.0, |m, d| if d.is_nan() { f64::NAN } else { m.max(d) })
}

/// `max |J1 - C|` over all 3-point windows.
pub fn order2_drift(realization: Realization, points: &[Point2], c: f64) -> f64 {
    points
        .windows(3)
        .map(|w| match signed_j1(realization, &w[0], &w[1], &w[2]) {
            Ok(j) => (j - c).abs(),
            Err(_) => f64::NAN,
        })
        .fold(0.0, |m, d| if d.is_nan() { f64::NAN } else { m.max(d) })
}

/// `max |J2 - F(J1)|` over all 4-point windows, with `J1` taken on the
/// first three points of each window.
pub fn order3_drift(realization: Realization, points: &[Point2], forcing: &Forcing) -> f64 {
    points
        .windows(4)
        .map(|w| {
            let win = [w[0], w[1], w[2], w[3]];
            match (
                signed_j2(realization, &win),
                signed_j1(realization, &w[0], &w[1], &w[2]),
            ) {
                (Ok(j2), Ok(j1)) => (j2 - forcing.eval(j1)).abs(),
                _ => f64::NAN,
            }
        })
        .fold(0.0, |m, d| if d.is_nan() { f64::NAN } else { m.max(d) })
}

pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::HaltReason;

    fn traj(points: Vec<Point2>) -> Trajectory {
        Trajectory {
            points,
            diagnostics: Vec::new(),
            halt: HaltReason::MaxSteps,
        }
    }

    #[test]
    fn straight_line_has_no_singularity() {
        let pts = (0..50).map(|i| Point2::new(1.0 + 0.1 * i as f64, 2.0 - 0.3 * i as f64)).collect();
        assert_eq!(detect_singularity(&traj(pts)), None);
    }

    #[test]
    fn circle_crosses_tangents_at_both_ends() {
        let pts: Vec<Point2> = (0..=700)
            .map(|i| {
                let t = std::f64::consts::PI - 0.01 * i as f64;
                Point2::new(2.0 + t.cos(), 8.0 + t.sin())
            })
            .collect();
        let xs = tangent_crossings(&pts);
        assert_eq!(xs.len(), 2);
        assert!((xs[0] - 3.0).abs() < 1e-3 && (xs[1] - 1.0).abs() < 1e-3, "{xs:?}");
        let w = winding_angle(&pts, &Point2::new(2.0, 8.0));
        assert!((w + 7.0).abs() < 1e-12);
        let first = detect_singularity(&traj(pts)).unwrap();
        assert_eq!(first.kind, SingularityKind::TangentCrossing);
    }

    #[test]
    fn steep_secant_is_a_blow_up() {
        let pts = vec![Point2::new(1.0, 0.0), Point2::new(1.1, 1.0), Point2::new(1.1 + 1e-6, 2.0)];
        let s = detect_singularity(&traj(pts)).unwrap();
        assert_eq!(s.kind, SingularityKind::BlowUp);
        assert!((s.x - 1.1).abs() < 1e-5);
    }

    #[test]
    fn median_of_even_and_odd() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), Some(2.5));
        assert_eq!(median(&[]), None);
    }
}
