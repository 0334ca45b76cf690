//! Exact solutions of the second-order equations `I1 = C`.
//!
//! For `a != 0` the sl3 solutions are circles of radius `1/a` centred at
//! `(±C/a, y0)` and the sl4 solutions are the hyperbolas
//! `(x - cx)² - (y - cy)² = 1/a²` with `cx = ±C/a`.
//!
//! Orientation convention: the travel-oriented `I1` (the value that equals
//! `I1` for a graph traversed towards increasing x) is
//!
//! * `cx / r` on a circle traversed clockwise, `-cx / r` counter-clockwise;
//! * `-s cx / r` on the hyperbola branch `x = cx + s r cosh t`,
//!   `y = cy + r sinh t` traversed with increasing `t` (`s = ±1`), and the
//!   opposite sign for decreasing `t`.

use crate::invariants::JetPoint;
use crate::types::{Location, NumericError, Point2, Realization};

/// Tolerance for deciding that the initial point lies on a candidate conic.
const FIT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircleSolution {
    pub cx: f64,
    pub cy: f64,
    pub r: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HyperbolaSolution {
    pub cx: f64,
    pub cy: f64,
    pub r: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExactConic {
    Circle(CircleSolution),
    Hyperbola(HyperbolaSolution),
}

impl CircleSolution {
    pub fn point(&self, theta: f64) -> Point2 {
        Point2::new(
            self.cx + self.r * theta.cos(),
            self.cy + self.r * theta.sin(),
        )
    }

    pub fn angle_of(&self, p: &Point2) -> f64 {
        (p.y - self.cy).atan2(p.x - self.cx)
    }

    /// `(y', y'')` at a point of the circle by implicit differentiation.
    pub fn jet_at(&self, p: &Point2) -> Result<JetPoint, NumericError> {
        let v = p.y - self.cy;
        if v == 0.0 {
            return Err(NumericError::domain(Location::Point(*p), "vertical tangent"));
        }
        let yp = -(p.x - self.cx) / v;
        let ypp = -self.r * self.r / (v * v * v);
        Ok(JetPoint::second(p.x, yp, ypp))
    }
}

impl HyperbolaSolution {
    /// Branch sign `s` of the point: `x - cx = s r cosh t`.
    pub fn branch_of(&self, p: &Point2) -> f64 {
        if p.x >= self.cx {
            1.0
        } else {
            -1.0
        }
    }

    pub fn point(&self, branch: f64, t: f64) -> Point2 {
        Point2::new(
            self.cx + branch * self.r * t.cosh(),
            self.cy + self.r * t.sinh(),
        )
    }

    pub fn param_of(&self, p: &Point2) -> f64 {
        ((p.y - self.cy) / self.r).asinh()
    }

    pub fn jet_at(&self, p: &Point2) -> Result<JetPoint, NumericError> {
        let v = p.y - self.cy;
        if v == 0.0 {
            return Err(NumericError::domain(Location::Point(*p), "vertical tangent"));
        }
        let yp = (p.x - self.cx) / v;
        let ypp = -self.r * self.r / (v * v * v);
        Ok(JetPoint::second(p.x, yp, ypp))
    }
}

impl ExactConic {
    pub fn realization(&self) -> Realization {
        match self {
            ExactConic::Circle(_) => Realization::Sl3,
            ExactConic::Hyperbola(_) => Realization::Sl4,
        }
    }

    pub fn jet_at(&self, p: &Point2) -> Result<JetPoint, NumericError> {
        match self {
            ExactConic::Circle(c) => c.jet_at(p),
            ExactConic::Hyperbola(h) => h.jet_at(p),
        }
    }
}

fn check_a(a: f64) -> Result<f64, NumericError> {
    if a == 0.0 || !a.is_finite() {
        return Err(NumericError::domain(
            Location::None,
            format!("conic solutions need a != 0, got {a}"),
        ));
    }
    Ok(1.0 / a.abs())
}

/// Pushes `cy = y0 ± sqrt(rad)` when `rad >= 0`, once for a double root.
fn push_centres(out: &mut Vec<(f64, f64)>, cx: f64, y0: f64, rad: f64) {
    if rad < -FIT_TOL {
        return;
    }
    let d = rad.max(0.0).sqrt();
    out.push((cx, y0 + d));
    if d > 0.0 {
        out.push((cx, y0 - d));
    }
}

/// All circles of the family through `(x0, y0)`; centres with `cx = +C/a` come first.
pub fn fit_circle(x0: f64, y0: f64, c: f64, a: f64) -> Result<Vec<CircleSolution>, NumericError> {
    let r = check_a(a)?;
    let mut centres = Vec::new();
    for cx in [c * r, -c * r] {
        push_centres(&mut centres, cx, y0, r * r - (x0 - cx).powi(2));
        if c == 0.0 {
            break;
        }
    }
    if centres.is_empty() {
        return Err(NumericError::domain(
            Location::Point(Point2::new(x0, y0)),
            format!("no circle with C = {c}, a = {a} passes through the point"),
        ));
    }
    Ok(centres
        .into_iter()
        .map(|(cx, cy)| CircleSolution { cx, cy, r })
        .collect())
}

/// All hyperbolas of the family through `(x0, y0)`; `cx = +C/a` first.
pub fn fit_hyperbola(
    x0: f64,
    y0: f64,
    c: f64,
    a: f64,
) -> Result<Vec<HyperbolaSolution>, NumericError> {
    let r = check_a(a)?;
    let mut centres = Vec::new();
    for cx in [c * r, -c * r] {
        push_centres(&mut centres, cx, y0, (x0 - cx).powi(2) - r * r);
        if c == 0.0 {
            break;
        }
    }
    if centres.is_empty() {
        return Err(NumericError::domain(
            Location::Point(Point2::new(x0, y0)),
            format!("no hyperbola with C = {c}, a = {a} passes through the point"),
        ));
    }
    Ok(centres
        .into_iter()
        .map(|(cx, cy)| HyperbolaSolution { cx, cy, r })
        .collect())
}

/// First-order geometric distance from `p` to the conic.
pub fn conic_distance(conic: &ExactConic, p: &Point2) -> f64 {
    match conic {
        ExactConic::Circle(c) => ((p.x - c.cx).hypot(p.y - c.cy) - c.r).abs(),
        ExactConic::Hyperbola(h) => {
            let (u, v) = (p.x - h.cx, p.y - h.cy);
            let f = u * u - v * v - h.r * h.r;
            if f == 0.0 {
                return 0.0;
            }
            let grad = 2.0 * u.hypot(v);
            if grad == 0.0 {
                f.abs().sqrt()
            } else {
                f.abs() / grad
            }
        }
    }
}

/// Slopes of the conic at abscissa `x0`, one per branch point.
pub fn initial_slope_from_solution(conic: &ExactConic, x0: f64) -> Result<Vec<f64>, NumericError> {
    let (cx, r, sign) = match conic {
        ExactConic::Circle(c) => (c.cx, c.r, -1.0),
        ExactConic::Hyperbola(h) => (h.cx, h.r, 1.0),
    };
    let u = x0 - cx;
    let rad = match conic {
        ExactConic::Circle(_) => r * r - u * u,
        ExactConic::Hyperbola(_) => u * u - r * r,
    };
    if rad < 0.0 {
        return Err(NumericError::domain(
            Location::X(x0),
            "abscissa outside the conic's x-range",
        ));
    }
    let v = rad.sqrt();
    if v <= FIT_TOL * (1.0 + r) {
        return Err(NumericError::domain(Location::X(x0), "vertical tangent"));
    }
    Ok(vec![sign * u / v, -sign * u / v])
}

/// A conic traversed in the direction in which the travel-oriented `I1`
/// equals the prescribed constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConicPath {
    pub conic: ExactConic,
    /// Hyperbola branch sign; `1.0` for circles.
    pub branch: f64,
    /// `+1` when the curve parameter (angle or `t`) increases along travel.
    pub direction: f64,
    /// Parameter value at the start point.
    pub start: f64,
}

impl ConicPath {
    /// Point after advancing the parameter by `tau` along travel.
    pub fn point_at(&self, tau: f64) -> Point2 {
        let s = self.start + self.direction * tau;
        match &self.conic {
            ExactConic::Circle(c) => c.point(s),
            ExactConic::Hyperbola(h) => h.point(self.branch, s),
        }
    }

    /// Parameter increment covering Euclidean arc length `h` from `tau`, to first order.
    pub fn arc_increment(&self, tau: f64, h: f64) -> f64 {
        match &self.conic {
            ExactConic::Circle(c) => h / c.r,
            ExactConic::Hyperbola(hy) => {
                let s = self.start + self.direction * tau;
                h / (hy.r * (2.0 * s).cosh().sqrt())
            }
        }
    }

    /// Travel-oriented `I1` along the path.
    pub fn travel_i1(&self) -> f64 {
        match &self.conic {
            // Clockwise means decreasing angle.
            ExactConic::Circle(c) => -self.direction * c.cx / c.r,
            ExactConic::Hyperbola(h) => -self.direction * self.branch * h.cx / h.r,
        }
    }

    fn oriented(conic: ExactConic, start_point: &Point2, c: f64) -> Self {
        let (branch, start) = match &conic {
            ExactConic::Circle(ci) => (1.0, ci.angle_of(start_point)),
            ExactConic::Hyperbola(h) => (h.branch_of(start_point), h.param_of(start_point)),
        };
        let mut path = Self {
            conic,
            branch,
            direction: 1.0,
            start,
        };
        if path.travel_i1() * c < 0.0 || (c == 0.0 && path.initial_dx() < 0.0) {
            path.direction = -1.0;
        }
        path
    }

    fn initial_dx(&self) -> f64 {
        let eps = 1e-6;
        self.point_at(eps).x - self.point_at(0.0).x
    }
}

/// The exact solution of `I1 = C` through `(x0, y0)` for the given `a`.
///
/// Candidates with centre `cx = +C/a` are preferred, then those whose
/// traversal starts towards increasing x.
pub fn solution_path(
    realization: Realization,
    x0: f64,
    y0: f64,
    c: f64,
    a: f64,
) -> Result<ConicPath, NumericError> {
    let start = Point2::new(x0, y0);
    let conics: Vec<ExactConic> = match realization {
        Realization::Sl3 => fit_circle(x0, y0, c, a)?
            .into_iter()
            .map(ExactConic::Circle)
            .collect(),
        Realization::Sl4 => fit_hyperbola(x0, y0, c, a)?
            .into_iter()
            .map(ExactConic::Hyperbola)
            .collect(),
    };
    let paths: Vec<ConicPath> = conics
        .into_iter()
        .map(|k| ConicPath::oriented(k, &start, c))
        .collect();
    let preferred_cx = c / a.abs();
    let centre_x = |p: &ConicPath| match p.conic {
        ExactConic::Circle(ci) => ci.cx,
        ExactConic::Hyperbola(h) => h.cx,
    };
    let score = |p: &ConicPath| {
        let centre = if (centre_x(p) - preferred_cx).abs() <= 1e-12 * (1.0 + preferred_cx.abs()) {
            0
        } else {
            2
        };
        centre + usize::from(p.initial_dx() <= 0.0)
    };
    Ok(*paths
        .iter()
        .min_by_key(|p| score(p))
        .expect("fit returns at least one candidate"))
}
