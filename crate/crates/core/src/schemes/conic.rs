//! Line and conic algebra for the explicit scheme step.

use crate::types::{ErrorKind, Location, NumericError, Point2};

/// Relative discriminant below which a line misses the conic.
pub const TANGENCY_TOL: f64 = 1e-12;

/// `a x + b y = d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineCoeffs {
    pub a: f64,
    pub b: f64,
    pub d: f64,
}

/// `xx x² + xy x y + yy y² + x x + y y + c = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConicCoeffs {
    pub xx: f64,
    pub xy: f64,
    pub yy: f64,
    pub x: f64,
    pub y: f64,
    pub c: f64,
}

impl LineCoeffs {
    pub fn eval(&self, p: &Point2) -> f64 {
        self.a * p.x + self.b * p.y - self.d
    }

    /// The same line with coordinates measured from `-origin` instead, i.e.
    /// in `x = u + origin.x`, `y = v + origin.y` when `self` is in `(u, v)`.
    pub fn shifted(&self, origin: &Point2) -> Self {
        Self {
            a: self.a,
            b: self.b,
            d: self.d + self.a * origin.x + self.b * origin.y,
        }
    }
}

impl ConicCoeffs {
    /// Re-expresses a conic given in `(u, v) = (x - ox, y - oy)` in `(x, y)`.
    pub fn shifted(&self, origin: &Point2) -> Self {
        let (ox, oy) = (origin.x, origin.y);
        Self {
            xx: self.xx,
            xy: self.xy,
            yy: self.yy,
            x: self.x - 2.0 * self.xx * ox - self.xy * oy,
            y: self.y - 2.0 * self.yy * oy - self.xy * ox,
            c: self.c + self.xx * ox * ox + self.xy * ox * oy + self.yy * oy * oy
                - self.x * ox
                - self.y * oy,
        }
    }

    pub fn eval(&self, p: &Point2) -> f64 {
        let (x, y) = (p.x, p.y);
        self.xx * x * x + self.xy * x * y + self.yy * y * y + self.x * x + self.y * y + self.c
    }

    /// `self - other`, which is linear when the quadratic parts agree.
    pub fn difference_line(&self, other: &ConicCoeffs) -> Result<LineCoeffs, NumericError> {
        let scale = self.xx.abs() + self.yy.abs() + self.xy.abs();
        let same_quadratic = (self.xx - other.xx).abs() <= 1e-15 * scale
            && (self.xy - other.xy).abs() <= 1e-15 * scale
            && (self.yy - other.yy).abs() <= 1e-15 * scale;
        if !same_quadratic {
            return Err(NumericError::domain(
                Location::None,
                "conics with different quadratic parts do not reduce to a line",
            ));
        }
        Ok(LineCoeffs {
            a: self.x - other.x,
            b: self.y - other.y,
            d: other.c - self.c,
        })
    }
}

/// Real intersection points of a line and a conic (zero, one or two).
///
/// The line is parametrized from the projection of `anchor` onto it, so the
/// quadratic's coefficients stay well scaled near the points of interest.
pub fn line_conic_roots(
    line: &LineCoeffs,
    conic: &ConicCoeffs,
    anchor: &Point2,
) -> Result<Vec<Point2>, NumericError> {
    let n2 = line.a * line.a + line.b * line.b;
    if !(n2 > 0.0) || !n2.is_finite() {
        return Err(NumericError::domain(
            Location::Point(*anchor),
            "degenerate line (a = b = 0)",
        ));
    }
    let norm = n2.sqrt();
    let off = line.eval(anchor) / n2;
    let base = Point2::new(anchor.x - off * line.a, anchor.y - off * line.b);
    let (dx, dy) = (-line.b / norm, line.a / norm);

    let alpha = conic.xx * dx * dx + conic.xy * dx * dy + conic.yy * dy * dy;
    let beta = 2.0 * conic.xx * base.x * dx
        + conic.xy * (base.x * dy + base.y * dx)
        + 2.0 * conic.yy * base.y * dy
        + conic.x * dx
        + conic.y * dy;
    let gamma = conic.eval(&base);
    let at = |t: f64| Point2::new(base.x + t * dx, base.y + t * dy);

    let miss = |detail: String| NumericError::new(ErrorKind::NoIntersection, Location::Point(*anchor), detail);
    let quad_scale = conic.xx.abs() + conic.xy.abs() + conic.yy.abs();
    if alpha.abs() <= 1e-14 * quad_scale {
        if beta == 0.0 {
            return Err(miss("line parallel to an asymptote".into()));
        }
        return Ok(vec![at(-gamma / beta)]);
    }
    let disc = beta * beta - 4.0 * alpha * gamma;
    let scale = beta * beta + (4.0 * alpha * gamma).abs();
    let rel = if scale > 0.0 { disc / scale } else { 0.0 };
    if rel < -TANGENCY_TOL {
        return Err(miss(format!("negative discriminant (relative {rel:e})")));
    }
    if disc <= 0.0 {
        return Ok(vec![at(-beta / (2.0 * alpha))]);
    }
    let q = -0.5 * (beta + beta.signum() * disc.sqrt());
    let q = if q == 0.0 { -0.5 * disc.sqrt() } else { q };
    Ok(vec![at(q / alpha), at(gamma / q)])
}

/// Picks the root whose displacement from `prev` has a positive component
/// along `prev_dir`; among two such roots, the one farther from `prev`.
pub fn solve_line_conic(
    line: &LineCoeffs,
    conic: &ConicCoeffs,
    prev: &Point2,
    prev_dir: (f64, f64),
) -> Result<Point2, NumericError> {
    let roots = line_conic_roots(line, conic, prev)?;
    if roots.len() == 1 {
        return Ok(roots[0]);
    }
    pick_forward(&roots, prev, prev_dir).ok_or_else(|| {
        NumericError::new(
            ErrorKind::NoIntersection,
            Location::Point(*prev),
            "no intersection ahead of the current point",
        )
    })
}

pub(crate) fn pick_forward(roots: &[Point2], prev: &Point2, dir: (f64, f64)) -> Option<Point2> {
    roots
        .iter()
        .filter(|r| {
            let (ux, uy) = r.sub(prev);
            ux * dir.0 + uy * dir.1 > 0.0
        })
        .max_by(|a, b| a.dist(prev).total_cmp(&b.dist(prev)))
        .copied()
}
