//! Differential and discrete invariants of the `sl3` and `sl4` realizations.
//!
//! The continuous invariants `I1`, `I2` are functions of the jet
//! `(x, y', y'', y''')`; `y` itself never enters. The discrete invariants are
//! two-point quantities; on three points `(p0, p1, p2)` they form the basis
//! `(I1^n, I1^{n+1}, I2^{n+1}) = (d(p0,p1), d(p1,p2), d(p0,p2))`.
//!
//! `J1`, `J2` are the combinations of discrete invariants that tend to `I1`
//! and `I2` as the spacing shrinks. All square roots are principal, so the
//! plain `J1` tends to `|I1|`. The `signed_*` variants restore the sign by an
//! invariant turning test and tend to `I1` taken along the direction of
//! travel (for a graph traversed towards increasing x that is `I1` itself).

use num_complex::Complex64;

use crate::types::{Location, NumericError, Point2, Realization};

/// Radicands in `[-RADICAND_SLACK, 0)` are treated as rounding noise around zero.
const RADICAND_SLACK: f64 = 1e-12;

/// A point of the third-order jet space. `y` does not appear in any invariant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JetPoint {
    pub x: f64,
    pub yp: f64,
    pub ypp: f64,
    pub yppp: Option<f64>,
}

impl JetPoint {
    pub fn second(x: f64, yp: f64, ypp: f64) -> Self {
        Self {
            x,
            yp,
            ypp,
            yppp: None,
        }
    }

    pub fn third(x: f64, yp: f64, ypp: f64, yppp: f64) -> Self {
        Self {
            x,
            yp,
            ypp,
            yppp: Some(yppp),
        }
    }

    fn third_derivative(&self) -> Result<f64, NumericError> {
        self.yppp.ok_or_else(|| {
            NumericError::domain(Location::X(self.x), "third derivative required for I2")
        })
    }
}

/// The three-point basis `(I1^n, I1^{n+1}, I2^{n+1})`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscreteInvariantTriple {
    pub i1n: f64,
    pub i1n1: f64,
    pub i2n1: f64,
}

impl DiscreteInvariantTriple {
    pub fn from_points(
        realization: Realization,
        p0: &Point2,
        p1: &Point2,
        p2: &Point2,
    ) -> Result<Self, NumericError> {
        Ok(Self {
            i1n: two_point(realization, p0, p1)?,
            i1n1: two_point(realization, p1, p2)?,
            i2n1: two_point(realization, p0, p2)?,
        })
    }
}

pub fn cont_i1_sl3(j: &JetPoint) -> f64 {
    let s = 1.0 + j.yp * j.yp;
    (j.yp * s - j.x * j.ypp) / (s * s.sqrt())
}

pub fn cont_i2_sl3(j: &JetPoint) -> Result<f64, NumericError> {
    let yppp = j.third_derivative()?;
    let s = 1.0 + j.yp * j.yp;
    let x2 = j.x * j.x;
    Ok((3.0 * x2 * j.yp * j.ypp * j.ypp - x2 * yppp * s) / (s * s * s))
}

/// Requires `|y'| > 1`; the denominator `(y'^2 - 1)^{3/2}` is evaluated as a real power.
pub fn cont_i1_sl4(j: &JetPoint) -> Result<f64, NumericError> {
    let s = j.yp * j.yp - 1.0;
    if !(s > 0.0) {
        return Err(NumericError::domain(
            Location::X(j.x),
            format!("sl4 I1 needs |y'| > 1, got y' = {}", j.yp),
        ));
    }
    Ok((j.x * j.ypp + j.yp * s) / (s * s.sqrt()))
}

pub fn cont_i2_sl4(j: &JetPoint) -> Result<f64, NumericError> {
    let yppp = j.third_derivative()?;
    let (p, q, x) = (j.yp, j.ypp, j.x);
    let (m, n) = (p - 1.0, p + 1.0);
    let den = m * m * n * n * n;
    if den == 0.0 {
        return Err(NumericError::domain(
            Location::X(x),
            format!("sl4 I2 needs |y'| != 1, got y' = {p}"),
        ));
    }
    let inner = m * n * n * (3.0 * p * p - 1.0) + 4.0 * x * p * n * q - 2.0 * x * x * q * q;
    Ok((2.0 * x * x * n * yppp + 3.0 * inner) / den)
}

pub fn cont_i1(realization: Realization, j: &JetPoint) -> Result<f64, NumericError> {
    match realization {
        Realization::Sl3 => Ok(cont_i1_sl3(j)),
        Realization::Sl4 => cont_i1_sl4(j),
    }
}

pub fn cont_i2(realization: Realization, j: &JetPoint) -> Result<f64, NumericError> {
    match realization {
        Realization::Sl3 => cont_i2_sl3(j),
        Realization::Sl4 => cont_i2_sl4(j),
    }
}

/// `sqrt(((Δx)² + (Δy)²) / (x_a x_b))`.
fn two_point_sl3(a: &Point2, b: &Point2) -> Result<f64, NumericError> {
    let xx = a.x * b.x;
    if !(xx > 0.0) {
        return Err(NumericError::domain(
            Location::Point(*a),
            format!("sl3 invariant needs x_a x_b > 0, got {xx}"),
        ));
    }
    let (dx, dy) = b.sub(a);
    Ok(((dx * dx + dy * dy) / xx).sqrt())
}

/// `sqrt(N / (4 x_a x_b - N))` with `N = (Δy)² - (Δx)²`.
fn two_point_sl4(a: &Point2, b: &Point2) -> Result<f64, NumericError> {
    let (dx, dy) = b.sub(a);
    let n = (dy - dx) * (dy + dx);
    let den = 4.0 * a.x * b.x - n;
    if n < 0.0 || !(den > 0.0) {
        return Err(NumericError::domain(
            Location::Point(*b),
            format!("sl4 invariant outside real domain (N = {n}, denominator = {den})"),
        ));
    }
    Ok((n / den).sqrt())
}

pub fn disc_i1_sl3(pa: &Point2, pb: &Point2) -> Result<f64, NumericError> {
    two_point_sl3(pa, pb)
}

/// Same formula as [`disc_i1_sl3`], applied to the outer pair of a window.
pub fn disc_i2_sl3(pa: &Point2, pc: &Point2) -> Result<f64, NumericError> {
    two_point_sl3(pa, pc)
}

pub fn disc_i1_sl4(pa: &Point2, pb: &Point2) -> Result<f64, NumericError> {
    two_point_sl4(pa, pb)
}

pub fn disc_i2_sl4(pa: &Point2, pc: &Point2) -> Result<f64, NumericError> {
    two_point_sl4(pa, pc)
}

/// The two-point invariant of either realization.
pub fn two_point(realization: Realization, a: &Point2, b: &Point2) -> Result<f64, NumericError> {
    match realization {
        Realization::Sl3 => two_point_sl3(a, b),
        Realization::Sl4 => two_point_sl4(a, b),
    }
}

fn chord_guard(t: &DiscreteInvariantTriple) -> Result<(), NumericError> {
    if !(t.i1n > 0.0 && t.i1n1 > 0.0) {
        return Err(NumericError::domain(
            Location::None,
            format!("zero chord in window (I1^n = {}, I1^n+1 = {})", t.i1n, t.i1n1),
        ));
    }
    Ok(())
}

fn principal_sqrt(radicand: f64, what: &str) -> Result<f64, NumericError> {
    if radicand >= 0.0 {
        Ok(radicand.sqrt())
    } else if radicand >= -RADICAND_SLACK {
        Ok(0.0)
    } else {
        Err(NumericError::domain(
            Location::None,
            format!("{what} radicand negative: {radicand}"),
        ))
    }
}

pub fn j1_sl3(t: &DiscreteInvariantTriple) -> Result<f64, NumericError> {
    chord_guard(t)?;
    let sum = t.i1n + t.i1n1;
    let radicand = -8.0 * (t.i2n1 - sum) / (t.i1n * t.i1n1 * sum) + 1.0;
    principal_sqrt(radicand, "sl3 J1")
}

pub fn j1_sl4(t: &DiscreteInvariantTriple) -> Result<f64, NumericError> {
    chord_guard(t)?;
    let sum = t.i1n + t.i1n1;
    let radicand = (t.i2n1 - sum) / (t.i1n * t.i1n1 * sum) - 1.0;
    Ok(std::f64::consts::SQRT_2 * principal_sqrt(radicand, "sl4 J1")?)
}

fn j2_difference(
    i1n: f64,
    i1n1: f64,
    i1n2: f64,
    j1n1: f64,
    j1n2: f64,
) -> Result<f64, NumericError> {
    let sum = i1n + i1n1 + i1n2;
    if !(sum > 0.0) {
        return Err(NumericError::domain(
            Location::None,
            "J2 needs a positive sum of mesh invariants",
        ));
    }
    Ok(3.0 / sum * (j1n2 - j1n1))
}

pub fn j2_sl3(i1n: f64, i1n1: f64, i1n2: f64, j1n1: f64, j1n2: f64) -> Result<f64, NumericError> {
    j2_difference(i1n, i1n1, i1n2, j1n1, j1n2)
}

/// The `J1` inside the `6 J1²` term is the earlier window's value `j1n1`.
pub fn j2_sl4(i1n: f64, i1n1: f64, i1n2: f64, j1n1: f64, j1n2: f64) -> Result<f64, NumericError> {
    Ok(j2_difference(i1n, i1n1, i1n2, j1n1, j1n2)? + 6.0 * j1n1 * j1n1 + 3.0)
}

pub fn j1(realization: Realization, t: &DiscreteInvariantTriple) -> Result<f64, NumericError> {
    match realization {
        Realization::Sl3 => j1_sl3(t),
        Realization::Sl4 => j1_sl4(t),
    }
}

pub fn j2(
    realization: Realization,
    i1: [f64; 3],
    j1n1: f64,
    j1n2: f64,
) -> Result<f64, NumericError> {
    match realization {
        Realization::Sl3 => j2_sl3(i1[0], i1[1], i1[2], j1n1, j1n2),
        Realization::Sl4 => j2_sl4(i1[0], i1[1], i1[2], j1n1, j1n2),
    }
}

/// Cross-ratio `(a, b; c, d) = (c - a)(d - b) / ((c - b)(d - a))`.
fn cross_ratio<T>(a: T, b: T, c: T, d: T) -> T
where
    T: Copy + std::ops::Sub<Output = T> + std::ops::Mul<Output = T> + std::ops::Div<Output = T>,
{
    (c - a) * (d - b) / ((c - b) * (d - a))
}

/// Invariant turning measure of the path `p0 → p1 → p2`.
///
/// Its sign is the sign of the travel-oriented `I1`: positive when the path
/// bends the same way as a graph with `I1 > 0` traversed towards increasing
/// x. It vanishes when `p2` lies on the curve of zero `I1` through `p0, p1`
/// (a geodesic of the realization) and flips under reflection across it,
/// which is what distinguishes the two roots of a scheme step.
///
/// * sl3: in `z = y + i x` the group acts by real Möbius maps on the upper
///   half-plane; the measure is `-Im (z0, z1; z2, conj z1)`.
/// * sl4: in `z = y + x`, `w = y - x` it acts diagonally on `(z, w)`; the
///   measure is `(z0, z1; z2, w1) - (w0, w1; w2, z1)`.
pub fn turning(realization: Realization, p0: &Point2, p1: &Point2, p2: &Point2) -> f64 {
    match realization {
        Realization::Sl3 => {
            let z = |p: &Point2| Complex64::new(p.y, p.x);
            let (z0, z1, z2) = (z(p0), z(p1), z(p2));
            -cross_ratio(z0, z1, z2, z1.conj()).im
        }
        Realization::Sl4 => {
            let (z0, z1, z2) = (p0.y + p0.x, p1.y + p1.x, p2.y + p2.x);
            let (w0, w1, w2) = (p0.y - p0.x, p1.y - p1.x, p2.y - p2.x);
            cross_ratio(z0, z1, z2, w1) - cross_ratio(w0, w1, w2, z1)
        }
    }
}

fn sign_of(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// `J1` of the window with the sign of [`turning`] attached.
pub fn signed_j1(
    realization: Realization,
    p0: &Point2,
    p1: &Point2,
    p2: &Point2,
) -> Result<f64, NumericError> {
    let t = DiscreteInvariantTriple::from_points(realization, p0, p1, p2)?;
    let magnitude = j1(realization, &t)?;
    Ok(sign_of(turning(realization, p0, p1, p2)) * magnitude)
}

/// `J2` over four points, built from the travel-oriented `J1` values.
pub fn signed_j2(realization: Realization, w: &[Point2; 4]) -> Result<f64, NumericError> {
    let j1a = signed_j1(realization, &w[0], &w[1], &w[2])?;
    let j1b = signed_j1(realization, &w[1], &w[2], &w[3])?;
    let i1 = [
        two_point(realization, &w[0], &w[1])?,
        two_point(realization, &w[1], &w[2])?,
        two_point(realization, &w[2], &w[3])?,
    ];
    j2(realization, i1, j1a, j1b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn p(x: f64, y: f64) -> Point2 {
        Point2::new(x, y)
    }

    #[test]
    fn sl3_continuous_examples() {
        assert_eq!(cont_i1_sl3(&JetPoint::second(1.0, 0.0, 0.0)), 0.0);
        // (0.6, 0.8) on x² + y² = 1: y' = -x/y, y'' = -1/y³.
        let j = JetPoint::second(0.6, -0.75, -1.953125);
        assert_abs_diff_eq!(cont_i1_sl3(&j), 0.0, epsilon = 1e-15);
        assert_eq!(cont_i2_sl3(&JetPoint::third(1.0, 0.0, 0.0, 0.0)).unwrap(), 0.0);
        assert_abs_diff_eq!(
            cont_i2_sl3(&JetPoint::third(2.0, 1.0, 1.0, 0.0)).unwrap(),
            1.5,
            epsilon = 1e-15
        );
        assert!(cont_i2_sl3(&JetPoint::second(2.0, 1.0, 1.0)).is_err());
    }

    /// Circle with centre (2, 8) and radius 1 by implicit differentiation:
    /// `I1 = cx / r = 2` on the upper arc, `-2` on the lower arc (graph
    /// orientation, increasing x).
    #[test]
    fn sl3_circle_sign_convention() {
        for &x in &[1.2, 1.7, 2.0, 2.5, 2.9] {
            for &(upper, expected) in &[(true, 2.0), (false, -2.0)] {
                let dy = (1.0 - (x - 2.0f64).powi(2)).sqrt();
                let v = if upper { dy } else { -dy };
                let yp = -(x - 2.0) / v;
                let ypp = -(1.0 + yp * yp) / v;
                assert_abs_diff_eq!(
                    cont_i1_sl3(&JetPoint::second(x, yp, ypp)),
                    expected,
                    epsilon = 1e-12
                );
            }
        }
    }

    #[test]
    fn sl4_continuous_examples() {
        // x² - (y - c)² = 1 with y' = -1.5 lies at x² = 1.8.
        let x = 1.8f64.sqrt();
        let v = x / -1.5; // y - c
        let yp: f64 = -1.5;
        let ypp = (1.0 - yp * yp) / v;
        assert_abs_diff_eq!(
            cont_i1_sl4(&JetPoint::second(x, yp, ypp)).unwrap(),
            0.0,
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(
            cont_i1_sl4(&JetPoint::second(1.0, 2f64.sqrt(), 0.0)).unwrap(),
            2f64.sqrt(),
            epsilon = 1e-14
        );
        assert!(cont_i1_sl4(&JetPoint::second(1.0, 1.0, 1.0)).is_err());
        assert_abs_diff_eq!(
            cont_i2_sl4(&JetPoint::third(1.0, 0.0, 0.0, 0.0)).unwrap(),
            3.0,
            epsilon = 1e-15
        );
        assert!(cont_i2_sl4(&JetPoint::third(1.0, -1.0, 0.0, 0.0)).is_err());
    }

    #[test]
    fn sl3_discrete_examples() {
        assert_eq!(disc_i1_sl3(&p(1.0, 0.0), &p(1.0, 1.0)).unwrap(), 1.0);
        assert_eq!(disc_i1_sl3(&p(1.5, 2.0), &p(1.5, 2.0)).unwrap(), 0.0);
        assert_eq!(disc_i1_sl3(&p(1.0, 0.0), &p(2.0, 1.0)).unwrap(), 1.0);
        assert_eq!(disc_i2_sl3(&p(1.0, 0.0), &p(1.0, 2.0)).unwrap(), 2.0);
        assert_eq!(disc_i2_sl3(&p(1.0, 0.0), &p(4.0, 0.0)).unwrap(), 1.5);
        assert!(disc_i1_sl3(&p(-1.0, 0.0), &p(1.0, 0.0)).is_err());
    }

    #[test]
    fn sl4_discrete_examples() {
        assert!(disc_i1_sl4(&p(1.0, 0.0), &p(1.0, 2.0)).is_err());
        assert_abs_diff_eq!(
            disc_i1_sl4(&p(1.0, 0.0), &p(1.0, 1.0)).unwrap(),
            1.0 / 3f64.sqrt(),
            epsilon = 1e-15
        );
        assert_eq!(disc_i1_sl4(&p(3.0, 1.0), &p(3.0, 1.0)).unwrap(), 0.0);
        assert_abs_diff_eq!(
            disc_i2_sl4(&p(1.0, 0.0), &p(2.0, 2.0)).unwrap(),
            (3.0f64 / 5.0).sqrt(),
            epsilon = 1e-15
        );
        // spacelike pair
        assert!(disc_i2_sl4(&p(1.0, 0.0), &p(2.0, 0.5)).is_err());
    }

    #[test]
    fn j_combination_examples() {
        let t = |a, b, c| DiscreteInvariantTriple {
            i1n: a,
            i1n1: b,
            i2n1: c,
        };
        assert_eq!(j1_sl3(&t(0.3, 0.7, 1.0)).unwrap(), 1.0);
        assert_eq!(j1_sl3(&t(1.0, 1.0, 2.25)).unwrap(), 0.0);
        assert!(j1_sl3(&t(1.0, 1.0, 2.5)).is_err());
        assert!(j1_sl3(&t(0.0, 1.0, 1.0)).is_err());
        assert_eq!(j2_sl3(0.2, 0.2, 0.2, 0.4, 0.4).unwrap(), 0.0);
        assert_abs_diff_eq!(j2_sl3(1.0, 1.0, 1.0, 0.5, 0.8).unwrap(), 0.3, epsilon = 1e-15);
        assert_eq!(j1_sl4(&t(1.0, 1.0, 4.0)).unwrap(), 0.0);
        assert_abs_diff_eq!(
            j1_sl4(&t(1.0, 1.0, 6.0)).unwrap(),
            2f64.sqrt(),
            epsilon = 1e-15
        );
        assert_eq!(j2_sl4(0.1, 0.1, 0.1, 0.0, 0.0).unwrap(), 3.0);
        assert_eq!(j2_sl4(1.0, 1.0, 1.0, 1.0, 1.0).unwrap(), 9.0);
        assert!(j2_sl4(0.0, 0.0, 0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn turning_flips_with_travel_direction() {
        let a = p(1.0, 1.0);
        let b = p(1.1, 1.2);
        let c = p(1.2, 1.45);
        for r in [Realization::Sl3, Realization::Sl4] {
            let fwd = turning(r, &a, &b, &c);
            let back = turning(r, &c, &b, &a);
            assert!(fwd * back < 0.0, "{r:?}: {fwd} {back}");
        }
    }
}
