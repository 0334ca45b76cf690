//! Finite `SL(2,R)` actions of the `sl3` and `sl4` realizations.
//!
//! With `X1 = ∂y`, `X2 = x∂x + y∂y` and `X3 = 2xy∂x + (y² ∓ x²)∂y`:
//!
//! * sl3: in `z = y + i x` the fields become `∂z`, `z∂z`, `z²∂z`, so a group
//!   element acts by the Möbius map `z ↦ (az + b)/(cz + d)` of the upper
//!   half-plane `x > 0`.
//! * sl4: in the light-cone pair `z = y + x`, `w = y - x` the fields act
//!   diagonally, and the same real Möbius map is applied to `z` and `w`.
//!
//! The one-parameter subgroups are `exp(tX1) = (1, t, 0, 1)`,
//! `exp(tX2) = (e^{t/2}, 0, 0, e^{-t/2})` and `exp(tX3) = (1, 0, -t, 1)`;
//! [`flow_oracle`] integrates the vector fields directly and is the
//! reference these closed forms are checked against.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::baselines::rk45::{rk45_integrate_with, FirstOrderSystem, Rk45Options};
use crate::types::{ErrorKind, Location, NumericError, Point2, Realization};

/// Denominators below this magnitude are treated as poles.
const POLE_EPS: f64 = 1e-300;

/// A unimodular 2×2 real matrix `[[a, b], [c, d]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupElement {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Generator {
    X1,
    X2,
    X3,
}

impl GroupElement {
    pub const IDENTITY: GroupElement = GroupElement {
        a: 1.0,
        b: 0.0,
        c: 0.0,
        d: 1.0,
    };

    /// Rescales `(a, b, c, d)` to unit determinant; `None` unless `ad - bc > 0`.
    pub fn normalized(a: f64, b: f64, c: f64, d: f64) -> Option<Self> {
        let det = a * d - b * c;
        if !(det > 0.0) || !det.is_finite() {
            return None;
        }
        let s = det.sqrt();
        Some(Self {
            a: a / s,
            b: b / s,
            c: c / s,
            d: d / s,
        })
    }

    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    pub fn translation(beta: f64) -> Self {
        Self {
            a: 1.0,
            b: beta,
            c: 0.0,
            d: 1.0,
        }
    }

    pub fn scaling(lambda: f64) -> Self {
        Self {
            a: lambda,
            b: 0.0,
            c: 0.0,
            d: 1.0 / lambda,
        }
    }

    pub fn special(t: f64) -> Self {
        Self {
            a: 1.0,
            b: 0.0,
            c: -t,
            d: 1.0,
        }
    }

    /// The element `exp(t X)` for a generator.
    pub fn one_parameter(generator: Generator, t: f64) -> Self {
        match generator {
            Generator::X1 => Self::translation(t),
            Generator::X2 => Self::scaling((0.5 * t).exp()),
            Generator::X3 => Self::special(t),
        }
    }

    /// Matrix product `self · other`, renormalized to determinant 1.
    pub fn compose(&self, other: &GroupElement) -> Self {
        let a = self.a * other.a + self.b * other.c;
        let b = self.a * other.b + self.b * other.d;
        let c = self.c * other.a + self.d * other.c;
        let d = self.c * other.b + self.d * other.d;
        Self::normalized(a, b, c, d).expect("product of unimodular matrices is unimodular")
    }

    pub fn inverse(&self) -> Self {
        Self {
            a: self.d,
            b: -self.b,
            c: -self.c,
            d: self.a,
        }
    }

    fn mobius_real(&self, u: f64) -> Option<f64> {
        let den = self.c * u + self.d;
        if den.abs() <= POLE_EPS {
            None
        } else {
            Some((self.a * u + self.b) / den)
        }
    }
}

pub fn act_sl3(g: &GroupElement, p: &Point2) -> Result<Point2, NumericError> {
    if !(p.x > 0.0) {
        return Err(NumericError::domain(Location::Point(*p), "sl3 action needs x > 0"));
    }
    let z = Complex64::new(p.y, p.x);
    let den = z * g.c + g.d;
    if den.norm() <= POLE_EPS {
        return Err(NumericError::domain(Location::Point(*p), "Möbius pole"));
    }
    let w = (z * g.a + g.b) / den;
    let out = Point2::new(w.im, w.re);
    if !(out.x > 0.0) || !out.is_finite() {
        return Err(NumericError::domain(
            Location::Point(*p),
            format!("sl3 image {out} left the half-plane"),
        ));
    }
    Ok(out)
}

pub fn act_sl4(g: &GroupElement, p: &Point2) -> Result<Point2, NumericError> {
    if !(p.x > 0.0) {
        return Err(NumericError::domain(Location::Point(*p), "sl4 action needs x > 0"));
    }
    let pole = || NumericError::domain(Location::Point(*p), "Möbius pole");
    let z = g.mobius_real(p.y + p.x).ok_or_else(pole)?;
    let w = g.mobius_real(p.y - p.x).ok_or_else(pole)?;
    let out = Point2::new(0.5 * (z - w), 0.5 * (z + w));
    if !(out.x > 0.0) || !out.is_finite() {
        return Err(NumericError::domain(
            Location::Point(*p),
            format!("sl4 image {out} left the half-plane"),
        ));
    }
    Ok(out)
}

pub fn act(realization: Realization, g: &GroupElement, p: &Point2) -> Result<Point2, NumericError> {
    match realization {
        Realization::Sl3 => act_sl3(g, p),
        Realization::Sl4 => act_sl4(g, p),
    }
}

/// Applies `g` to every point, failing if any image leaves the domain.
pub fn act_all(
    realization: Realization,
    g: &GroupElement,
    points: &[Point2],
) -> Result<Vec<Point2>, NumericError> {
    points.iter().map(|p| act(realization, g, p)).collect()
}

/// Components `(ξ, φ)` of a generator at `(x, y)`.
pub fn vector_field(realization: Realization, generator: Generator, x: f64, y: f64) -> (f64, f64) {
    match generator {
        Generator::X1 => (0.0, 1.0),
        Generator::X2 => (x, y),
        Generator::X3 => match realization {
            Realization::Sl3 => (2.0 * x * y, y * y - x * x),
            Realization::Sl4 => (2.0 * x * y, x * x + y * y),
        },
    }
}

/// Time-`t` flow of a generator, integrated numerically at tight tolerance.
pub fn flow_oracle(
    realization: Realization,
    generator: Generator,
    t: f64,
    p: &Point2,
) -> Result<Point2, NumericError> {
    if t == 0.0 {
        return Ok(*p);
    }
    let sys = FirstOrderSystem::new(2, move |_, s, out| {
        if !(s[0] > 0.0) {
            return Err(NumericError::domain(Location::X(s[0]), "flow left x > 0"));
        }
        let (xi, phi) = vector_field(realization, generator, s[0], s[1]);
        out[0] = xi;
        out[1] = phi;
        Ok(())
    });
    let mut opts = Rk45Options::new(1e-13, 1e-14);
    opts.blowup = 1e12;
    let r = rk45_integrate_with(&sys, 0.0, &[p.x, p.y], t, &opts);
    match r.failure {
        None => {
            let s = r.last_state();
            Ok(Point2::new(s[0], s[1]))
        }
        Some(e) => Err(NumericError::new(
            ErrorKind::StepUnderflow,
            Location::Point(*p),
            format!("flow did not reach t = {t}: {}", e.detail),
        )),
    }
}

/// Deterministic element with entries of order `scale`, built as a product
/// of the three one-parameter subgroups so the determinant is exactly 1
/// before renormalization.
pub fn random_group_element(seed: u64, scale: f64) -> GroupElement {
    assert!(scale > 0.0, "scale must be positive");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_group_element_from(&mut rng, scale)
}

pub fn random_group_element_from<R: Rng>(rng: &mut R, scale: f64) -> GroupElement {
    let beta = rng.gen_range(-scale..=scale);
    let log_lambda = rng.gen_range(-scale..=scale);
    let t = rng.gen_range(-scale..=scale);
    let g = GroupElement::translation(beta)
        .compose(&GroupElement::scaling(log_lambda.exp()))
        .compose(&GroupElement::special(t));
    GroupElement::normalized(g.a, g.b, g.c, g.d).expect("unimodular")
}
