//! Shared domain types, tolerances and the error taxonomy.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Residual tolerance enforced by every step solve.
pub const STEP_TOL: f64 = 1e-12;
/// Agreement required between two independent solution routes.
pub const CROSS_TOL: f64 = 1e-10;
/// Geometric acceptance tolerance (distance to an exact conic).
pub const GEOM_TOL: f64 = 1e-9;

/// A mesh node in the (x, y) plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn dist(&self, other: &Point2) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn sub(&self, other: &Point2) -> (f64, f64) {
        (self.x - other.x, self.y - other.y)
    }
}

impl fmt::Display for Point2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// Which `sl(2,R)` realization a formula set belongs to.
///
/// Both share `X1 = ∂y`, `X2 = x∂x + y∂y`; they differ in the sign of
/// `x²` in the `∂y` component of `X3 = 2xy∂x + (±x² + y²)∂y`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Realization {
    Sl3,
    Sl4,
}

impl Realization {
    pub fn name(self) -> &'static str {
        match self {
            Realization::Sl3 => "sl3",
            Realization::Sl4 => "sl4",
        }
    }
}

impl std::str::FromStr for Realization {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "sl3" | "3" => Ok(Realization::Sl3),
            "sl4" | "4" => Ok(Realization::Sl4),
            other => Err(format!("unknown realization `{other}` (expected sl3 or sl4)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Order {
    Second,
    Third,
}

impl Order {
    /// Number of mesh points the scheme equations involve.
    pub fn stencil_width(self) -> usize {
        match self {
            Order::Second => 3,
            Order::Third => 4,
        }
    }

    pub fn as_u8(self) -> u8 {
        match self {
            Order::Second => 2,
            Order::Third => 3,
        }
    }
}

/// Right-hand side `F` of the third-order invariant equation `I2 = F(I1)`.
#[derive(Clone)]
pub struct Forcing {
    name: String,
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl Forcing {
    pub fn new(name: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            name: name.into(),
            f: Arc::new(f),
        }
    }

    /// `F(u) = u²`, the choice used in all built-in experiments.
    pub fn square() -> Self {
        Self::new("square", |u| u * u)
    }

    /// Resolves one of the named choices accepted in config files.
    pub fn by_name(name: &str) -> Option<Self> {
        match name {
            "square" => Some(Self::square()),
            "zero" => Some(Self::new("zero", |_| 0.0)),
            "identity" => Some(Self::new("identity", |u| u)),
            "cube" => Some(Self::new("cube", |u| u * u * u)),
            _ => None,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn eval(&self, u: f64) -> f64 {
        (self.f)(u)
    }
}

impl fmt::Debug for Forcing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("Forcing").field(&self.name).finish()
    }
}

/// Scheme constants: realization, order, `C` or `F`, and the mesh constant `K`.
#[derive(Debug, Clone)]
pub struct SchemeSpec {
    pub realization: Realization,
    pub order: Order,
    pub c: Option<f64>,
    pub forcing: Option<Forcing>,
    /// Common value of the two-point invariant along the mesh.
    pub k: f64,
}

impl SchemeSpec {
    pub fn second_order(realization: Realization, c: f64, k: f64) -> Result<Self, NumericError> {
        let spec = Self {
            realization,
            order: Order::Second,
            c: Some(c),
            forcing: None,
            k,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn third_order(
        realization: Realization,
        forcing: Forcing,
        k: f64,
    ) -> Result<Self, NumericError> {
        let spec = Self {
            realization,
            order: Order::Third,
            c: None,
            forcing: Some(forcing),
            k,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), NumericError> {
        if !(self.k > 0.0 && self.k.is_finite()) {
            return Err(NumericError::domain(
                Location::None,
                format!("mesh constant must be positive, got {}", self.k),
            ));
        }
        match self.order {
            Order::Second if self.c.is_none() => Err(NumericError::domain(
                Location::None,
                "second-order scheme requires C",
            )),
            Order::Third if self.forcing.is_none() => Err(NumericError::domain(
                Location::None,
                "third-order scheme requires F",
            )),
            _ => Ok(()),
        }
    }
}

/// Per-step record attached to each point the scheme produced.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepDiagnostics {
    /// Travel-oriented `J1` of the window ending at this point.
    pub j1: f64,
    /// Travel-oriented `J2` of the 4-point window ending here (third order only).
    pub j2: Option<f64>,
    pub mesh_residual: f64,
    /// Max-norm of the two step equations at the accepted point.
    pub step_residual: f64,
    pub solver_iterations: u32,
}

/// Why a run stopped.
#[derive(Debug, Clone, PartialEq)]
pub enum HaltReason {
    MaxSteps,
    LeftWindow { x: f64 },
    ReachedEnd { x: f64 },
    Error(NumericError),
}

impl HaltReason {
    pub fn label(&self) -> String {
        match self {
            HaltReason::MaxSteps => "maxSteps".into(),
            HaltReason::LeftWindow { .. } => "xWindow".into(),
            HaltReason::ReachedEnd { .. } => "reachedEnd".into(),
            HaltReason::Error(e) => format!("{:?}", e.kind),
        }
    }

    pub fn is_error(&self) -> bool {
        matches!(self, HaltReason::Error(_))
    }
}

/// Ordered mesh points plus the diagnostics of every scheme step.
///
/// `diagnostics[i]` belongs to `points[i + offset]`, where the offset is the
/// number of seed points that were not produced by a scheme step.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub points: Vec<Point2>,
    pub diagnostics: Vec<StepDiagnostics>,
    pub halt: HaltReason,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn seed_len(&self) -> usize {
        self.points.len() - self.diagnostics.len()
    }

    pub fn last_x(&self) -> Option<f64> {
        self.points.last().map(|p| p.x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ErrorKind {
    DomainViolation,
    NoIntersection,
    NewtonDivergence,
    StepUnderflow,
    SingularityDetected,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Location {
    Point(Point2),
    Index(usize),
    X(f64),
    None,
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Location::Point(p) => write!(f, "point {p}"),
            Location::Index(i) => write!(f, "index {i}"),
            Location::X(x) => write!(f, "x = {x}"),
            Location::None => f.write_str("<unlocated>"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{kind:?} at {location}: {detail}")]
pub struct NumericError {
    pub kind: ErrorKind,
    pub location: Location,
    pub detail: String,
}

impl NumericError {
    pub fn new(kind: ErrorKind, location: Location, detail: impl Into<String>) -> Self {
        Self {
            kind,
            location,
            detail: detail.into(),
        }
    }

    pub fn domain(location: Location, detail: impl Into<String>) -> Self {
        Self::new(ErrorKind::DomainViolation, location, detail)
    }

    /// Singularities always carry the x at which they triggered.
    pub fn singularity(x: f64, detail: impl Into<String>) -> Self {
        Self::new(ErrorKind::SingularityDetected, Location::X(x), detail)
    }

    /// Best-effort x coordinate of the failure.
    pub fn x(&self) -> Option<f64> {
        match self.location {
            Location::Point(p) => Some(p.x),
            Location::X(x) => Some(x),
            _ => None,
        }
    }
}

/// True iff `p` lies in the admissible half-plane `x > 0` of the realization.
pub fn validate_point(p: &Point2, realization: Realization) -> bool {
    match realization {
        Realization::Sl3 | Realization::Sl4 => p.is_finite() && p.x > 0.0,
    }
}

/// `|a - b| <= rel_tol * (1 + max(|a|, |b|))`.
pub fn near_equal(a: f64, b: f64, rel_tol: f64) -> bool {
    (a - b).abs() <= rel_tol * (1.0 + a.abs().max(b.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn admissible_half_plane() {
        assert!(validate_point(&Point2::new(1.0, 8.0), Realization::Sl3));
        assert!(!validate_point(&Point2::new(-1.0, 0.0), Realization::Sl3));
        assert!(!validate_point(&Point2::new(0.0, 5.0), Realization::Sl4));
        assert!(!validate_point(&Point2::new(f64::NAN, 5.0), Realization::Sl4));
    }

    #[test]
    fn near_equal_floor() {
        assert!(near_equal(1.0, 1.0, 1e-12));
        assert!(!near_equal(1.0, 2.0, 1e-12));
        assert!(near_equal(0.0, 1e-13, 1e-12));
    }

    #[test]
    fn spec_requires_its_constants() {
        assert!(SchemeSpec::second_order(Realization::Sl3, 2.0, 0.01).is_ok());
        assert!(SchemeSpec::second_order(Realization::Sl3, 2.0, 0.0).is_err());
        let mut s = SchemeSpec::third_order(Realization::Sl4, Forcing::square(), 0.1).unwrap();
        s.forcing = None;
        assert_eq!(s.validate().unwrap_err().kind, ErrorKind::DomainViolation);
    }

    #[test]
    fn singularity_carries_x() {
        let e = NumericError::singularity(1.28, "blow-up");
        assert_eq!(e.x(), Some(1.28));
        assert_eq!(e.kind, ErrorKind::SingularityDetected);
    }
}
