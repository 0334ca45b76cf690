//! Residual and solved forms of the invariant ODEs `I1 = C` and `I2 = F(I1)`.
//!
//! With `p = y'`, `q = y''`, `r = y'''`:
//!
//! * sl3, order 3 with `F(u) = u²` (expanded form, equal to
//!   `-(1+p²)³ (I2 - I1²)`):
//!   `x²(1+p²) r - x²(3p-1) q² - 2xp(1+p²) q + p²(1+p²)² = 0`
//! * sl4, order 3 with `F(u) = u²` (equal to `(p²-1)³ (I2 - I1²)`):
//!   `2x²(p²-1) r + (p²-1)²(8p²-3) + 10xpq(p²-1) - x²q²(6p-5) = 0`
//!
//! Other forcings use the invariant form `I2 - F(I1)` as the residual.

use crate::baselines::rk45::FirstOrderSystem;
use crate::invariants::{cont_i1, cont_i2, JetPoint};
use crate::types::{Forcing, Location, NumericError, Order, Realization, SchemeSpec};

/// Leading coefficients smaller than this are treated as vanishing.
const LEADING_EPS: f64 = 1e-300;

/// One of the four invariant ODEs, in forms usable by the baselines.
#[derive(Debug, Clone)]
pub enum InvariantOde {
    /// `I1 = C`.
    Second { realization: Realization, c: f64 },
    /// `I2 = F(I1)`.
    Third {
        realization: Realization,
        forcing: Forcing,
    },
}

/// Builds the ODE matching a scheme's constants.
pub fn ode_rhs_library(spec: &SchemeSpec) -> Result<InvariantOde, NumericError> {
    spec.validate()?;
    Ok(match spec.order {
        Order::Second => InvariantOde::Second {
            realization: spec.realization,
            c: spec.c.expect("validated"),
        },
        Order::Third => InvariantOde::Third {
            realization: spec.realization,
            forcing: spec.forcing.clone().expect("validated"),
        },
    })
}

fn leading_guard(value: f64, x: f64, what: &str) -> Result<(), NumericError> {
    if value.abs() <= LEADING_EPS || !value.is_finite() {
        Err(NumericError::domain(
            Location::X(x),
            format!("leading coefficient of {what} vanishes"),
        ))
    } else {
        Ok(())
    }
}

impl InvariantOde {
    pub fn realization(&self) -> Realization {
        match self {
            InvariantOde::Second { realization, .. } | InvariantOde::Third { realization, .. } => {
                *realization
            }
        }
    }

    pub fn order(&self) -> Order {
        match self {
            InvariantOde::Second { .. } => Order::Second,
            InvariantOde::Third { .. } => Order::Third,
        }
    }

    fn uses_expanded_form(&self) -> bool {
        matches!(self, InvariantOde::Third { forcing, .. } if forcing.name() == "square")
    }

    /// Residual at a jet; zero exactly on solutions. Third order needs `yppp`.
    pub fn residual(&self, j: &JetPoint) -> Result<f64, NumericError> {
        match self {
            InvariantOde::Second { realization, c } => Ok(cont_i1(*realization, j)? - c),
            InvariantOde::Third {
                realization,
                forcing,
            } => {
                let r = j.yppp.ok_or_else(|| {
                    NumericError::domain(Location::X(j.x), "third-order residual needs y'''")
                })?;
                if self.uses_expanded_form() {
                    Ok(expanded_residual(*realization, j.x, j.yp, j.ypp, r))
                } else {
                    let i1 = cont_i1(*realization, j)?;
                    Ok(cont_i2(*realization, j)? - forcing.eval(i1))
                }
            }
        }
    }

    /// The highest derivative (`y''` or `y'''`) as a function of the lower jet.
    pub fn solve_highest(&self, x: f64, yp: f64, ypp: f64) -> Result<f64, NumericError> {
        let p = yp;
        match self {
            InvariantOde::Second { realization, c } => {
                leading_guard(x, x, "the second-order equation")?;
                match realization {
                    Realization::Sl3 => {
                        let s = 1.0 + p * p;
                        Ok((p * s - c * s * s.sqrt()) / x)
                    }
                    Realization::Sl4 => {
                        let s = p * p - 1.0;
                        if !(s > 0.0) {
                            return Err(NumericError::domain(
                                Location::X(x),
                                format!("sl4 equation needs |y'| > 1, got {p}"),
                            ));
                        }
                        Ok((c * s * s.sqrt() - p * s) / x)
                    }
                }
            }
            InvariantOde::Third {
                realization,
                forcing,
            } => {
                let q = ypp;
                let x2 = x * x;
                match realization {
                    Realization::Sl3 => {
                        let s = 1.0 + p * p;
                        leading_guard(x2 * s, x, "the sl3 third-order equation")?;
                        if self.uses_expanded_form() {
                            Ok((x2 * (3.0 * p - 1.0) * q * q + 2.0 * x * p * s * q
                                - p * p * s * s)
                                / (x2 * s))
                        } else {
                            let i1 = cont_i1(*realization, &JetPoint::second(x, p, q))?;
                            Ok((3.0 * x2 * p * q * q - forcing.eval(i1) * s * s * s) / (x2 * s))
                        }
                    }
                    Realization::Sl4 => {
                        let s = p * p - 1.0;
                        if self.uses_expanded_form() {
                            leading_guard(2.0 * x2 * s, x, "the sl4 third-order equation")?;
                            Ok(-(s * s * (8.0 * p * p - 3.0) + 10.0 * x * p * q * s
                                - x2 * q * q * (6.0 * p - 5.0))
                                / (2.0 * x2 * s))
                        } else {
                            let (m, n) = (p - 1.0, p + 1.0);
                            leading_guard(2.0 * x2 * n, x, "the sl4 third-order equation")?;
                            let i1 = cont_i1(*realization, &JetPoint::second(x, p, q))?;
                            let inner = m * n * n * (3.0 * p * p - 1.0) + 4.0 * x * p * n * q
                                - 2.0 * x2 * q * q;
                            Ok((forcing.eval(i1) * m * m * n * n * n - 3.0 * inner)
                                / (2.0 * x2 * n))
                        }
                    }
                }
            }
        }
    }

    /// First-order system in `(y, y')` or `(y, y', y'')`.
    pub fn system(&self) -> FirstOrderSystem<'static> {
        let ode = self.clone();
        match self.order() {
            Order::Second => FirstOrderSystem::new(2, move |x, s, out| {
                out[0] = s[1];
                out[1] = ode.solve_highest(x, s[1], 0.0)?;
                Ok(())
            }),
            Order::Third => FirstOrderSystem::new(3, move |x, s, out| {
                out[0] = s[1];
                out[1] = s[2];
                out[2] = ode.solve_highest(x, s[1], s[2])?;
                Ok(())
            }),
        }
    }
}

/// The expanded polynomial forms for `F(u) = u²`.
pub fn expanded_residual(realization: Realization, x: f64, p: f64, q: f64, r: f64) -> f64 {
    let x2 = x * x;
    match realization {
        Realization::Sl3 => {
            let s = 1.0 + p * p;
            x2 * s * r - x2 * (3.0 * p - 1.0) * q * q - 2.0 * x * p * s * q + p * p * s * s
        }
        Realization::Sl4 => {
            let s = p * p - 1.0;
            2.0 * x2 * s * r + s * s * (8.0 * p * p - 3.0) + 10.0 * x * p * q * s
                - x2 * q * q * (6.0 * p - 5.0)
        }
    }
}
