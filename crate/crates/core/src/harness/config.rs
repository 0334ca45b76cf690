//! Experiment configuration: flat camelCase JSON.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::types::{Forcing, Order, Realization};

pub const DEFAULT_H: f64 = 0.01;
pub const DEFAULT_MAX_STEPS: usize = 5000;
/// Half-width of the default x window around `x0`.
pub const DEFAULT_X_SPAN: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "invariant")]
    Invariant,
    #[serde(rename = "standardFD")]
    StandardFd,
    #[serde(rename = "rk45")]
    Rk45,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Invariant, Method::StandardFd, Method::Rk45];

    pub fn name(self) -> &'static str {
        match self {
            Method::Invariant => "invariant",
            Method::StandardFd => "standardFD",
            Method::Rk45 => "rk45",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Method::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown method `{s}` (expected invariant, standardFD or rk45)"))
    }
}

fn default_forcing() -> String {
    "square".into()
}

fn default_h() -> f64 {
    DEFAULT_H
}

fn default_max_steps() -> usize {
    DEFAULT_MAX_STEPS
}

fn default_methods() -> Vec<Method> {
    Method::ALL.to_vec()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub realization: Realization,
    /// 2 or 3.
    pub order: u8,
    pub x0: f64,
    pub y0: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub yp0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ypp0: Option<f64>,
    #[serde(rename = "C", default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(rename = "F", default = "default_forcing")]
    pub forcing: String,
    #[serde(default = "default_h")]
    pub h: f64,
    #[serde(default = "default_max_steps")]
    pub max_steps: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_max: Option<f64>,
    #[serde(default = "default_methods")]
    pub methods: Vec<Method>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        let cfg: Self =
            serde_json::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn order(&self) -> Order {
        if self.order == 3 {
            Order::Third
        } else {
            Order::Second
        }
    }

    pub fn forcing(&self) -> Option<Forcing> {
        Forcing::by_name(&self.forcing)
    }

    /// `[max(x0 - 5, x0/100), x0 + 5]` unless overridden.
    pub fn x_window(&self) -> (f64, f64) {
        let lo = self
            .x_min
            .unwrap_or_else(|| (self.x0 - DEFAULT_X_SPAN).max(0.01 * self.x0));
        let hi = self.x_max.unwrap_or(self.x0 + DEFAULT_X_SPAN);
        (lo, hi)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: String| Err(HarnessError::Config(format!("{}: {m}", self.name)));
        if self.name.trim().is_empty() {
            return bad("name must not be empty".into());
        }
        if !(self.x0 > 0.0 && self.x0.is_finite() && self.y0.is_finite()) {
            return bad(format!("initial point ({}, {}) must have finite x0 > 0", self.x0, self.y0));
        }
        if !(self.h > 0.0 && self.h.is_finite()) {
            return bad(format!("h must be positive, got {}", self.h));
        }
        let (lo, hi) = self.x_window();
        if !(lo > 0.0 && lo < hi) {
            return bad(format!("x window [{lo}, {hi}] must satisfy 0 < xMin < xMax"));
        }
        match self.order {
            2 => {
                if self.c.is_none() {
                    return bad("order 2 needs C".into());
                }
                if self.a.is_none() && self.yp0.is_none() {
                    return bad("order 2 needs a or yp0".into());
                }
                if self.a == Some(0.0) {
                    return bad("a must be nonzero".into());
                }
            }
            3 => {
                if self.yp0.is_none() || self.ypp0.is_none() {
                    return bad("order 3 needs yp0 and ypp0".into());
                }
                if self.forcing().is_none() {
                    return bad(format!("unknown F `{}`", self.forcing));
                }
            }
            other => return bad(format!("order must be 2 or 3, got {other}")),
        }
        Ok(())
    }
}

fn builtin(name: &str, realization: Realization, order: u8, methods: &[Method]) -> ExperimentConfig {
    ExperimentConfig {
        name: name.into(),
        realization,
        order,
        x0: 0.0,
        y0: 0.0,
        yp0: None,
        ypp0: None,
        c: None,
        a: None,
        forcing: default_forcing(),
        h: DEFAULT_H,
        max_steps: DEFAULT_MAX_STEPS,
        x_min: None,
        x_max: None,
        methods: methods.to_vec(),
        output: None,
    }
}

/// The four figure experiments.
pub fn builtin_experiments() -> Vec<ExperimentConfig> {
    use Method::*;
    let fig1 = ExperimentConfig {
        x0: 1.0,
        y0: 8.0,
        c: Some(2.0),
        a: Some(1.0),
        ..builtin("fig1", Realization::Sl3, 2, &[Invariant, StandardFd])
    };
    let fig2 = ExperimentConfig {
        x0: 1.0,
        y0: 1.0,
        yp0: Some(1.0),
        ypp0: Some(3.0),
        ..builtin("fig2", Realization::Sl3, 3, &Method::ALL)
    };
    let fig3 = ExperimentConfig {
        x0: 2.0,
        y0: 5.0,
        c: Some(5.0),
        a: Some(1.0),
        ..builtin("fig3", Realization::Sl4, 2, &[Invariant, StandardFd])
    };
    let fig4 = ExperimentConfig {
        x0: 2.0,
        y0: 1.0,
        yp0: Some(-1.5),
        ypp0: Some(-1.5),
        ..builtin("fig4", Realization::Sl4, 3, &Method::ALL)
    };
    vec![fig1, fig2, fig3, fig4]
}

pub fn builtin_experiment(name: &str) -> Option<ExperimentConfig> {
    builtin_experiments().into_iter().find(|c| c.name == name)
}
