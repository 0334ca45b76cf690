//! Trajectory CSV files.
//!
//! Floats are written with 17 significant digits so that every value parses
//! back to the same `f64`.

use std::path::Path;

use super::HarnessError;
use crate::types::{Point2, Trajectory};

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

/// One parsed row; diagnostic columns are `None` when absent or blank.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CsvRow {
    pub index: usize,
    pub point: Point2,
    pub j1: Option<f64>,
    pub j2: Option<f64>,
    pub mesh_residual: Option<f64>,
}

/// Writes `index,x,y`, plus `J1,J2,meshResidual` when `with_diagnostics`.
pub fn write_trajectory_csv(
    path: &Path,
    traj: &Trajectory,
    with_diagnostics: bool,
) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_path(path)?;
    if with_diagnostics {
        w.write_record(["index", "x", "y", "J1", "J2", "meshResidual"])?;
    } else {
        w.write_record(["index", "x", "y"])?;
    }
    let offset = traj.seed_len();
    for (i, p) in traj.points.iter().enumerate() {
        let mut rec = vec![i.to_string(), fmt(p.x), fmt(p.y)];
        if with_diagnostics {
            match i.checked_sub(offset).and_then(|k| traj.diagnostics.get(k)) {
                Some(d) => {
                    rec.push(fmt(d.j1));
                    rec.push(d.j2.map(fmt).unwrap_or_default());
                    rec.push(fmt(d.mesh_residual));
                }
                None => rec.extend([String::new(), String::new(), String::new()]),
            }
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_trajectory_csv(path: &Path) -> Result<Vec<CsvRow>, HarnessError> {
    let mut r = csv::Reader::from_path(path)?;
    let bad = |m: String| HarnessError::Config(format!("{}: {m}", path.display()));
    let float = |s: Option<&str>| -> Result<Option<f64>, HarnessError> {
        match s.map(str::trim) {
            None | Some("") => Ok(None),
            Some(t) => t.parse().map(Some).map_err(|_| bad(format!("bad number `{t}`"))),
        }
    };
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let index = rec
            .get(0)
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| bad("bad index".into()))?;
        let x = float(rec.get(1))?.ok_or_else(|| bad("missing x".into()))?;
        let y = float(rec.get(2))?.ok_or_else(|| bad("missing y".into()))?;
        rows.push(CsvRow {
            index,
            point: Point2::new(x, y),
            j1: float(rec.get(3))?,
            j2: float(rec.get(4))?,
            mesh_residual: float(rec.get(5))?,
        });
    }
    Ok(rows)
}
