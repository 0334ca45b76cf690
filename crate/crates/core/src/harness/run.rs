//! Method execution and report assembly.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::{ExperimentConfig, Method};
use super::metrics::{
    detect_singularity, max_conic_distance, median, mesh_drift, order2_drift, order3_drift,
    winding_angle, Singularity,
};
use super::output::write_trajectory_csv;
use super::HarnessError;
use crate::baselines::odes::InvariantOde;
use crate::baselines::rk45::{rk45_integrate, rk45_integrate_with, Rk45Options};
use crate::baselines::standard_fd::{run_standard_fd, UniformMesh};
use crate::exact::{solution_path, ConicPath, ExactConic};
use crate::schemes::{bootstrap, bootstrap_from_conic, run_scheme_timed, InitialData, StopRule};
use crate::types::{HaltReason, NumericError, Order, Point2, Trajectory};

/// Environment variable naming the default output directory.
pub const OUT_ENV: &str = "INVSCHEME_OUT";
/// Shift applied to `x0` when the conic has a vertical tangent there.
pub const NUDGE: f64 = 1e-6;

const RK_REL_TOL: f64 = 1e-10;
const RK_ABS_TOL: f64 = 1e-12;
const REFERENCE_REL_TOL: f64 = 1e-12;
const REFERENCE_ABS_TOL: f64 = 1e-13;

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Recorded in the report; every method is deterministic.
    pub seed: Option<u64>,
    /// Overrides `cfg.output` and the environment default.
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct MethodReport {
    pub method: Method,
    pub trajectory_file: Option<String>,
    pub points: usize,
    pub steps: usize,
    pub halt_reason: String,
    /// The method stopped on (or never started because of) a numeric error.
    pub numeric_error: bool,
    pub halt_detail: Option<String>,
    pub halt_x: Option<f64>,
    pub max_conic_distance: Option<f64>,
    pub winding_angle: Option<f64>,
    /// Max `|J1 - C|` (order 2) or `|J2 - F(J1)|` (order 3) over the output windows.
    pub invariant_drift: Option<f64>,
    pub mesh_drift: Option<f64>,
    /// Max `|y - y_exact|` where the exact branch is defined (order 2 with `a`).
    pub reference_error: Option<f64>,
    pub singularity: Option<Singularity>,
    pub seconds_per_step: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CostComparison {
    pub invariant: f64,
    pub standard_fd: f64,
    pub invariant_cheaper: bool,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RunReport {
    pub name: String,
    pub config: ExperimentConfig,
    pub seed: Option<u64>,
    pub output_dir: String,
    pub methods: Vec<MethodReport>,
    pub step_cost: BTreeMap<String, f64>,
    pub cost_comparison: Option<CostComparison>,
}

impl RunReport {
    pub fn method(&self, m: Method) -> Option<&MethodReport> {
        self.methods.iter().find(|r| r.method == m)
    }

    /// True when at least one method ran and every one ended in a numeric error.
    pub fn all_failed(&self) -> bool {
        !self.methods.is_empty()
            && self.methods.iter().all(|m| m.numeric_error)
    }
}

/// What one method produced, before anything is written.
#[derive(Debug, Clone)]
pub struct MethodOutcome {
    pub method: Method,
    /// `Err` when the method failed before producing a trajectory.
    pub trajectory: Result<Trajectory, NumericError>,
    /// Successful steps (seeds and failed attempts excluded).
    pub steps: usize,
    pub step_seconds: Vec<f64>,
}

impl MethodOutcome {
    fn failed(method: Method, e: NumericError) -> Self {
        Self {
            method,
            trajectory: Err(e),
            steps: 0,
            step_seconds: Vec::new(),
        }
    }
}

fn ode_of(cfg: &ExperimentConfig) -> Result<InvariantOde, HarnessError> {
    Ok(match cfg.order() {
        Order::Second => InvariantOde::Second {
            realization: cfg.realization,
            c: cfg.c.ok_or_else(|| HarnessError::Config("order 2 needs C".into()))?,
        },
        Order::Third => InvariantOde::Third {
            realization: cfg.realization,
            forcing: cfg
                .forcing()
                .ok_or_else(|| HarnessError::Config(format!("unknown F `{}`", cfg.forcing)))?,
        },
    })
}

fn conic_path(cfg: &ExperimentConfig) -> Option<Result<ConicPath, NumericError>> {
    match (cfg.order(), cfg.c, cfg.a) {
        (Order::Second, Some(c), Some(a)) => Some(solution_path(cfg.realization, cfg.x0, cfg.y0, c, a)),
        _ => None,
    }
}

/// The graph branch of the conic that the path starts on, as `(y(x), y'(x))`.
struct Branch {
    conic: ExactConic,
    sign: f64,
}

impl Branch {
    fn of(path: &ConicPath) -> Self {
        let cy = match path.conic {
            ExactConic::Circle(c) => c.cy,
            ExactConic::Hyperbola(h) => h.cy,
        };
        let p0 = path.point_at(0.0);
        let off = if p0.y != cy { p0.y - cy } else { path.point_at(NUDGE).y - cy };
        Self {
            conic: path.conic,
            sign: off.signum(),
        }
    }

    fn y(&self, x: f64) -> Option<f64> {
        let (rad, cy) = match self.conic {
            ExactConic::Circle(c) => (c.r * c.r - (x - c.cx).powi(2), c.cy),
            ExactConic::Hyperbola(h) => ((x - h.cx).powi(2) - h.r * h.r, h.cy),
        };
        (rad >= 0.0).then(|| cy + self.sign * rad.sqrt())
    }

    fn slope(&self, x: f64) -> Option<f64> {
        let y = self.y(x)?;
        let (u, v) = match self.conic {
            ExactConic::Circle(c) => (-(x - c.cx), y - c.cy),
            ExactConic::Hyperbola(h) => (x - h.cx, y - h.cy),
        };
        (v != 0.0).then(|| u / v).filter(|s| s.is_finite())
    }
}

fn reference_y(ode: &InvariantOde, x0: f64, state0: &[f64], x: f64) -> Result<f64, NumericError> {
    if x == x0 {
        return Ok(state0[0]);
    }
    let run = rk45_integrate(&ode.system(), x0, state0, x, REFERENCE_REL_TOL, REFERENCE_ABS_TOL);
    match run.failure {
        None => Ok(run.last_state()[0]),
        Some(e) => Err(e),
    }
}

/// Initial state for the classical integrators, nudged off a vertical tangent if needed.
fn classical_start(cfg: &ExperimentConfig) -> Result<(f64, Vec<f64>), NumericError> {
    let yp_from_conic = |branch: &Branch| -> Result<(f64, Vec<f64>), NumericError> {
        if let Some(s) = branch.slope(cfg.x0) {
            return Ok((cfg.x0, vec![cfg.y0, s]));
        }
        let x = cfg.x0 + NUDGE;
        match (branch.y(x), branch.slope(x)) {
            (Some(y), Some(s)) => Ok((x, vec![y, s])),
            _ => Err(NumericError::domain(
                crate::types::Location::X(cfg.x0),
                "no finite slope near the initial point",
            )),
        }
    };
    match cfg.order() {
        Order::Second => match (cfg.yp0, conic_path(cfg)) {
            (Some(yp), _) => Ok((cfg.x0, vec![cfg.y0, yp])),
            (None, Some(path)) => yp_from_conic(&Branch::of(&path?)),
            (None, None) => unreachable!("validated config"),
        },
        Order::Third => Ok((
            cfg.x0,
            vec![cfg.y0, cfg.yp0.unwrap_or(0.0), cfg.ypp0.unwrap_or(0.0)],
        )),
    }
}

fn run_invariant(cfg: &ExperimentConfig, ode: &InvariantOde) -> MethodOutcome {
    let state = match (conic_path(cfg), cfg.yp0) {
        (Some(path), _) => path.and_then(|p| bootstrap_from_conic(&p, cfg.c.unwrap_or(0.0), cfg.h)),
        (None, Some(yp0)) => bootstrap(
            ode,
            &InitialData {
                x0: cfg.x0,
                y0: cfg.y0,
                yp0,
                ypp0: cfg.ypp0,
            },
            cfg.h,
        ),
        (None, None) => unreachable!("validated config"),
    };
    let state = match state {
        Ok(s) => s,
        Err(e) => return MethodOutcome::failed(Method::Invariant, e),
    };
    let (lo, hi) = cfg.x_window();
    let stop = StopRule {
        max_steps: cfg.max_steps,
        x_min: lo,
        x_max: hi,
    };
    let (traj, seconds) = run_scheme_timed(state, &stop);
    MethodOutcome {
        method: Method::Invariant,
        steps: traj.diagnostics.len(),
        trajectory: Ok(traj),
        step_seconds: seconds,
    }
}

fn run_fd(cfg: &ExperimentConfig, ode: &InvariantOde) -> MethodOutcome {
    let width = ode.order().as_u8() as usize;
    let mesh = match UniformMesh::new(cfg.x0, cfg.h) {
        Ok(m) => m,
        Err(e) => return MethodOutcome::failed(Method::StandardFd, e),
    };
    let seeds: Result<Vec<f64>, NumericError> = match conic_path(cfg) {
        Some(path) => path.and_then(|p| {
            let b = Branch::of(&p);
            (0..width)
                .map(|i| {
                    b.y(mesh.node(i)).ok_or_else(|| {
                        NumericError::domain(crate::types::Location::X(mesh.node(i)), "seed outside the conic")
                    })
                })
                .collect()
        }),
        None => classical_start(cfg).and_then(|(x0, s0)| {
            (0..width).map(|i| reference_y(ode, x0, &s0, mesh.node(i))).collect()
        }),
    };
    match seeds {
        Ok(seeds) => {
            let run = run_standard_fd(ode, &mesh, &seeds, cfg.max_steps, cfg.x_window().1);
            MethodOutcome {
                method: Method::StandardFd,
                steps: run.iterations.len(),
                trajectory: Ok(run.trajectory),
                step_seconds: run.step_seconds,
            }
        }
        Err(e) => MethodOutcome::failed(Method::StandardFd, e),
    }
}

fn run_rk45(cfg: &ExperimentConfig, ode: &InvariantOde) -> MethodOutcome {
    let (x0, state0) = match classical_start(cfg) {
        Ok(s) => s,
        Err(e) => return MethodOutcome::failed(Method::Rk45, e),
    };
    let mut opts = Rk45Options::new(RK_REL_TOL, RK_ABS_TOL);
    opts.max_steps = cfg.max_steps.max(1);
    opts.time_steps = true;
    let run = rk45_integrate_with(&ode.system(), x0, &state0, cfg.x_window().1, &opts);
    let mut traj = run.to_trajectory();
    if run.failure.is_none() && run.accepted >= opts.max_steps {
        traj.halt = HaltReason::MaxSteps;
    }
    MethodOutcome {
        method: Method::Rk45,
        steps: run.accepted,
        trajectory: Ok(traj),
        step_seconds: run.step_seconds,
    }
}

/// Runs one method without touching the file system.
pub fn execute_method(cfg: &ExperimentConfig, method: Method) -> Result<MethodOutcome, HarnessError> {
    cfg.validate()?;
    let ode = ode_of(cfg)?;
    Ok(match method {
        Method::Invariant => run_invariant(cfg, &ode),
        Method::StandardFd => run_fd(cfg, &ode),
        Method::Rk45 => run_rk45(cfg, &ode),
    })
}

fn halt_x(traj: &Trajectory) -> Option<f64> {
    match &traj.halt {
        HaltReason::Error(e) => e.x().or(traj.last_x()),
        _ => traj.last_x(),
    }
}

fn report_for(cfg: &ExperimentConfig, outcome: &MethodOutcome, file: Option<String>) -> MethodReport {
    let traj = match &outcome.trajectory {
        Ok(t) => t,
        Err(e) => {
            return MethodReport {
                method: outcome.method,
                trajectory_file: None,
                points: 0,
                steps: 0,
                halt_reason: format!("{:?}", e.kind),
                numeric_error: true,
                halt_detail: Some(e.detail.clone()),
                halt_x: e.x(),
                max_conic_distance: None,
                winding_angle: None,
                invariant_drift: None,
                mesh_drift: None,
                reference_error: None,
                singularity: None,
                seconds_per_step: None,
            }
        }
    };
    let path = conic_path(cfg).and_then(Result::ok);
    let pts = &traj.points;
    let (conic_dist, winding) = match &path {
        Some(p) => {
            let winding = match p.conic {
                ExactConic::Circle(c) => Some(winding_angle(pts, &Point2::new(c.cx, c.cy))),
                ExactConic::Hyperbola(_) => None,
            };
            (Some(max_conic_distance(&p.conic, pts)), winding)
        }
        None => (None, None),
    };
    // The invariant scheme leaves the graph branch by design.
    let reference_error = path.as_ref().filter(|_| outcome.method != Method::Invariant).map(|p| {
        let b = Branch::of(p);
        pts.iter()
            .filter_map(|q| b.y(q.x).map(|y| (q.y - y).abs()))
            .fold(0.0, f64::max)
    });
    let drift = match (cfg.order(), cfg.c, cfg.forcing()) {
        (Order::Second, Some(c), _) => Some(order2_drift(cfg.realization, pts, c)),
        (Order::Third, _, Some(f)) => Some(order3_drift(cfg.realization, pts, &f)),
        _ => None,
    };
    let detail = match &traj.halt {
        HaltReason::Error(e) => Some(e.detail.clone()),
        _ => None,
    };
    MethodReport {
        method: outcome.method,
        trajectory_file: file,
        points: pts.len(),
        steps: outcome.steps,
        halt_reason: traj.halt.label(),
        numeric_error: traj.halt.is_error(),
        halt_detail: detail,
        halt_x: halt_x(traj),
        max_conic_distance: conic_dist,
        winding_angle: winding,
        invariant_drift: drift,
        mesh_drift: (outcome.method == Method::Invariant).then(|| mesh_drift(cfg.realization, pts)),
        reference_error,
        singularity: detect_singularity(traj),
        seconds_per_step: median(&outcome.step_seconds),
    }
}

fn output_dir(cfg: &ExperimentConfig, opts: &RunOptions) -> PathBuf {
    opts.out_dir
        .clone()
        .or_else(|| cfg.output.clone())
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn cost_comparison(cost: &BTreeMap<String, f64>) -> Option<CostComparison> {
    let inv = *cost.get(Method::Invariant.name())?;
    let fd = *cost.get(Method::StandardFd.name())?;
    Some(CostComparison {
        invariant: inv,
        standard_fd: fd,
        invariant_cheaper: inv <= fd,
    })
}

fn surviving_cost(outcome: &MethodOutcome) -> Option<f64> {
    if outcome.trajectory.is_ok() && outcome.steps > 0 {
        median(&outcome.step_seconds)
    } else {
        None
    }
}

/// Median seconds per step for every requested method that took a step.
pub fn benchmark_step_cost(cfg: &ExperimentConfig) -> Result<BTreeMap<String, f64>, HarnessError> {
    let mut out = BTreeMap::new();
    for &m in &cfg.methods {
        let outcome = execute_method(cfg, m)?;
        if let Some(s) = surviving_cost(&outcome) {
            out.insert(m.name().to_string(), s);
        }
    }
    Ok(out)
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunReport, HarnessError> {
    run_experiment_with(cfg, &RunOptions::default())
}

/// Runs every requested method in turn, writing `<name>_<method>.csv` and
/// `<name>_report.json` into the output directory.
pub fn run_experiment_with(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<RunReport, HarnessError> {
    cfg.validate()?;
    let dir = output_dir(cfg, opts);
    std::fs::create_dir_all(&dir)?;
    let mut methods = Vec::new();
    let mut step_cost = BTreeMap::new();
    for &m in &cfg.methods {
        let outcome = execute_method(cfg, m)?;
        let file = match &outcome.trajectory {
            Ok(traj) => {
                let name = format!("{}_{}.csv", cfg.name, m.name());
                write_trajectory_csv(&dir.join(&name), traj, m == Method::Invariant)?;
                Some(name)
            }
            Err(_) => None,
        };
        if let Some(s) = surviving_cost(&outcome) {
            step_cost.insert(m.name().to_string(), s);
        }
        methods.push(report_for(cfg, &outcome, file));
    }
    let report = RunReport {
        name: cfg.name.clone(),
        config: cfg.clone(),
        seed: opts.seed,
        output_dir: dir.display().to_string(),
        methods,
        cost_comparison: cost_comparison(&step_cost),
        step_cost,
    };
    let json = serde_json::to_string_pretty(&report)?;
    std::fs::write(report_path(&dir, &cfg.name), json)?;
    Ok(report)
}

fn report_path(dir: &Path, name: &str) -> PathBuf {
    dir.join(format!("{name}_report.json"))
}
