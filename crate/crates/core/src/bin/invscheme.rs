//! Command-line front end for the experiment harness.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use invscheme::harness::{
    builtin_experiment, builtin_experiments, run_experiment_with, ExperimentConfig, HarnessError,
    Method, RunOptions,
};
use invscheme::invariants::{j1, signed_j1, signed_j2, two_point, DiscreteInvariantTriple};
use invscheme::{Point2, Realization};

const EXIT_CONFIG: u8 = 1;
const EXIT_ALL_FAILED: u8 = 2;

#[derive(Parser)]
#[command(name = "invscheme", version, about = "Invariant difference schemes and baselines")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a builtin experiment (fig1..fig4) or a JSON config file.
    Run {
        target: String,
        #[arg(long)]
        h: Option<f64>,
        #[arg(long)]
        max_steps: Option<usize>,
        /// Output directory (default: $INVSCHEME_OUT, then ./out).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Comma-separated subset of invariant,standardFD,rk45.
        #[arg(long, value_delimiter = ',')]
        methods: Option<Vec<Method>>,
        /// Recorded in the report; runs are deterministic.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// List the builtin experiments.
    List,
    /// Check a JSON config file.
    Validate { config: PathBuf },
    /// Evaluate discrete invariants of 2 to 4 points given as "x,y;x,y;...".
    Invariants {
        #[arg(long)]
        realization: Realization,
        #[arg(long)]
        points: String,
    },
}

fn load_target(target: &str) -> Result<ExperimentConfig, HarnessError> {
    match builtin_experiment(target) {
        Some(cfg) => Ok(cfg),
        None if Path::new(target).exists() => ExperimentConfig::from_file(Path::new(target)),
        None => Err(HarnessError::Config(format!(
            "`{target}` is neither a builtin experiment nor a config file"
        ))),
    }
}

fn parse_points(text: &str) -> Result<Vec<Point2>, String> {
    text.split(';')
        .filter(|s| !s.trim().is_empty())
        .map(|pair| {
            let mut it = pair.split(',').map(|v| v.trim().parse::<f64>());
            match (it.next(), it.next(), it.next()) {
                (Some(Ok(x)), Some(Ok(y)), None) => Ok(Point2::new(x, y)),
                _ => Err(format!("bad point `{pair}`, expected x,y")),
            }
        })
        .collect()
}

fn invariants_json(r: Realization, pts: &[Point2]) -> Result<serde_json::Value, String> {
    if !(2..=4).contains(&pts.len()) {
        return Err(format!("need 2 to 4 points, got {}", pts.len()));
    }
    let err = |e: invscheme::NumericError| e.to_string();
    let pairs: Vec<f64> = pts
        .windows(2)
        .map(|w| two_point(r, &w[0], &w[1]))
        .collect::<Result<_, _>>()
        .map_err(err)?;
    let mut out = json!({ "realization": r.name(), "consecutive": pairs });
    if pts.len() >= 3 {
        let t = DiscreteInvariantTriple::from_points(r, &pts[0], &pts[1], &pts[2]).map_err(err)?;
        out["outer"] = json!(t.i2n1);
        out["J1"] = json!(j1(r, &t).map_err(err)?);
        out["signedJ1"] = json!(signed_j1(r, &pts[0], &pts[1], &pts[2]).map_err(err)?);
    }
    if pts.len() == 4 {
        out["signedJ2"] = json!(signed_j2(r, &[pts[0], pts[1], pts[2], pts[3]]).map_err(err)?);
    }
    Ok(out)
}

fn run(cli: Cli) -> Result<u8, HarnessError> {
    match cli.command {
        Command::List => {
            for cfg in builtin_experiments() {
                println!("{}", cfg.name);
            }
            Ok(0)
        }
        Command::Validate { config } => {
            let cfg = ExperimentConfig::from_file(&config)?;
            println!("{}: ok", cfg.name);
            Ok(0)
        }
        Command::Invariants { realization, points } => {
            let value = parse_points(&points)
                .and_then(|p| invariants_json(realization, &p))
                .map_err(HarnessError::Config)?;
            println!("{}", serde_json::to_string_pretty(&value)?);
            Ok(0)
        }
        Command::Run {
            target,
            h,
            max_steps,
            out,
            methods,
            seed,
        } => {
            let mut cfg = load_target(&target)?;
            if let Some(h) = h {
                cfg.h = h;
            }
            if let Some(n) = max_steps {
                cfg.max_steps = n;
            }
            if let Some(m) = methods {
                cfg.methods = m;
            }
            cfg.validate()?;
            let report = run_experiment_with(&cfg, &RunOptions { seed, out_dir: out })?;
            for m in &report.methods {
                println!(
                    "{:<11} {:>6} points  halt={} x={}  file={}",
                    m.method.name(),
                    m.points,
                    m.halt_reason,
                    m.halt_x.map_or("-".into(), |x| format!("{x:.6}")),
                    m.trajectory_file.as_deref().unwrap_or("-"),
                );
            }
            if let Some(c) = &report.cost_comparison {
                println!(
                    "step cost: invariant {:.3e} s, standardFD {:.3e} s (invariant cheaper: {})",
                    c.invariant, c.standard_fd, c.invariant_cheaper
                );
            }
            println!("report: {}", Path::new(&report.output_dir).join(format!("{}_report.json", report.name)).display());
            Ok(if report.all_failed() { EXIT_ALL_FAILED } else { 0 })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_CONFIG)
        }
    }
}
