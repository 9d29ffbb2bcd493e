//! Library side of the `conmult` command-line tool.

pub mod battery;
mod commands;
mod problem_file;

use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use conic_multipliers::cones::ConeError;
use conic_multipliers::kkt::KktError;
use conic_multipliers::penalty::SolveError;
use conic_multipliers::problem::ProblemError;
use serde::Serialize;
use thiserror::Error;

pub use commands::{
    cmd_check, cmd_cone_test, cmd_grad_test, cmd_replay, cmd_solve, CheckResult, ReplaySummary, RunResult,
    RunStatus,
};
pub use problem_file::ProblemFile;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("file not found: {0}")]
    NotFound(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: String,
        #[source]
        source: serde_json::Error,
    },
    #[error("cannot write trace {path}: {source}")]
    Trace {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Kkt(#[from] KktError),
    #[error(transparent)]
    Cone(#[from] ConeError),
}

/// A comma-separated vector such as `-1,-1` or `0.5`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Point(pub Vec<f64>);

impl FromStr for Point {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.split(',')
            .map(|part| {
                let part = part.trim();
                match part.parse::<f64>() {
                    Ok(v) if v.is_finite() => Ok(v),
                    _ => Err(format!("not a finite decimal: {part:?}")),
                }
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Point)
    }
}

#[derive(Debug, Parser)]
#[command(name = "conmult", version, about = "Conic-constrained optimization by the quadratic penalty method")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args)]
pub struct GlobalArgs {
    /// KKT tolerance (residuals are compared with tol·(1 + ‖∇f‖))
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Write a CSV trace here, plus a JSON sidecar with the same stem
    #[arg(long, global = true, value_name = "PATH")]
    pub trace: Option<PathBuf>,
    /// Print the JSON result only
    #[arg(long, global = true)]
    pub json: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the penalty method from x0
    Solve(SolveArgs),
    /// Run the penalized sequence anchored at a known solution
    Replay(ReplayArgs),
    /// Evaluate KKT residuals and regularity at a given (x, λ)
    Check(CheckArgs),
    /// Property battery for a cone's projections
    ConeTest(ConeTestArgs),
    /// Dual-number gradients against finite differences
    GradTest(GradTestArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct PenaltyArgs {
    #[arg(long)]
    pub k0: Option<f64>,
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long)]
    pub max_outer: Option<usize>,
    #[arg(long)]
    pub inner_tol: Option<f64>,
    #[arg(long)]
    pub inner_max_iter: Option<usize>,
    #[arg(long)]
    pub prox_weight: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    pub file: PathBuf,
    /// Starting point (defaults to the file's x0, then the origin)
    #[arg(long, allow_hyphen_values = true)]
    pub x0: Option<Point>,
    #[command(flatten)]
    pub penalty: PenaltyArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ReplayArgs {
    pub file: PathBuf,
    /// Anchor point (defaults to the file's known_solution)
    #[arg(long, allow_hyphen_values = true)]
    pub xbar: Option<Point>,
    /// Ball radius around the anchor
    #[arg(long)]
    pub delta: Option<f64>,
    #[command(flatten)]
    pub penalty: PenaltyArgs,
}

#[derive(Debug, Clone, Args)]
pub struct CheckArgs {
    pub file: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    pub x: Point,
    /// Multiplier in cone coordinates (svec order for PSD blocks)
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Point,
}

#[derive(Debug, Clone, Args)]
pub struct ConeTestArgs {
    /// Descriptor such as `lorentz:3`, `zero:1,nonpos:2` or a JSON object
    #[arg(long)]
    pub cone: String,
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
}

#[derive(Debug, Clone, Args)]
pub struct GradTestArgs {
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn points_parse() {
        assert_eq!("-1,-1".parse::<Point>().unwrap(), Point(vec![-1.0, -1.0]));
        assert_eq!(" 0.5 ".parse::<Point>().unwrap(), Point(vec![0.5]));
        assert!("1,,2".parse::<Point>().is_err());
        assert!("nan".parse::<Point>().is_err());
    }

    #[test]
    fn hyphenated_vectors_are_values() {
        let cli = Cli::try_parse_from(["conmult", "check", "p.json", "--x", "-1,-1", "--lambda", "-0.5"]).unwrap();
        let Command::Check(args) = cli.command else {
            panic!("expected check");
        };
        assert_eq!(args.x, Point(vec![-1.0, -1.0]));
        assert_eq!(args.lambda, Point(vec![-0.5]));
    }

    #[test]
    fn global_flags_after_subcommand() {
        let cli = Cli::try_parse_from(["conmult", "solve", "p.json", "--json", "--tol", "1e-5"]).unwrap();
        assert!(cli.global.json);
        assert_eq!(cli.global.tol, Some(1e-5));
    }
}
