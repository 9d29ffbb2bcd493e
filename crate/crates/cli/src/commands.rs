use conic_multipliers::kkt::{
    conic_regularity_check, kkt_residuals, licq_check, ConicCheckOptions, KktReport, RegularityReport,
    DEFAULT_KKT_TOL, DEFAULT_RANK_TOL,
};
use conic_multipliers::linalg::{dist, norm};
use conic_multipliers::penalty::{replay, solve, trace, IterateRecord, SolveStatus};
use conic_multipliers::{Cone, SolverConfig};
use serde::Serialize;

use crate::battery::{cone_battery, grad_battery, ConeBatteryReport, GradBatteryReport};
use crate::{CheckArgs, CliError, ConeTestArgs, GlobalArgs, GradTestArgs, PenaltyArgs, ProblemFile, ReplayArgs, SolveArgs};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunStatus {
    Ok,
    NoConverge,
    RegularitySuspect,
    Error,
}

impl RunStatus {
    pub fn exit_code(self) -> i32 {
        match self {
            RunStatus::Ok => 0,
            RunStatus::Error => 1,
            RunStatus::NoConverge => 2,
            RunStatus::RegularitySuspect => 3,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunResult {
    pub status: RunStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub problem: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kkt: Option<KktReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub outer_iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub replay: Option<ReplaySummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

impl RunResult {
    pub fn error(err: &CliError) -> RunResult {
        RunResult {
            status: RunStatus::Error,
            problem: None,
            x: None,
            lambda: None,
            kkt: None,
            trace: None,
            outer_iterations: None,
            replay: None,
            message: Some(err.to_string()),
        }
    }

    pub fn exit_code(&self) -> i32 {
        self.status.exit_code()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ReplaySummary {
    pub xbar: Vec<f64>,
    pub delta: f64,
    pub penalty_weights: Vec<f64>,
    pub multiplier_norms: Vec<f64>,
    pub multiplier_diverging: bool,
    pub all_interior: bool,
    /// `max_k φ_k(xᵏ) − f(x̄)`
    pub max_phi_excess: f64,
    /// `‖xᵏ − x̄‖` at the last weight.
    pub x_error: f64,
    /// `‖λᵏ − λ*‖` at the last weight, when the file records `λ*`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda_error: Option<f64>,
}

fn configure(base: SolverConfig, penalty: &PenaltyArgs, global: &GlobalArgs) -> SolverConfig {
    let mut cfg = base;
    if let Some(v) = penalty.k0 {
        cfg.k0 = v;
    }
    if let Some(v) = penalty.rho {
        cfg.rho = v;
    }
    if let Some(v) = penalty.max_outer {
        cfg.max_outer = v;
    }
    if let Some(v) = penalty.inner_tol {
        cfg.inner_tol = v;
    }
    if let Some(v) = penalty.inner_max_iter {
        cfg.inner_max_iter = v;
    }
    if let Some(v) = penalty.prox_weight {
        cfg.prox_weight = v;
    }
    cfg.kkt_tol = global.tol.unwrap_or(DEFAULT_KKT_TOL);
    cfg.seed = global.seed;
    cfg
}

fn write_trace(global: &GlobalArgs, records: &[IterateRecord]) -> Result<Option<String>, CliError> {
    let Some(path) = &global.trace else {
        return Ok(None);
    };
    trace::write_trace(path, records).map_err(|source| CliError::Trace {
        path: path.display().to_string(),
        source,
    })?;
    Ok(Some(path.display().to_string()))
}

/// `solve FILE`: penalty method from `--x0`, the file's `x0`, or the origin.
pub fn cmd_solve(args: &SolveArgs, global: &GlobalArgs) -> Result<RunResult, CliError> {
    let file = ProblemFile::load(&args.file)?;
    let p = file.to_problem()?;
    let cfg = configure(SolverConfig::default(), &args.penalty, global);
    let x0 = match (&args.x0, &file.x0) {
        (Some(x), _) => x.0.clone(),
        (None, Some(x)) => x.clone(),
        (None, None) => vec![0.0; p.n()],
    };
    let out = solve(&p, &x0, &cfg)?;
    let trace = write_trace(global, &out.trace)?;
    let status = match out.status {
        SolveStatus::Converged => RunStatus::Ok,
        SolveStatus::NoConverge => RunStatus::NoConverge,
        SolveStatus::RegularitySuspect => RunStatus::RegularitySuspect,
    };
    let message = match status {
        RunStatus::RegularitySuspect => Some(
            "multiplier estimates grow without bound; constraint regularity likely fails at the limit point".into(),
        ),
        RunStatus::NoConverge => Some(format!(
            "KKT residuals did not reach tol after {} outer iterations; best iterate returned",
            out.trace.len()
        )),
        _ => None,
    };
    Ok(RunResult {
        status,
        problem: Some(p.name().to_string()),
        outer_iterations: Some(out.trace.len()),
        x: Some(out.x),
        lambda: Some(out.lambda),
        kkt: Some(out.kkt),
        trace,
        replay: None,
        message,
    })
}

/// `replay FILE`: the penalized sequence around `--xbar` or the file's
/// known solution.
pub fn cmd_replay(args: &ReplayArgs, global: &GlobalArgs) -> Result<RunResult, CliError> {
    let file = ProblemFile::load(&args.file)?;
    let p = file.to_problem()?;
    let mut cfg = configure(SolverConfig::replay_default(), &args.penalty, global);
    if let Some(d) = args.delta.or(file.delta) {
        cfg.delta = d;
    }
    let xbar = match (&args.xbar, p.known_solution()) {
        (Some(x), _) => x.0.clone(),
        (None, Some(x)) => x.to_vec(),
        (None, None) => {
            return Err(CliError::Usage(
                "replay needs --xbar or a known_solution in the problem file".into(),
            ))
        }
    };
    let out = replay(&p, &xbar, &cfg)?;
    let trace = write_trace(global, &out.records)?;
    let last = out.last();
    let kkt = kkt_residuals(&p, &last.x, &last.lambda, cfg.kkt_tol)?;
    let lambda_error = p.known_multiplier().map(|l| dist(&last.lambda, l));

    let (status, message) = if out.multiplier_diverging {
        (
            RunStatus::RegularitySuspect,
            Some("multiplier estimates grow without bound; no multiplier exists at xbar or regularity fails".into()),
        )
    } else if kkt.pass {
        (RunStatus::Ok, None)
    } else {
        (
            RunStatus::NoConverge,
            Some("final iterate does not satisfy the KKT residuals at tol".into()),
        )
    };
    let message = match (message, out.all_interior) {
        (m, true) => m,
        (None, false) => Some("some iterates reached the ball boundary; consider a larger delta".into()),
        (Some(m), false) => Some(format!("{m}; some iterates reached the ball boundary")),
    };

    Ok(RunResult {
        status,
        problem: Some(p.name().to_string()),
        x: Some(last.x.clone()),
        lambda: Some(last.lambda.clone()),
        kkt: Some(kkt),
        trace,
        outer_iterations: Some(out.records.len()),
        replay: Some(ReplaySummary {
            x_error: dist(&last.x, &xbar),
            lambda_error,
            xbar,
            delta: cfg.delta,
            penalty_weights: out.records.iter().map(|r| r.k).collect(),
            multiplier_norms: out.records.iter().map(|r| norm(&r.lambda)).collect(),
            multiplier_diverging: out.multiplier_diverging,
            all_interior: out.all_interior,
            max_phi_excess: out.max_phi_excess,
        }),
        message,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub problem: String,
    pub kkt: KktReport,
    /// Present for equality-constrained problems only.
    pub licq: Option<RegularityReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub licq_note: Option<String>,
    pub conic: RegularityReport,
}

impl CheckResult {
    pub fn exit_code(&self) -> i32 {
        if self.kkt.pass {
            0
        } else {
            2
        }
    }
}

/// `check FILE --x .. --lambda ..`
pub fn cmd_check(args: &CheckArgs, global: &GlobalArgs) -> Result<CheckResult, CliError> {
    let file = ProblemFile::load(&args.file)?;
    let p = file.to_problem()?;
    let x = &args.x.0;
    let lambda = &args.lambda.0;
    let kkt = kkt_residuals(&p, x, lambda, global.tol.unwrap_or(DEFAULT_KKT_TOL))?;
    let (licq, licq_note) = if p.cone().is_zero_cone() {
        (Some(licq_check(&p, x, DEFAULT_RANK_TOL)?), None)
    } else {
        (None, Some(format!("LICQ applies to equality constraints only; cone is {}", p.cone())))
    };
    let conic = conic_regularity_check(
        &p,
        x,
        &ConicCheckOptions {
            seed: global.seed,
            ..ConicCheckOptions::default()
        },
    )?;
    Ok(CheckResult {
        problem: p.name().to_string(),
        kkt,
        licq,
        licq_note,
        conic,
    })
}

/// `cone-test --cone DESC`
pub fn cmd_cone_test(args: &ConeTestArgs, global: &GlobalArgs) -> Result<ConeBatteryReport, CliError> {
    let cone: Cone = args.cone.parse()?;
    Ok(cone_battery(&cone, args.samples, global.seed)?)
}

/// `grad-test`
pub fn cmd_grad_test(args: &GradTestArgs, global: &GlobalArgs) -> Result<GradBatteryReport, CliError> {
    Ok(grad_battery(args.samples, global.seed))
}
