use serde::Serialize;

use super::{
    make_record, multiplier_growth_suspect, solve_inner, InnerError, InnerOptions, IterateRecord, Penalized,
    SolveError, SolverConfig, DIVERGENCE_WINDOW,
};
use crate::kkt::{kkt_residuals, KktReport};
use crate::linalg::norm;
use crate::problem::Problem;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    /// The KKT residuals passed at `kkt_tol`.
    Converged,
    /// The outer budget ran out; the best iterate is returned.
    NoConverge,
    /// Multiplier estimates grew like a power of `k`: constraint
    /// regularity probably fails at the limit point.
    RegularitySuspect,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveOutcome {
    pub x: Vec<f64>,
    pub lambda: Vec<f64>,
    pub status: SolveStatus,
    pub kkt: KktReport,
    pub trace: Vec<IterateRecord>,
}

/// Runs the penalty method from `x0`.
///
/// Each subproblem is anchored at the previous iterate with weight
/// `cfg.prox_weight` and warm-started there. The penalty weight starts at
/// `cfg.k0` and is multiplied by `cfg.rho` after every outer iteration whose
/// feasibility or complementarity residual still exceeds the KKT tolerance. The loop stops as soon as the
/// KKT residuals of `(xᵏ, λᵏ)` pass at `cfg.kkt_tol`, or when the multiplier
/// estimates show sustained growth. Otherwise, or when a late subproblem
/// can no longer be resolved in floating point, the iterate with the
/// smallest KKT residual is returned with [`SolveStatus::NoConverge`].
pub fn solve(p: &Problem, x0: &[f64], cfg: &SolverConfig) -> Result<SolveOutcome, SolveError> {
    cfg.validate()?;
    p.check_point(x0, "x0")?;

    let mut x = x0.to_vec();
    let mut trace: Vec<IterateRecord> = Vec::with_capacity(cfg.max_outer);
    let mut norms = Vec::with_capacity(cfg.max_outer);
    let mut best: Option<(usize, KktReport)> = None;

    let mut k = cfg.k0;
    for _ in 0..cfg.max_outer {
        let anchor = x.clone();
        let phi = Penalized {
            problem: p,
            anchor: &anchor,
            k,
            prox_weight: cfg.prox_weight,
        };
        let opts = InnerOptions {
            tol: cfg.inner_tol_for(k),
            max_iter: cfg.inner_max_iter,
        };
        let inner = match solve_inner(|y| phi.value_and_grad(y), &x, &opts, None) {
            Ok(inner) => inner,
            // past the first weight a failed line search means the
            // subproblem is beyond floating-point resolution
            Err(InnerError::LineSearch { .. }) if !trace.is_empty() => break,
            Err(source) => return Err(SolveError::Inner { k, source }),
        };
        let record = make_record(p, &anchor, k, cfg.prox_weight, &inner, None)?;
        let report = kkt_residuals(p, &record.x, &record.lambda, cfg.kkt_tol)?;
        x.clone_from(&record.x);
        norms.push(norm(&record.lambda));
        trace.push(record);

        // The weight grows while feasibility or complementarity (which is
        // ‖λ‖ times the violation) is out of tolerance. When only
        // stationarity is short, proximal steps at fixed k finish the job
        // without worsening the conditioning.
        let (_, grad_f) = p.f_and_grad(&x)?;
        let threshold = cfg.kkt_tol * (1.0 + norm(&grad_f));
        if report.feasibility > threshold || report.complementarity > threshold {
            k *= cfg.rho;
        }

        let idx = trace.len() - 1;
        if best.as_ref().is_none_or(|(_, b)| report.max_residual() < b.max_residual()) {
            best = Some((idx, report.clone()));
        }
        if report.pass {
            return Ok(finish(trace, idx, report, SolveStatus::Converged));
        }
        if multiplier_growth_suspect(&norms, cfg.rho, DIVERGENCE_WINDOW) {
            return Ok(finish(trace, idx, report, SolveStatus::RegularitySuspect));
        }
    }

    let (idx, report) = best.expect("at least one outer iteration");
    Ok(finish(trace, idx, report, SolveStatus::NoConverge))
}

fn finish(trace: Vec<IterateRecord>, idx: usize, kkt: KktReport, status: SolveStatus) -> SolveOutcome {
    SolveOutcome {
        x: trace[idx].x.clone(),
        lambda: trace[idx].lambda.clone(),
        status,
        kkt,
        trace,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cones::Cone;

    #[test]
    fn circle_from_origin() {
        let p = Problem::parse("eq-circle", 2, "x1 + x2", &["x1^2 + x2^2 - 2"], Cone::Zero(1)).unwrap();
        let out = solve(&p, &[0.0, 0.0], &SolverConfig::default()).unwrap();
        assert_eq!(out.status, SolveStatus::Converged, "{:?}", out.kkt);
        assert!((out.x[0] + 1.0).abs() < 1e-5 && (out.x[1] + 1.0).abs() < 1e-5);
        assert!((out.lambda[0] - 0.5).abs() < 1e-5);
    }

    #[test]
    fn squared_constraint_is_flagged() {
        let p = Problem::parse("licq-fail", 1, "x1", &["x1^2"], Cone::Zero(1)).unwrap();
        let out = solve(&p, &[1.0], &SolverConfig::default()).unwrap();
        assert_eq!(out.status, SolveStatus::RegularitySuspect);
    }

    #[test]
    fn tiny_budget_reports_no_convergence() {
        let p = Problem::parse("eq-circle", 2, "x1 + x2", &["x1^2 + x2^2 - 2"], Cone::Zero(1)).unwrap();
        let cfg = SolverConfig {
            max_outer: 1,
            ..SolverConfig::default()
        };
        let out = solve(&p, &[0.0, 0.0], &cfg).unwrap();
        assert_eq!(out.status, SolveStatus::NoConverge);
        assert_eq!(out.trace.len(), 1);
    }
}
