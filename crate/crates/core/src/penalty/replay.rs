use serde::Serialize;

use super::{
    make_record, multiplier_growth_suspect, solve_inner, IterateRecord, InnerOptions, Penalized,
    SolveError, SolverConfig, DIVERGENCE_WINDOW,
};
use crate::linalg::{dist, norm};
use crate::problem::{Problem, FEASIBILITY_TOL};

/// The penalized sequence around a known local solution.
#[derive(Debug, Clone, Serialize)]
pub struct ReplayOutcome {
    pub xbar: Vec<f64>,
    pub f_xbar: f64,
    pub records: Vec<IterateRecord>,
    /// `‖λᵏ‖` grows like a power of `k` over the last outer steps.
    pub multiplier_diverging: bool,
    /// Every `xᵏ` lies strictly inside the ball `‖x − x̄‖ < δ`.
    pub all_interior: bool,
    /// `max_k φ_k(xᵏ) − f(x̄)`; nonpositive up to the inner tolerance.
    pub max_phi_excess: f64,
}

impl ReplayOutcome {
    pub fn last(&self) -> &IterateRecord {
        self.records.last().expect("replay runs at least one outer iteration")
    }

    pub fn multiplier_norms(&self) -> Vec<f64> {
        self.records.iter().map(|r| norm(&r.lambda)).collect()
    }
}

/// Runs the penalized sequence anchored at a feasible point `x̄`.
///
/// For `k = k0, k0·ρ, …` (`max_outer` weights) it minimizes
/// `f(x) + ½‖x − x̄‖² + (k/2)·‖Π_{K°}(h(x))‖²` over `‖x − x̄‖ ≤ δ` by projected
/// gradient and records `xᵏ` and `λᵏ = k·Π_{K°}(h(xᵏ))`. The proximal weight is
/// always 1 here, whatever `cfg.prox_weight` says.
///
/// Each subproblem starts from whichever of `x̄` and the previous iterate has
/// the lower `φ_k`, so descent keeps `φ_k(xᵏ) ≤ φ_k(x̄) = f(x̄)`. The
/// minimizer found is a stationary point, not a certified global one.
pub fn replay(p: &Problem, xbar: &[f64], cfg: &SolverConfig) -> Result<ReplayOutcome, SolveError> {
    cfg.validate()?;
    p.check_point(xbar, "xbar")?;
    let dist_feas = p.constraint_violation(xbar)?;
    if dist_feas > FEASIBILITY_TOL {
        return Err(SolveError::InfeasibleAnchor { dist: dist_feas });
    }
    let f_xbar = p.f(xbar)?;

    let radius = cfg.delta;
    let ball = |x: &mut [f64]| {
        let d = dist(x, xbar);
        if d > radius {
            let shrink = radius / d;
            for (xi, ci) in x.iter_mut().zip(xbar) {
                *xi = ci + (*xi - ci) * shrink;
            }
        }
    };

    let mut records = Vec::with_capacity(cfg.max_outer);
    let mut x = xbar.to_vec();
    let mut max_phi_excess = f64::NEG_INFINITY;
    for i in 0..cfg.max_outer {
        let k = cfg.penalty_weight(i);
        let phi = Penalized {
            problem: p,
            anchor: xbar,
            k,
            prox_weight: 1.0,
        };
        let at = |x: &[f64]| phi.value_and_grad(x).map_err(|source| SolveError::Inner { k, source });
        let start = if at(&x)?.0 <= f_xbar { x.clone() } else { xbar.to_vec() };

        let opts = InnerOptions {
            tol: cfg.inner_tol_for(k),
            max_iter: cfg.inner_max_iter,
        };
        let inner = solve_inner(|y| phi.value_and_grad(y), &start, &opts, Some(&ball))
            .map_err(|source| SolveError::Inner { k, source })?;

        let interior = dist(&inner.x, xbar) < radius * (1.0 - 1e-6);
        let record = make_record(p, xbar, k, 1.0, &inner, Some(interior))?;
        max_phi_excess = max_phi_excess.max(record.phi - f_xbar);
        x.clone_from(&inner.x);
        records.push(record);
    }

    let norms: Vec<f64> = records.iter().map(|r| norm(&r.lambda)).collect();
    Ok(ReplayOutcome {
        xbar: xbar.to_vec(),
        f_xbar,
        multiplier_diverging: multiplier_growth_suspect(&norms, cfg.rho, DIVERGENCE_WINDOW),
        all_interior: records.iter().all(|r| r.interior == Some(true)),
        max_phi_excess,
        records,
    })
}
