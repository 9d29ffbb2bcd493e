//! Quadratic penalty method with multiplier recovery.
//!
//! For a penalty weight `k` the subproblem is
//!
//! ```text
//! φ_k(x) = f(x) + (w/2)‖x − a‖² + (k/2)·‖Π_{K°}(h(x))‖²
//! ```
//!
//! with anchor `a` and proximal weight `w`. At a stationary point of `φ_k`
//!
//! ```text
//! ∇f(x) + w(x − a) + Dh(x)ᵀλ = 0,   λ = k·Π_{K°}(h(x)) ∈ K°,
//! ```
//!
//! so `λ` is a multiplier estimate that is dual feasible by construction
//! and complementary to `Π_K(h(x))`.
//!
//! Two drivers are provided. [`replay`] anchors every subproblem at a known
//! local solution `x̄` and restricts it to a ball around `x̄`, reproducing
//! the constructive existence argument step by step. [`solve`] anchors each
//! subproblem at the previous iterate and stops on the KKT residuals.

mod inner;
mod replay;
mod solve;
pub mod trace;

use serde::Serialize;
use thiserror::Error;

pub use inner::{solve_inner, InnerError, InnerOptions, InnerResult, InnerStatus};
pub use replay::{replay, ReplayOutcome};
pub use solve::{solve, SolveOutcome, SolveStatus};

pub use crate::problem::{Problem, ProblemError};

use crate::cones::ConeError;
use crate::expr::EvalError;
use crate::linalg::{dot, norm};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("invalid solver configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error("anchor point is infeasible: dist(h(x), K) = {dist:e} > 1e-8")]
    InfeasibleAnchor { dist: f64 },
    #[error("inner solve failed at penalty weight k = {k:e}: {source}")]
    Inner {
        k: f64,
        #[source]
        source: InnerError,
    },
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Cone(#[from] ConeError),
}

impl From<crate::kkt::KktError> for SolveError {
    fn from(e: crate::kkt::KktError) -> Self {
        use crate::kkt::KktError;
        match e {
            KktError::Problem(p) => SolveError::Problem(p),
            KktError::Eval(e) => SolveError::Eval(e),
            KktError::Cone(c) => SolveError::Cone(c),
            other @ KktError::NotEqualityCone { .. } => SolveError::Config(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverConfig {
    /// Initial penalty weight.
    pub k0: f64,
    /// Penalty growth factor per outer iteration.
    pub rho: f64,
    pub max_outer: usize,
    /// Floor of the inner stationarity schedule `max(inner_tol, 1e-6/√k)`.
    pub inner_tol: f64,
    pub inner_max_iter: usize,
    /// Radius of the ball around `x̄` in replay mode.
    pub delta: f64,
    /// Coefficient of `½‖x − anchor‖²`. Replay always uses 1.
    pub prox_weight: f64,
    /// KKT tolerance used by `solve` to stop.
    pub kkt_tol: f64,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            k0: 1.0,
            rho: 10.0,
            max_outer: 20,
            inner_tol: 1e-9,
            inner_max_iter: 20_000,
            delta: 1.0,
            prox_weight: 1.0,
            kkt_tol: crate::kkt::DEFAULT_KKT_TOL,
            seed: 0,
        }
    }
}

impl SolverConfig {
    /// Defaults for replay: seven penalty weights `1, 10, …, 10⁶`.
    ///
    /// Beyond `k ≈ 10⁶` the constraint residual `h(xᵏ) ≈ λ/k` approaches the
    /// rounding level of `h` itself and `k·h(xᵏ)` stops carrying information.
    pub fn replay_default() -> Self {
        SolverConfig {
            max_outer: 7,
            ..SolverConfig::default()
        }
    }

    pub fn validate(&self) -> Result<(), SolveError> {
        let bad = |msg: &str| Err(SolveError::Config(msg.to_string()));
        if !(self.k0 > 0.0 && self.k0.is_finite()) {
            return bad("k0 must be positive");
        }
        if !(self.rho > 1.0 && self.rho.is_finite()) {
            return bad("rho must exceed 1");
        }
        if self.max_outer == 0 {
            return bad("max_outer must be at least 1");
        }
        if !(self.inner_tol > 0.0) {
            return bad("inner_tol must be positive");
        }
        if self.inner_max_iter == 0 {
            return bad("inner_max_iter must be at least 1");
        }
        if !(self.delta > 0.0) {
            return bad("delta must be positive");
        }
        if !(self.prox_weight >= 0.0 && self.prox_weight.is_finite()) {
            return bad("prox_weight must be nonnegative");
        }
        if !(self.kkt_tol > 0.0) {
            return bad("kkt_tol must be positive");
        }
        Ok(())
    }

    /// Inner stationarity tolerance for penalty weight `k`.
    pub fn inner_tol_for(&self, k: f64) -> f64 {
        self.inner_tol.max(1e-6 / k.sqrt())
    }

    /// Penalty weight of outer iteration `i` (zero-based).
    pub fn penalty_weight(&self, i: usize) -> f64 {
        self.k0 * self.rho.powi(i as i32)
    }
}

/// One outer iteration of the penalty method.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterateRecord {
    pub k: f64,
    pub x: Vec<f64>,
    /// `k·Π_{K°}(h(xᵏ))`
    pub lambda: Vec<f64>,
    /// `φ_k(xᵏ)`
    pub phi: f64,
    /// `‖∇φ_k(xᵏ)‖` (projected-gradient measure in replay mode)
    pub stationarity: f64,
    /// `dist(h(xᵏ), K)`
    pub feasibility: f64,
    /// `|⟨Π_K(h(xᵏ)), λᵏ⟩|`
    pub complementarity: f64,
    /// `dist(λᵏ, K°) = ‖Π_K(λᵏ)‖`
    pub dual_feasibility: f64,
    pub inner_iters: usize,
    pub inner_status: InnerStatus,
    /// Replay only: whether `xᵏ` is strictly inside the ball around `x̄`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub interior: Option<bool>,
}

/// `φ_k` and its gradient for a given anchor and proximal weight.
#[derive(Debug, Clone, Copy)]
pub struct Penalized<'a> {
    pub problem: &'a Problem,
    pub anchor: &'a [f64],
    pub k: f64,
    pub prox_weight: f64,
}

impl Penalized<'_> {
    pub fn value_and_grad(&self, x: &[f64]) -> Result<(f64, Vec<f64>), InnerError> {
        let p = self.problem;
        let (f, mut grad) = p.f_and_grad(x)?;
        let (hx, jac) = p.h_and_jac(x)?;
        let w = p.cone().project_polar(&hx)?;

        let prox_sq: f64 = x.iter().zip(self.anchor).map(|(a, b)| (a - b) * (a - b)).sum();
        let value = f + 0.5 * self.prox_weight * prox_sq + 0.5 * self.k * dot(&w, &w);

        // (k/2)·Jᵀ(2w) = Jᵀ(k·w)
        let lambda: Vec<f64> = w.iter().map(|v| self.k * v).collect();
        let penalty_grad = jac.tr_mul_vec(&lambda);
        for ((g, pg), (xi, ai)) in grad.iter_mut().zip(&penalty_grad).zip(x.iter().zip(self.anchor)) {
            *g += self.prox_weight * (xi - ai) + pg;
        }
        Ok((value, grad))
    }
}

/// `φ_k(x)` and `∇φ_k(x)` with the given anchor and proximal weight.
pub fn phi_eval_grad(
    p: &Problem,
    anchor: &[f64],
    k: f64,
    prox_weight: f64,
    x: &[f64],
) -> Result<(f64, Vec<f64>), SolveError> {
    p.check_point(x, "point")?;
    p.check_point(anchor, "anchor")?;
    Penalized {
        problem: p,
        anchor,
        k,
        prox_weight,
    }
    .value_and_grad(x)
    .map_err(|source| SolveError::Inner { k, source })
}

/// `λ = k·Π_{K°}(h(x))`, an element of `K°` for every `x`.
pub fn multiplier_estimate(p: &Problem, x: &[f64], k: f64) -> Result<Vec<f64>, SolveError> {
    p.check_point(x, "point")?;
    let hx = p.h(x)?;
    let w = p.cone().project_polar(&hx)?;
    Ok(w.into_iter().map(|v| k * v).collect())
}

/// Builds the record for iterate `x` at penalty weight `k`.
pub(crate) fn make_record(
    p: &Problem,
    anchor: &[f64],
    k: f64,
    prox_weight: f64,
    inner: &InnerResult,
    interior: Option<bool>,
) -> Result<IterateRecord, SolveError> {
    let x = &inner.x;
    let hx = p.h(x)?;
    let (proj, polar) = p.cone().decompose(&hx)?;
    let lambda: Vec<f64> = polar.iter().map(|v| k * v).collect();
    let (phi, _) = phi_eval_grad(p, anchor, k, prox_weight, x)?;
    Ok(IterateRecord {
        k,
        x: x.clone(),
        phi,
        stationarity: inner.achieved,
        feasibility: norm(&polar),
        complementarity: dot(&proj, &lambda).abs(),
        dual_feasibility: p.cone().dist_to_polar(&lambda)?,
        lambda,
        inner_iters: inner.iters,
        inner_status: inner.status,
        interior,
    })
}

/// Flags multiplier sequences growing like a power of `k`.
///
/// Bounded multiplier sequences settle, so their step-to-step growth ratio
/// tends to 1. A failure of constraint regularity shows up as
/// `‖λᵏ‖ ~ k^γ` with `γ > 0`; for a squared constraint such as `h = x²`
/// at `x̄ = 0` the exponent is `1/3`. Growth is flagged when the ratio
/// exceeds `ρ^{1/4}` (log-log slope above 1/4) for `window` consecutive
/// outer steps.
pub fn multiplier_growth_suspect(norms: &[f64], rho: f64, window: usize) -> bool {
    if norms.len() < window + 1 {
        return false;
    }
    let threshold = rho.powf(0.25);
    norms[norms.len() - window - 1..]
        .windows(2)
        .all(|w| w[0] > 1e-12 && w[1] > threshold * w[0])
}

/// Consecutive outer steps of growth needed to flag divergence.
pub const DIVERGENCE_WINDOW: usize = 3;
