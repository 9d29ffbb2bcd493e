//! Conic KKT residuals and constraint-regularity checks.
//!
//! At a point `x` with multiplier `λ` the KKT system for
//! `min f(x) s.t. h(x) ∈ K` is
//!
//! ```text
//! ∇f(x) + Dh(x)ᵀλ = 0,   h(x) ∈ K,   ⟨h(x), λ⟩ = 0,   λ ∈ K°.
//! ```
//!
//! The adjoint of `Dh(x)` is its transpose because PSD blocks are embedded
//! by svec, which preserves inner products.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::cones::{eigen_sym, sample, ConeError, SymMatrix};
use crate::expr::EvalError;
use crate::linalg::{dot, norm, Matrix};
use crate::problem::{Problem, ProblemError};

pub const DEFAULT_KKT_TOL: f64 = 1e-6;
pub const DEFAULT_RANK_TOL: f64 = 1e-8;
pub const DEFAULT_MULTISTARTS: usize = 50;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KktError {
    #[error("licq_check applies to equality constraints only (cone {cone}); use the conic regularity check")]
    NotEqualityCone { cone: String },
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Cone(#[from] ConeError),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KktReport {
    /// `‖∇f(x) + Dh(x)ᵀλ‖`
    pub stationarity: f64,
    /// `dist(h(x), K)`
    pub feasibility: f64,
    /// `|⟨h(x), λ⟩|`
    pub complementarity: f64,
    /// `dist(λ, K°) = ‖Π_K(λ)‖`
    pub dual_feasibility: f64,
    pub pass: bool,
}

impl KktReport {
    pub fn max_residual(&self) -> f64 {
        self.stationarity
            .max(self.feasibility)
            .max(self.complementarity)
            .max(self.dual_feasibility)
    }
}

/// Evaluates the four KKT residuals. The report passes when each residual
/// is at most `tol · (1 + ‖∇f(x)‖)`.
pub fn kkt_residuals(p: &Problem, x: &[f64], lambda: &[f64], tol: f64) -> Result<KktReport, KktError> {
    p.check_point(x, "point")?;
    if lambda.len() != p.m() {
        return Err(ProblemError::Dimension {
            what: "multiplier",
            expected: p.m(),
            got: lambda.len(),
        }
        .into());
    }
    let (_, grad_f) = p.f_and_grad(x)?;
    let (hx, jac) = p.h_and_jac(x)?;
    let mut lagrangian_grad = jac.tr_mul_vec(lambda);
    for (l, g) in lagrangian_grad.iter_mut().zip(&grad_f) {
        *l += g;
    }
    let stationarity = norm(&lagrangian_grad);
    let feasibility = p.cone().dist_to_cone(&hx)?;
    let complementarity = dot(&hx, lambda).abs();
    let dual_feasibility = p.cone().dist_to_polar(lambda)?;

    let threshold = tol * (1.0 + norm(&grad_f));
    let pass = [stationarity, feasibility, complementarity, dual_feasibility]
        .iter()
        .all(|&r| r <= threshold);
    Ok(KktReport {
        stationarity,
        feasibility,
        complementarity,
        dual_feasibility,
        pass,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RegularityMode {
    Licq,
    Conic,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegularityReport {
    pub mode: RegularityMode,
    /// Smallest singular value of `Dh(x)` (licq mode).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_singular_value: Option<f64>,
    /// Best value found of `min ‖Dh(x)ᵀα‖² + ⟨h(x), α⟩²` over unit
    /// `α ∈ K°` (conic mode).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate_value: Option<f64>,
    pub verdict: bool,
    /// Minimizing direction found by the conic search.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<Vec<f64>>,
    /// A positive conic verdict is evidence from a multistart local
    /// search, not a proof.
    pub heuristic: bool,
}

/// Linear independence of the constraint gradients at `x`.
///
/// The smallest singular value of `Dh(x)` is taken from the eigenvalues of
/// `Dh(x)Dh(x)ᵀ`; the verdict is positive when it exceeds `tol` times the
/// largest singular value.
pub fn licq_check(p: &Problem, x: &[f64], tol: f64) -> Result<RegularityReport, KktError> {
    if !p.cone().is_zero_cone() {
        return Err(KktError::NotEqualityCone {
            cone: p.cone().to_string(),
        });
    }
    p.check_point(x, "point")?;
    if p.m() == 0 {
        return Ok(RegularityReport {
            mode: RegularityMode::Licq,
            min_singular_value: None,
            certificate_value: None,
            verdict: true,
            alpha: None,
            heuristic: false,
        });
    }
    let (_, jac) = p.h_and_jac(x)?;
    let eig = eigen_sym(&SymMatrix::from_full(&jac.gram_rows()))?;
    let largest = eig.values.first().copied().unwrap_or(0.0).max(0.0).sqrt();
    let smallest = eig.values.last().copied().unwrap_or(0.0).max(0.0).sqrt();
    Ok(RegularityReport {
        mode: RegularityMode::Licq,
        min_singular_value: Some(smallest),
        certificate_value: None,
        verdict: largest > 0.0 && smallest > tol * largest,
        alpha: None,
        heuristic: false,
    })
}

#[derive(Debug, Clone)]
pub struct ConicCheckOptions {
    pub multistarts: usize,
    pub seed: u64,
    /// Verdict threshold relative to `trace(Dh Dhᵀ + h hᵀ)`.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for ConicCheckOptions {
    fn default() -> Self {
        ConicCheckOptions {
            multistarts: DEFAULT_MULTISTARTS,
            seed: 0,
            tol: DEFAULT_RANK_TOL,
            max_iter: 2000,
        }
    }
}

/// Searches for a nonzero `α ∈ K°` with `Dh(x)ᵀα = 0` and `⟨h(x), α⟩ = 0`.
///
/// Minimizes `g(α) = ‖Dh(x)ᵀα‖² + ⟨h(x), α⟩² = αᵀMα` with
/// `M = Dh Dhᵀ + h hᵀ` over the unit sphere of `K°` by projected gradient
/// from random starts. A minimum of zero exhibits a violating `α`; a
/// minimum bounded away from zero is evidence that none exists.
pub fn conic_regularity_check(
    p: &Problem,
    x: &[f64],
    opts: &ConicCheckOptions,
) -> Result<RegularityReport, KktError> {
    p.check_point(x, "point")?;
    let m = p.m();
    if m == 0 {
        return Ok(RegularityReport {
            mode: RegularityMode::Conic,
            min_singular_value: None,
            certificate_value: None,
            verdict: true,
            alpha: None,
            heuristic: true,
        });
    }
    let (hx, jac) = p.h_and_jac(x)?;
    let mut gram = jac.gram_rows();
    for i in 0..m {
        for j in 0..m {
            gram[(i, j)] += hx[i] * hx[j];
        }
    }
    let trace: f64 = (0..m).map(|i| gram[(i, i)]).sum();
    let cone = p.cone();

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut best: Option<(f64, Vec<f64>)> = None;

    for _ in 0..opts.multistarts.max(1) {
        let Some(mut alpha) = random_unit_polar(&mut rng, cone)? else {
            continue;
        };
        let value = minimize_on_polar_sphere(&gram, trace, cone, &mut alpha, opts.max_iter)?;
        if best.as_ref().is_none_or(|(b, _)| value < *b) {
            best = Some((value, alpha));
        }
    }

    let (value, alpha) = best.unwrap_or((0.0, vec![0.0; m]));
    let value = value.max(0.0);
    Ok(RegularityReport {
        mode: RegularityMode::Conic,
        min_singular_value: None,
        certificate_value: Some(value),
        verdict: value > opts.tol * trace,
        alpha: Some(alpha),
        heuristic: true,
    })
}

fn random_unit_polar(
    rng: &mut ChaCha8Rng,
    cone: &crate::cones::Cone,
) -> Result<Option<Vec<f64>>, ConeError> {
    for _ in 0..100 {
        let z = sample::gaussian_vec(rng, cone.dim(), 1.0);
        let w = cone.project_polar(&z)?;
        let n = norm(&w);
        if n > 1e-12 {
            return Ok(Some(w.iter().map(|v| v / n).collect()));
        }
    }
    Ok(None)
}

fn minimize_on_polar_sphere(
    gram: &Matrix,
    trace: f64,
    cone: &crate::cones::Cone,
    alpha: &mut Vec<f64>,
    max_iter: usize,
) -> Result<f64, ConeError> {
    if trace == 0.0 {
        return Ok(0.0);
    }
    // ∇g = 2Mα and λ_max(M) ≤ trace(M)
    let step = 0.25 / trace;
    let mut value = dot(alpha, &gram.mul_vec(alpha));
    for _ in 0..max_iter {
        let grad = gram.mul_vec(alpha);
        let moved: Vec<f64> = alpha.iter().zip(&grad).map(|(a, g)| a - 2.0 * step * g).collect();
        let projected = cone.project_polar(&moved)?;
        let n = norm(&projected);
        if n <= 1e-300 {
            break;
        }
        let next: Vec<f64> = projected.iter().map(|v| v / n).collect();
        let next_value = dot(&next, &gram.mul_vec(&next));
        let change = alpha.iter().zip(&next).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        *alpha = next;
        value = next_value;
        if change <= 1e-13 {
            break;
        }
    }
    Ok(value)
}
