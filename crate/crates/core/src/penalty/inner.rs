//! First-order minimizer for the penalized subproblems: (projected) gradient
//! descent with Armijo backtracking and Barzilai–Borwein trial steps.

use serde::Serialize;
use thiserror::Error;

use crate::cones::ConeError;
use crate::expr::EvalError;
use crate::linalg::{dot, norm};

const ARMIJO_C: f64 = 1e-4;
const MIN_STEP: f64 = 1e-18;
/// Relative slack in the sufficient-decrease test; below this the objective
/// cannot resolve a decrease and the step is judged by the gradient alone.
const VALUE_NOISE: f64 = 1e-14;
/// Iterations without improving the best stationarity before giving up.
const STALL_WINDOW: usize = 500;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InnerError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Cone(#[from] ConeError),
    #[error("line search failed: step fell below {step:e} without sufficient decrease")]
    LineSearch { step: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum InnerStatus {
    Converged,
    MaxIter,
    /// No progress on the stationarity measure for a long stretch; the
    /// iterate sits at the floating-point noise floor of the gradient.
    Stalled,
}

#[derive(Debug, Clone)]
pub struct InnerOptions {
    pub tol: f64,
    pub max_iter: usize,
}

#[derive(Debug, Clone)]
pub struct InnerResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub iters: usize,
    /// Final stationarity measure: `‖∇φ‖`, or `‖x − P(x − ∇φ)‖` when
    /// projecting.
    pub achieved: f64,
    pub status: InnerStatus,
}

/// Minimizes `objective` from `x0`, keeping iterates in the set described
/// by `project` when one is given.
///
/// The returned point is the iterate with the smallest stationarity
/// measure seen.
pub fn solve_inner<F>(
    mut objective: F,
    x0: &[f64],
    opts: &InnerOptions,
    project: Option<&dyn Fn(&mut [f64])>,
) -> Result<InnerResult, InnerError>
where
    F: FnMut(&[f64]) -> Result<(f64, Vec<f64>), InnerError>,
{
    assert!(opts.tol > 0.0, "inner tolerance must be positive");
    let measure = |x: &[f64], g: &[f64]| match project {
        None => norm(g),
        Some(p) => {
            let mut y: Vec<f64> = x.iter().zip(g).map(|(xi, gi)| xi - gi).collect();
            p(&mut y);
            x.iter().zip(&y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
        }
    };

    let mut x = x0.to_vec();
    if let Some(p) = project {
        p(&mut x);
    }
    let (mut f, mut g) = objective(&x)?;
    let mut m = measure(&x, &g);
    let mut best = InnerResult {
        x: x.clone(),
        value: f,
        iters: 0,
        achieved: m,
        status: InnerStatus::MaxIter,
    };
    if m <= opts.tol {
        best.status = InnerStatus::Converged;
        return Ok(best);
    }

    let mut step = 1.0 / norm(&g).max(1.0);
    let mut since_best = 0;
    let mut trial = vec![0.0; x.len()];
    for iter in 1..=opts.max_iter {
        let mut alpha = step;
        let (f_new, g_new) = loop {
            for ((t, xi), gi) in trial.iter_mut().zip(&x).zip(&g) {
                *t = xi - alpha * gi;
            }
            if let Some(p) = project {
                p(&mut trial);
            }
            let slope: f64 = g.iter().zip(&trial).zip(&x).map(|((gi, t), xi)| gi * (t - xi)).sum();
            // Domain errors at trial points just shorten the step.
            if let Ok((ft, gt)) = objective(&trial) {
                if ft.is_finite() && ft <= f + ARMIJO_C * slope + VALUE_NOISE * (1.0 + f.abs()) {
                    break (ft, gt);
                }
            }
            alpha *= 0.5;
            if alpha < MIN_STEP {
                return Err(InnerError::LineSearch { step: alpha });
            }
        };

        let s: Vec<f64> = trial.iter().zip(&x).map(|(t, xi)| t - xi).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        step = if sy > 0.0 { dot(&s, &s) / sy } else { 2.0 * alpha };
        step = step.clamp(1e-16, 1e16);

        x.copy_from_slice(&trial);
        f = f_new;
        g = g_new;
        m = measure(&x, &g);

        if m < best.achieved {
            if m < best.achieved * (1.0 - 1e-3) {
                since_best = 0;
            }
            best.x.copy_from_slice(&x);
            best.value = f;
            best.achieved = m;
        } else {
            since_best += 1;
        }
        best.iters = iter;
        if m <= opts.tol {
            best.status = InnerStatus::Converged;
            return Ok(best);
        }
        if since_best >= STALL_WINDOW {
            best.status = InnerStatus::Stalled;
            return Ok(best);
        }
    }
    best.status = InnerStatus::MaxIter;
    Ok(best)
}
