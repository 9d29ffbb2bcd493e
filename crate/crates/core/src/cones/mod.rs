//! Closed convex cones, Euclidean projections onto them and their polars.
//!
//! Every cone has exactly one projection routine. The polar projection is
//! always the Moreau complement `z − Π_K(z)`, so the decomposition
//! `z = Π_K(z) + Π_{K°}(z)` with `⟨Π_K(z), Π_{K°}(z)⟩ = 0` holds by
//! construction, and the orthogonality residual measures how well the
//! projection itself was computed.
//!
//! PSD blocks are embedded through [`SymMatrix`] svecs so that the
//! Euclidean inner product on the embedding is the trace inner product.

mod eigen;
pub mod sample;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

pub use eigen::{eigen_sym, svec_len, EigenPair, SymMatrix};

use crate::linalg::{dot, norm, Matrix};

/// Tail norms within this of `−z₁` send a Lorentz point to the origin.
const LORENTZ_APEX_TOL: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConeError {
    #[error("dimension mismatch: cone has dimension {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("Jacobi eigensolver did not converge after {sweeps} sweeps")]
    EigenNonConvergence { sweeps: usize },
    #[error("invalid cone descriptor: {0}")]
    InvalidDescriptor(String),
}

/// A closed convex cone in a coordinate space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Cone {
    /// `{0} ⊂ ℝᵈ`
    Zero(usize),
    /// `−ℝᵈ₊`
    Nonpos(usize),
    /// `{x ∈ ℝᵈ : x₁ ≥ ‖(x₂, …, x_d)‖}`, `d ≥ 1`.
    Lorentz(usize),
    /// Positive semidefinite matrices of the given order, as svecs.
    Psd(usize),
    Product(Vec<Cone>),
}

/// Residuals of the Moreau decomposition at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MoreauResiduals {
    pub recon_residual: f64,
    pub orth_residual: f64,
}

impl Cone {
    /// Embedded dimension.
    pub fn dim(&self) -> usize {
        match self {
            Cone::Zero(d) | Cone::Nonpos(d) | Cone::Lorentz(d) => *d,
            Cone::Psd(s) => svec_len(*s),
            Cone::Product(parts) => parts.iter().map(Cone::dim).sum(),
        }
    }

    pub fn validate(&self) -> Result<(), ConeError> {
        match self {
            Cone::Lorentz(0) => Err(ConeError::InvalidDescriptor(
                "lorentz cone needs dimension >= 1".into(),
            )),
            Cone::Psd(0) => Err(ConeError::InvalidDescriptor(
                "psd cone needs order >= 1".into(),
            )),
            Cone::Product(parts) => parts.iter().try_for_each(Cone::validate),
            _ => Ok(()),
        }
    }

    /// True for `{0}` and products made only of `{0}` blocks.
    pub fn is_zero_cone(&self) -> bool {
        match self {
            Cone::Zero(_) => true,
            Cone::Product(parts) => parts.iter().all(Cone::is_zero_cone),
            _ => false,
        }
    }

    fn check_dim(&self, z: &[f64]) -> Result<(), ConeError> {
        if z.len() != self.dim() {
            return Err(ConeError::DimensionMismatch {
                expected: self.dim(),
                got: z.len(),
            });
        }
        Ok(())
    }

    /// `Π_K(z)`
    pub fn project(&self, z: &[f64]) -> Result<Vec<f64>, ConeError> {
        self.check_dim(z)?;
        let mut out = z.to_vec();
        self.project_in_place(&mut out)?;
        Ok(out)
    }

    fn project_in_place(&self, z: &mut [f64]) -> Result<(), ConeError> {
        match self {
            Cone::Zero(_) => z.fill(0.0),
            Cone::Nonpos(_) => z.iter_mut().for_each(|v| *v = v.min(0.0)),
            Cone::Lorentz(_) => project_lorentz(z),
            Cone::Psd(s) => {
                let eig = eigen_sym(&SymMatrix::from_svec(*s, z)?)?;
                let clamped = SymMatrix::from_full(&eig.reconstruct_with(|l| l.max(0.0)));
                z.copy_from_slice(clamped.svec());
            }
            Cone::Product(parts) => {
                let mut offset = 0;
                for part in parts {
                    let d = part.dim();
                    part.project_in_place(&mut z[offset..offset + d])?;
                    offset += d;
                }
            }
        }
        Ok(())
    }

    /// `Π_{K°}(z)`, computed as `z − Π_K(z)`.
    pub fn project_polar(&self, z: &[f64]) -> Result<Vec<f64>, ConeError> {
        let p = self.project(z)?;
        Ok(moreau_complement(z, &p))
    }

    /// Both halves of the Moreau decomposition.
    pub fn decompose(&self, z: &[f64]) -> Result<(Vec<f64>, Vec<f64>), ConeError> {
        let p = self.project(z)?;
        let w = moreau_complement(z, &p);
        Ok((p, w))
    }

    /// `dist(z, K) = ‖Π_{K°}(z)‖`
    pub fn dist_to_cone(&self, z: &[f64]) -> Result<f64, ConeError> {
        Ok(norm(&self.project_polar(z)?))
    }

    /// `dist(λ, K°) = ‖Π_K(λ)‖`
    pub fn dist_to_polar(&self, lambda: &[f64]) -> Result<f64, ConeError> {
        Ok(norm(&self.project(lambda)?))
    }

    pub fn contains(&self, z: &[f64], tol: f64) -> Result<bool, ConeError> {
        Ok(self.dist_to_cone(z)? <= tol)
    }

    /// Reconstruction and orthogonality residuals of the decomposition.
    ///
    /// The reconstruction residual is evaluated along the path that builds
    /// the polar part, `(z − Π_K(z)) − Π_{K°}(z)`, and is zero exactly.
    pub fn moreau_check(&self, z: &[f64]) -> Result<MoreauResiduals, ConeError> {
        let (p, w) = self.decompose(z)?;
        let recon: f64 = z
            .iter()
            .zip(&p)
            .zip(&w)
            .map(|((zi, pi), wi)| {
                let r = (zi - pi) - wi;
                r * r
            })
            .sum();
        Ok(MoreauResiduals {
            recon_residual: recon.sqrt(),
            orth_residual: dot(&p, &w).abs(),
        })
    }

    /// `P(z) = ‖Π_{K°}(z)‖²`, the squared distance from `z` to `K`.
    pub fn penalty_value(&self, hx: &[f64]) -> Result<f64, ConeError> {
        let w = self.project_polar(hx)?;
        Ok(dot(&w, &w))
    }

    /// Gradient of `x ↦ P(h(x))` given `h(x)` and the Jacobian of `h`:
    /// `Jᵀ · 2Π_{K°}(h(x))`.
    pub fn penalty_grad_chain(&self, hx: &[f64], jac: &Matrix) -> Result<Vec<f64>, ConeError> {
        if jac.rows() != hx.len() {
            return Err(ConeError::DimensionMismatch {
                expected: hx.len(),
                got: jac.rows(),
            });
        }
        let w = self.project_polar(hx)?;
        let twice: Vec<f64> = w.iter().map(|v| 2.0 * v).collect();
        Ok(jac.tr_mul_vec(&twice))
    }
}

fn moreau_complement(z: &[f64], p: &[f64]) -> Vec<f64> {
    z.iter().zip(p).map(|(zi, pi)| zi - pi).collect()
}

fn project_lorentz(z: &mut [f64]) {
    let Some((head, tail)) = z.split_first_mut() else {
        return;
    };
    let t = *head;
    let nv = norm(tail);
    if nv <= t {
        return;
    }
    if nv <= -t + LORENTZ_APEX_TOL {
        *head = 0.0;
        tail.fill(0.0);
        return;
    }
    let a = 0.5 * (t + nv);
    *head = a;
    let ratio = a / nv;
    tail.iter_mut().for_each(|v| *v *= ratio);
}

impl fmt::Display for Cone {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cone::Zero(d) => write!(f, "zero:{d}"),
            Cone::Nonpos(d) => write!(f, "nonpos:{d}"),
            Cone::Lorentz(d) => write!(f, "lorentz:{d}"),
            Cone::Psd(s) => write!(f, "psd:{s}"),
            Cone::Product(parts) => {
                for (i, p) in parts.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{p}")?;
                }
                Ok(())
            }
        }
    }
}

/// Parses either a JSON descriptor or the short form `type:size`, with a
/// comma-separated list of short forms denoting a product
/// (`zero:1,nonpos:2,lorentz:3`). The size of `psd` is its order.
impl FromStr for Cone {
    type Err = ConeError;

    fn from_str(s: &str) -> Result<Cone, ConeError> {
        let s = s.trim();
        if s.starts_with('{') {
            let cone: Cone = serde_json::from_str(s)
                .map_err(|e| ConeError::InvalidDescriptor(e.to_string()))?;
            return Ok(cone);
        }
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() > 1 {
            let cones = parts.into_iter().map(parse_short).collect::<Result<_, _>>()?;
            return Ok(Cone::Product(cones));
        }
        parse_short(s)
    }
}

fn parse_short(s: &str) -> Result<Cone, ConeError> {
    let (kind, size) = s
        .split_once(':')
        .ok_or_else(|| ConeError::InvalidDescriptor(format!("expected type:size, got '{s}'")))?;
    let size: usize = size
        .parse()
        .map_err(|_| ConeError::InvalidDescriptor(format!("invalid size in '{s}'")))?;
    let cone = match kind {
        "zero" => Cone::Zero(size),
        "nonpos" => Cone::Nonpos(size),
        "lorentz" => Cone::Lorentz(size),
        "psd" => Cone::Psd(size),
        other => {
            return Err(ConeError::InvalidDescriptor(format!(
                "unknown cone type '{other}'"
            )))
        }
    };
    cone.validate()?;
    Ok(cone)
}

/// On-disk form: `{"type": ..., "dim": d}` plus `"order"` for psd and
/// `"parts"` for product.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConeDescriptor {
    #[serde(rename = "type")]
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    order: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    parts: Option<Vec<ConeDescriptor>>,
}

impl From<&Cone> for ConeDescriptor {
    fn from(cone: &Cone) -> Self {
        let (kind, order, parts) = match cone {
            Cone::Zero(_) => ("zero", None, None),
            Cone::Nonpos(_) => ("nonpos", None, None),
            Cone::Lorentz(_) => ("lorentz", None, None),
            Cone::Psd(s) => ("psd", Some(*s), None),
            Cone::Product(ps) => ("product", None, Some(ps.iter().map(Into::into).collect())),
        };
        ConeDescriptor {
            kind: kind.to_string(),
            dim: Some(cone.dim()),
            order,
            parts,
        }
    }
}

impl TryFrom<ConeDescriptor> for Cone {
    type Error = ConeError;

    fn try_from(d: ConeDescriptor) -> Result<Cone, ConeError> {
        let need_dim = |d: &ConeDescriptor| {
            d.dim
                .ok_or_else(|| ConeError::InvalidDescriptor(format!("{} cone needs \"dim\"", d.kind)))
        };
        let cone = match d.kind.as_str() {
            "zero" => Cone::Zero(need_dim(&d)?),
            "nonpos" => Cone::Nonpos(need_dim(&d)?),
            "lorentz" => Cone::Lorentz(need_dim(&d)?),
            "psd" => {
                let order = d.order.ok_or_else(|| {
                    ConeError::InvalidDescriptor("psd cone needs \"order\"".into())
                })?;
                Cone::Psd(order)
            }
            "product" => {
                let parts = d.parts.ok_or_else(|| {
                    ConeError::InvalidDescriptor("product cone needs \"parts\"".into())
                })?;
                Cone::Product(parts.into_iter().map(Cone::try_from).collect::<Result<_, _>>()?)
            }
            other => {
                return Err(ConeError::InvalidDescriptor(format!(
                    "unknown cone type '{other}'"
                )))
            }
        };
        if let Some(dim) = d.dim {
            if dim != cone.dim() {
                return Err(ConeError::InvalidDescriptor(format!(
                    "declared dim {dim} but {} cone has dimension {}",
                    d.kind,
                    cone.dim()
                )));
            }
        }
        cone.validate()?;
        Ok(cone)
    }
}

impl Serialize for Cone {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        ConeDescriptor::from(self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Cone {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let d = ConeDescriptor::deserialize(deserializer)?;
        Cone::try_from(d).map_err(serde::de::Error::custom)
    }
}
