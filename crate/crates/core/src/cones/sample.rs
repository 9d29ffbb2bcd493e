//! Random points, cone members and polar members for property checks.
//!
//! Members are generated from each cone's defining description, never
//! through the projection code, so they are usable as independent
//! witnesses against it.

use rand::Rng;
use rand_distr::StandardNormal;

use super::{Cone, SymMatrix};
use crate::linalg::{norm, Matrix};

pub fn gaussian_vec<R: Rng + ?Sized>(rng: &mut R, d: usize, scale: f64) -> Vec<f64> {
    (0..d)
        .map(|_| scale * rng.sample::<f64, _>(StandardNormal))
        .collect()
}

/// A point of `Y` with a random overall scale in `[0.1, 10)`.
pub fn random_point<R: Rng + ?Sized>(rng: &mut R, cone: &Cone) -> Vec<f64> {
    let scale = 10f64.powf(rng.random_range(-1.0..1.0));
    gaussian_vec(rng, cone.dim(), scale)
}

/// A random element of `K`.
pub fn random_member<R: Rng + ?Sized>(rng: &mut R, cone: &Cone) -> Vec<f64> {
    match cone {
        Cone::Zero(d) => vec![0.0; *d],
        Cone::Nonpos(d) => gaussian_vec(rng, *d, 1.0)
            .into_iter()
            .map(|v| -v.abs())
            .collect(),
        Cone::Lorentz(d) => {
            let tail = gaussian_vec(rng, d - 1, 1.0);
            let slack: f64 = rng.sample::<f64, _>(StandardNormal).abs();
            // a fraction of samples sit exactly on the boundary
            let slack = if rng.random_bool(0.3) { 0.0 } else { slack };
            let mut v = vec![norm(&tail) + slack];
            v.extend(tail);
            v
        }
        Cone::Psd(s) => {
            // B Bᵀ with a random rank, so low-rank boundary members appear
            let rank = rng.random_range(0..=*s);
            let mut b = Matrix::zeros(*s, rank.max(1));
            if rank > 0 {
                for i in 0..*s {
                    for j in 0..rank {
                        b[(i, j)] = rng.sample(StandardNormal);
                    }
                }
            }
            SymMatrix::from_full(&b.matmul(&b.transpose())).into_svec()
        }
        Cone::Product(parts) => parts.iter().flat_map(|p| random_member(rng, p)).collect(),
    }
}

/// A random element of the polar cone `K°`.
pub fn random_polar_member<R: Rng + ?Sized>(rng: &mut R, cone: &Cone) -> Vec<f64> {
    match cone {
        Cone::Zero(d) => gaussian_vec(rng, *d, 1.0),
        Cone::Nonpos(d) => gaussian_vec(rng, *d, 1.0)
            .into_iter()
            .map(f64::abs)
            .collect(),
        // second-order and PSD cones are self-dual, so their polars are −K
        Cone::Lorentz(_) | Cone::Psd(_) => random_member(rng, cone).into_iter().map(|v| -v).collect(),
        Cone::Product(parts) => parts
            .iter()
            .flat_map(|p| random_polar_member(rng, p))
            .collect(),
    }
}

/// A point of the Lorentz cone's ambient space whose tail norm is
/// `|z₁|·factor`, i.e. near the boundary of `K` (z₁ > 0) or of `−K` (z₁ < 0).
pub fn near_lorentz_boundary<R: Rng + ?Sized>(rng: &mut R, d: usize, factor: f64) -> Vec<f64> {
    assert!(d >= 2, "boundary points need a nonempty tail");
    let head: f64 = rng.sample::<f64, _>(StandardNormal);
    let head = if head.abs() < 0.1 { 0.1f64.copysign(head) } else { head };
    let dir = gaussian_vec(rng, d - 1, 1.0);
    let n = norm(&dir);
    let mut z = vec![head];
    z.extend(dir.iter().map(|v| v / n * head.abs() * factor));
    z
}
