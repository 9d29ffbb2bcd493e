//! Symmetric matrices in svec form and a cyclic Jacobi eigensolver.

use std::f64::consts::SQRT_2;

use crate::linalg::Matrix;

use super::ConeError;

/// Length of the svec of an `order × order` symmetric matrix.
pub const fn svec_len(order: usize) -> usize {
    order * (order + 1) / 2
}

/// Symmetric matrix stored as its svec: the lower triangle in column-major
/// order with off-diagonal entries scaled by √2.
///
/// The scaling makes the Euclidean inner product of two svecs equal to the
/// trace inner product of the matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    order: usize,
    svec: Vec<f64>,
}

impl SymMatrix {
    pub fn from_svec(order: usize, svec: &[f64]) -> Result<Self, ConeError> {
        if svec.len() != svec_len(order) {
            return Err(ConeError::DimensionMismatch {
                expected: svec_len(order),
                got: svec.len(),
            });
        }
        Ok(SymMatrix {
            order,
            svec: svec.to_vec(),
        })
    }

    /// Reads the lower triangle of a square matrix.
    pub fn from_full(a: &Matrix) -> Self {
        assert_eq!(a.rows(), a.cols(), "matrix must be square");
        let s = a.rows();
        let mut svec = Vec::with_capacity(svec_len(s));
        for j in 0..s {
            svec.push(a[(j, j)]);
            for i in j + 1..s {
                svec.push(SQRT_2 * a[(i, j)]);
            }
        }
        SymMatrix { order: s, svec }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn svec(&self) -> &[f64] {
        &self.svec
    }

    pub fn into_svec(self) -> Vec<f64> {
        self.svec
    }

    pub fn to_full(&self) -> Matrix {
        let s = self.order;
        let mut a = Matrix::zeros(s, s);
        let mut idx = 0;
        for j in 0..s {
            a[(j, j)] = self.svec[idx];
            idx += 1;
            for i in j + 1..s {
                let v = self.svec[idx] / SQRT_2;
                a[(i, j)] = v;
                a[(j, i)] = v;
                idx += 1;
            }
        }
        a
    }
}

/// Eigen-decomposition `A = Q diag(values) Qᵀ`, values sorted descending.
#[derive(Debug, Clone)]
pub struct EigenPair {
    /// Columns are the eigenvectors.
    pub vectors: Matrix,
    pub values: Vec<f64>,
}

impl EigenPair {
    /// `Q diag(f(λ)) Qᵀ`
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> Matrix {
        let s = self.values.len();
        let mapped: Vec<f64> = self.values.iter().map(|&l| f(l)).collect();
        let mut out = Matrix::zeros(s, s);
        for (k, &lk) in mapped.iter().enumerate() {
            if lk == 0.0 {
                continue;
            }
            for i in 0..s {
                let qik = self.vectors[(i, k)] * lk;
                for j in 0..=i {
                    out[(i, j)] += qik * self.vectors[(j, k)];
                }
            }
        }
        for i in 0..s {
            for j in 0..i {
                out[(j, i)] = out[(i, j)];
            }
        }
        out
    }
}

/// Cyclic Jacobi eigensolver.
///
/// Sweeps until the largest off-diagonal magnitude is at most
/// `1e-12 · ‖A‖_F`; gives up after `30 · s²` sweeps.
pub fn eigen_sym(a: &SymMatrix) -> Result<EigenPair, ConeError> {
    let s = a.order();
    let mut m = a.to_full();
    let mut q = Matrix::identity(s);
    let threshold = 1e-12 * m.frobenius_norm();
    let max_sweeps = (30 * s * s).max(1);

    let off_max = |m: &Matrix| {
        let mut best = 0.0f64;
        for i in 0..s {
            for j in 0..i {
                best = best.max(m[(i, j)].abs());
            }
        }
        best
    };

    let mut converged = off_max(&m) <= threshold;
    let mut sweeps = 0;
    while !converged && sweeps < max_sweeps {
        sweeps += 1;
        for p in 0..s {
            for r in p + 1..s {
                let apr = m[(p, r)];
                if apr.abs() <= threshold * 1e-3 {
                    continue;
                }
                let app = m[(p, p)];
                let arr = m[(r, r)];
                // tan of the rotation angle, smaller root for stability
                let theta = (arr - app) / (2.0 * apr);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;

                for k in 0..s {
                    let mkp = m[(k, p)];
                    let mkr = m[(k, r)];
                    m[(k, p)] = c * mkp - sn * mkr;
                    m[(k, r)] = sn * mkp + c * mkr;
                }
                for k in 0..s {
                    let mpk = m[(p, k)];
                    let mrk = m[(r, k)];
                    m[(p, k)] = c * mpk - sn * mrk;
                    m[(r, k)] = sn * mpk + c * mrk;
                }
                m[(p, r)] = 0.0;
                m[(r, p)] = 0.0;

                for k in 0..s {
                    let qkp = q[(k, p)];
                    let qkr = q[(k, r)];
                    q[(k, p)] = c * qkp - sn * qkr;
                    q[(k, r)] = sn * qkp + c * qkr;
                }
            }
        }
        converged = off_max(&m) <= threshold;
    }
    if !converged {
        return Err(ConeError::EigenNonConvergence { sweeps });
    }

    let mut order: Vec<usize> = (0..s).collect();
    order.sort_by(|&i, &j| m[(j, j)].total_cmp(&m[(i, i)]));
    let values = order.iter().map(|&i| m[(i, i)]).collect();
    let mut vectors = Matrix::zeros(s, s);
    for (col, &src) in order.iter().enumerate() {
        for k in 0..s {
            vectors[(k, col)] = q[(k, src)];
        }
    }
    Ok(EigenPair { vectors, values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::dot;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_sym(rng: &mut impl Rng, s: usize) -> Matrix {
        let mut a = Matrix::zeros(s, s);
        for i in 0..s {
            for j in 0..=i {
                let v = rng.random_range(-3.0..3.0);
                a[(i, j)] = v;
                a[(j, i)] = v;
            }
        }
        a
    }

    fn check_decomposition(a: &Matrix, e: &EigenPair) {
        let s = a.rows();
        let qtq = e.vectors.transpose().matmul(&e.vectors);
        assert!(qtq.sub(&Matrix::identity(s)).frobenius_norm() <= 1e-10);
        let recon = e.reconstruct_with(|l| l);
        assert!(a.sub(&recon).frobenius_norm() <= 1e-10 * (1.0 + a.frobenius_norm()));
        assert!(e.values.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn diagonal_matrix() {
        let a = Matrix::from_rows(&[vec![1.0, 0.0], vec![0.0, -2.0]]);
        let e = eigen_sym(&SymMatrix::from_full(&a)).unwrap();
        assert_eq!(e.values, vec![1.0, -2.0]);
        assert_eq!(e.vectors[(0, 0)].abs(), 1.0);
        assert_eq!(e.vectors[(1, 1)].abs(), 1.0);
    }

    #[test]
    fn swap_matrix_has_eigenvalues_plus_minus_one() {
        // characteristic polynomial λ² − 1
        let a = Matrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
        let e = eigen_sym(&SymMatrix::from_full(&a)).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-15);
        assert!((e.values[1] + 1.0).abs() < 1e-15);
        check_decomposition(&a, &e);
    }

    #[test]
    fn identity_and_zero() {
        let e = eigen_sym(&SymMatrix::from_full(&Matrix::identity(3))).unwrap();
        assert_eq!(e.values, vec![1.0, 1.0, 1.0]);
        check_decomposition(&Matrix::identity(3), &e);
        let e = eigen_sym(&SymMatrix::from_full(&Matrix::zeros(2, 2))).unwrap();
        assert_eq!(e.values, vec![0.0, 0.0]);
    }

    #[test]
    fn random_matrices_decompose() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for s in 1..=6 {
            for _ in 0..50 {
                let a = random_sym(&mut rng, s);
                let e = eigen_sym(&SymMatrix::from_full(&a)).unwrap();
                check_decomposition(&a, &e);
            }
        }
    }

    #[test]
    fn svec_preserves_trace_inner_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for s in 1..=5 {
            for _ in 0..100 {
                let a = random_sym(&mut rng, s);
                let b = random_sym(&mut rng, s);
                let ab = a.matmul(&b);
                let trace: f64 = (0..s).map(|i| ab[(i, i)]).sum();
                let sa = SymMatrix::from_full(&a);
                let sb = SymMatrix::from_full(&b);
                assert!((dot(sa.svec(), sb.svec()) - trace).abs() <= 1e-12 * (1.0 + trace.abs()));
                assert!(sa.to_full().sub(&a).frobenius_norm() < 1e-15);
            }
        }
    }

    #[test]
    fn svec_layout_is_column_major_lower() {
        let a = Matrix::from_rows(&[
            vec![1.0, 2.0, 3.0],
            vec![2.0, 4.0, 5.0],
            vec![3.0, 5.0, 6.0],
        ]);
        let s = SymMatrix::from_full(&a);
        let r = SQRT_2;
        assert_eq!(s.svec(), &[1.0, 2.0 * r, 3.0 * r, 4.0, 5.0 * r, 6.0]);
    }
}
