//! Cyclic Jacobi eigensolver for small symmetric matrices.
//!
//! Sweeps visit the strictly upper triangle in row-major order and stop once
//! the off-diagonal Frobenius norm drops to `1e-14 · ‖A‖_F`. The fixed order
//! makes results reproducible bit-for-bit on a given platform.

use super::matrix::Matrix;
use super::{LinalgError, SYMMETRY_TOLERANCE};

const OFF_DIAGONAL_RELATIVE: f64 = 1e-14;
const MAX_SWEEPS: usize = 100;

/// Eigenvalues in ascending order together with the accumulated rotations.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    /// Column `j` is the eigenvector for `values[j]`.
    pub vectors: Matrix,
}

impl SymmetricEigen {
    /// `Q Λ Qᵀ`.
    pub fn reconstruct(&self) -> Matrix {
        let n = self.values.len();
        let mut out = Matrix::zeros(n, n);
        for (k, &lam) in self.values.iter().enumerate() {
            let q = self.vectors.column(k);
            out.add_outer_sym(&q, lam);
        }
        out
    }
}

pub fn eigvals_sym(a: &Matrix) -> Result<Vec<f64>, LinalgError> {
    Ok(eigh_jacobi(a)?.values)
}

pub fn eigh_jacobi(a: &Matrix) -> Result<SymmetricEigen, LinalgError> {
    if !a.is_square() {
        return Err(LinalgError::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let asym = a.asymmetry();
    if !(asym <= SYMMETRY_TOLERANCE) {
        return Err(LinalgError::NonSymmetric { asymmetry: asym });
    }
    let n = a.rows();
    let mut m = a.clone();
    m.symmetrize();
    let mut q = Matrix::identity(n);
    let target = OFF_DIAGONAL_RELATIVE * a.frobenius_norm();

    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm(&m) <= target {
            break;
        }
        for p in 0..n {
            for r in (p + 1)..n {
                let apr = m[(p, r)];
                if apr == 0.0 {
                    continue;
                }
                let app = m[(p, p)];
                let arr = m[(r, r)];
                // tan of the rotation angle, smaller root for stability.
                let theta = (arr - app) / (2.0 * apr);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                rotate(&mut m, &mut q, p, r, c, s, t, apr);
            }
        }
    }

    let mut pairs: Vec<(f64, usize)> = (0..n).map(|i| (m[(i, i)], i)).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut vectors = Matrix::zeros(n, n);
    for (dst, &(_, src)) in pairs.iter().enumerate() {
        for i in 0..n {
            vectors[(i, dst)] = q[(i, src)];
        }
    }
    Ok(SymmetricEigen {
        values: pairs.into_iter().map(|(v, _)| v).collect(),
        vectors,
    })
}

#[allow(clippy::too_many_arguments)]
fn rotate(m: &mut Matrix, q: &mut Matrix, p: usize, r: usize, c: f64, s: f64, t: f64, apr: f64) {
    let n = m.rows();
    m[(p, p)] -= t * apr;
    m[(r, r)] += t * apr;
    m[(p, r)] = 0.0;
    m[(r, p)] = 0.0;
    for k in 0..n {
        if k == p || k == r {
            continue;
        }
        let mkp = m[(k, p)];
        let mkr = m[(k, r)];
        let new_kp = c * mkp - s * mkr;
        let new_kr = s * mkp + c * mkr;
        m[(k, p)] = new_kp;
        m[(p, k)] = new_kp;
        m[(k, r)] = new_kr;
        m[(r, k)] = new_kr;
    }
    for k in 0..n {
        let qkp = q[(k, p)];
        let qkr = q[(k, r)];
        q[(k, p)] = c * qkp - s * qkr;
        q[(k, r)] = s * qkp + c * qkr;
    }
}

fn off_diagonal_norm(m: &Matrix) -> f64 {
    let n = m.rows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += m[(i, j)] * m[(i, j)];
            }
        }
    }
    s.sqrt()
}

/// `λ_i(I + A) = λ_i(A) + 1`.
pub fn shift_identity_eigs(eigs: &[f64]) -> Vec<f64> {
    eigs.iter().map(|l| l + 1.0).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn diagonal_sorted() {
        assert_eq!(eigvals_sym(&Matrix::diag(&[3.0, 1.0, 2.0])).unwrap(), vec![1.0, 2.0, 3.0]);
        assert_eq!(eigvals_sym(&Matrix::identity(2)).unwrap(), vec![1.0, 1.0]);
    }

    #[test]
    fn counterexample_moment_matrix() {
        let v1 = Matrix::from_rows(&[&[1.66, 0.32], &[0.32, 1.95]]);
        let e = eigvals_sym(&v1).unwrap();
        assert!(e[0] > 0.0 && e[0] <= e[1]);
        assert_relative_eq!(e[0] * e[1], 3.1346, max_relative = 1e-12);
        assert_relative_eq!(e[0] + e[1], 3.61, max_relative = 1e-12);
    }

    #[test]
    fn rejects_asymmetric() {
        let a = Matrix::from_rows(&[&[1.0, 1.0], &[0.0, 1.0]]);
        assert!(matches!(eigvals_sym(&a), Err(LinalgError::NonSymmetric { .. })));
    }

    #[test]
    fn shift_examples() {
        assert_eq!(shift_identity_eigs(&[2.0, 3.0]), vec![3.0, 4.0]);
        assert_eq!(shift_identity_eigs(&[0.0, 0.0, 0.0]), vec![1.0, 1.0, 1.0]);
        assert_eq!(shift_identity_eigs(&[-0.5]), vec![0.5]);
    }

    fn sym_matrix(max_n: usize) -> impl Strategy<Value = Matrix> {
        (1..=max_n).prop_flat_map(|n| {
            proptest::collection::vec(-5.0..5.0f64, n * n).prop_map(move |v| {
                let mut m = Matrix::from_vec(n, n, v).unwrap();
                m.symmetrize();
                m
            })
        })
    }

    proptest! {
        #[test]
        fn reconstruction_residual(a in sym_matrix(8)) {
            let eig = eigh_jacobi(&a).unwrap();
            let resid = a.sub(&eig.reconstruct()).unwrap().frobenius_norm();
            prop_assert!(resid <= 1e-10 * (1.0 + a.frobenius_norm()));
            prop_assert!(eig.values.windows(2).all(|w| w[0] <= w[1]));
        }

        #[test]
        fn identity_shift_matches_solver(a in sym_matrix(6)) {
            let n = a.rows();
            let shifted = eigvals_sym(&Matrix::identity(n).add(&a).unwrap()).unwrap();
            let expected = shift_identity_eigs(&eigvals_sym(&a).unwrap());
            for (s, e) in shifted.iter().zip(&expected) {
                prop_assert!((s - e).abs() <= 1e-10);
            }
        }
    }
}
