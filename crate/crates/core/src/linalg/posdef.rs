use super::matrix::{dot, Matrix};
use super::{LinalgError, PD_RELATIVE_PIVOT, SYMMETRY_TOLERANCE};

/// Symmetric positive definite matrix with its Cholesky factor and
/// log-determinant cached at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct PosDefMatrix {
    entries: Matrix,
    chol: Matrix,
    logdet: f64,
}

impl PosDefMatrix {
    /// Validates symmetry and factors `entries = L Lᵀ`.
    pub fn new(entries: Matrix) -> Result<Self, LinalgError> {
        if !entries.is_square() {
            return Err(LinalgError::NotSquare {
                rows: entries.rows(),
                cols: entries.cols(),
            });
        }
        if entries.rows() == 0 {
            return Err(LinalgError::Empty);
        }
        let asym = entries.asymmetry();
        if !(asym <= SYMMETRY_TOLERANCE) {
            return Err(LinalgError::NonSymmetric { asymmetry: asym });
        }
        let chol = cholesky(&entries)?;
        let logdet = 2.0 * (0..chol.rows()).map(|i| chol[(i, i)].ln()).sum::<f64>();
        Ok(Self {
            entries,
            chol,
            logdet,
        })
    }

    /// `scale · I_d`.
    pub fn scaled_identity(dim: usize, scale: f64) -> Result<Self, LinalgError> {
        Self::new(Matrix::scaled_identity(dim, scale))
    }

    pub fn dim(&self) -> usize {
        self.entries.rows()
    }

    pub fn entries(&self) -> &Matrix {
        &self.entries
    }

    /// Lower-triangular factor `L` with `A = L Lᵀ`.
    pub fn chol(&self) -> &Matrix {
        &self.chol
    }

    pub fn logdet(&self) -> f64 {
        self.logdet
    }

    pub fn det(&self) -> f64 {
        self.logdet.exp()
    }

    /// Solves `A y = b` by forward and back substitution on the cached factor.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>, LinalgError> {
        let n = self.dim();
        if b.len() != n {
            return Err(LinalgError::DimensionMismatch {
                expected: n,
                got: b.len(),
            });
        }
        let l = &self.chol;
        let mut y = vec![0.0; n];
        for i in 0..n {
            let s = b[i] - dot(&l.row(i)[..i], &y[..i]);
            y[i] = s / l[(i, i)];
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let mut s = y[i];
            for j in (i + 1)..n {
                s -= l[(j, i)] * x[j];
            }
            x[i] = s / l[(i, i)];
        }
        Ok(x)
    }

    /// Solves `A Y = B` column by column.
    pub fn solve_matrix(&self, b: &Matrix) -> Result<Matrix, LinalgError> {
        if b.rows() != self.dim() {
            return Err(LinalgError::DimensionMismatch {
                expected: self.dim(),
                got: b.rows(),
            });
        }
        let mut out = Matrix::zeros(b.rows(), b.cols());
        for j in 0..b.cols() {
            let y = self.solve(&b.column(j))?;
            for (i, v) in y.into_iter().enumerate() {
                out[(i, j)] = v;
            }
        }
        Ok(out)
    }
}

/// Lower Cholesky factor. A pivot at or below `1e-12 · max diag` is rejected.
pub fn cholesky(a: &Matrix) -> Result<Matrix, LinalgError> {
    let n = a.rows();
    let cutoff = PD_RELATIVE_PIVOT * a.max_diagonal().max(0.0);
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let mut diag = a[(j, j)];
        for p in 0..j {
            diag -= l[(j, p)] * l[(j, p)];
        }
        if !(diag > cutoff) || diag <= 0.0 {
            return Err(LinalgError::NotPositiveDefinite { pivot: j, value: diag });
        }
        let ljj = diag.sqrt();
        l[(j, j)] = ljj;
        for i in (j + 1)..n {
            let mut s = a[(i, j)];
            for p in 0..j {
                s -= l[(i, p)] * l[(j, p)];
            }
            l[(i, j)] = s / ljj;
        }
    }
    Ok(l)
}

/// `A⁻¹` from the cached Cholesky factor, symmetrized.
pub fn sym_inverse(a: &PosDefMatrix) -> PosDefMatrix {
    let mut inv = a
        .solve_matrix(&Matrix::identity(a.dim()))
        .expect("identity has matching dimension");
    inv.symmetrize();
    // The inverse of a PD matrix is PD; a failure here means the input sat
    // right at the pivot cutoff and rounding pushed the inverse past it.
    PosDefMatrix::new(inv).expect("inverse of a positive definite matrix")
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn v1() -> Matrix {
        Matrix::from_rows(&[&[1.66, 0.32], &[0.32, 1.95]])
    }

    #[test]
    fn logdet_matches_squared_diagonal() {
        let a = PosDefMatrix::new(v1()).unwrap();
        let prod: f64 = (0..2).map(|i| a.chol()[(i, i)].powi(2)).product();
        assert_relative_eq!(a.logdet().exp(), prod, max_relative = 1e-12);
        assert_relative_eq!(a.det(), 3.1346, max_relative = 1e-12);
    }

    #[test]
    fn rejects_non_symmetric_and_indefinite() {
        let ns = Matrix::from_rows(&[&[1.0, 0.5], &[0.4, 1.0]]);
        assert!(matches!(PosDefMatrix::new(ns), Err(LinalgError::NonSymmetric { .. })));
        let indef = Matrix::from_rows(&[&[1.0, 2.0], &[2.0, 1.0]]);
        assert!(matches!(
            PosDefMatrix::new(indef),
            Err(LinalgError::NotPositiveDefinite { pivot: 1, .. })
        ));
        // Pivot just under the relative cutoff.
        let tiny = Matrix::diag(&[1.0, 1e-13]);
        assert!(PosDefMatrix::new(tiny).is_err());
        assert!(PosDefMatrix::new(Matrix::diag(&[1.0, 1e-11])).is_ok());
    }

    #[test]
    fn inverse_of_scaled_identity() {
        let a = PosDefMatrix::scaled_identity(2, 1.2).unwrap();
        let inv = sym_inverse(&a);
        let expected = Matrix::scaled_identity(2, 1.0 / 1.2);
        assert!(inv.entries().sub(&expected).unwrap().frobenius_norm() < 1e-15);
    }

    #[test]
    fn inverse_of_diagonal() {
        let inv = sym_inverse(&PosDefMatrix::new(Matrix::diag(&[2.0, 4.0])).unwrap());
        let err = inv.entries().sub(&Matrix::diag(&[0.5, 0.25])).unwrap().frobenius_norm();
        assert!(err <= 1e-15, "{err}");
    }

    #[test]
    fn inverse_of_counterexample_matrix_matches_closed_form() {
        // 2x2 closed form: [[d, -b], [-c, a]] / (ad - bc)
        let (a, b, d) = (1.66, 0.32, 1.95);
        let det = a * d - b * b;
        let closed = Matrix::from_rows(&[&[d / det, -b / det], &[-b / det, a / det]]);
        let inv = sym_inverse(&PosDefMatrix::new(v1()).unwrap());
        assert!(inv.entries().sub(&closed).unwrap().frobenius_norm() < 1e-14);
        let prod = v1().matmul(inv.entries()).unwrap();
        assert!(prod.sub(&Matrix::identity(2)).unwrap().frobenius_norm() <= 1e-10 * 2.0);
    }

    #[test]
    fn solve_round_trip() {
        let a = PosDefMatrix::new(v1()).unwrap();
        let x = a.solve(&[1.0, -2.0]).unwrap();
        let back = v1().mat_vec(&x).unwrap();
        assert_relative_eq!(back[0], 1.0, epsilon = 1e-14);
        assert_relative_eq!(back[1], -2.0, epsilon = 1e-14);
    }
}
