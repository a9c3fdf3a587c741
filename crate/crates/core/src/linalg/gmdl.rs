//! Determinant lemma for low-rank updates and the quadratic forms built on it.

use super::matrix::{lu_log_abs_det, Matrix};
use super::posdef::PosDefMatrix;
use super::LinalgError;

/// The `m × m` matrix `I_m + Cᵀ A⁻¹ B`.
pub fn gmdl_inner(a: &PosDefMatrix, b: &Matrix, c: &Matrix) -> Result<Matrix, LinalgError> {
    check_update_shapes(a.dim(), b, c)?;
    let a_inv_b = a.solve_matrix(b)?;
    let mut inner = c.transpose().matmul(&a_inv_b)?;
    for i in 0..inner.rows() {
        inner[(i, i)] += 1.0;
    }
    Ok(inner)
}

/// Sign and log-magnitude of `det(A + B Cᵀ)`, evaluated as
/// `det(I_m + Cᵀ A⁻¹ B) · det(A)` without forming the `d × d` sum.
pub fn gmdl_log_det(a: &PosDefMatrix, b: &Matrix, c: &Matrix) -> Result<(f64, f64), LinalgError> {
    let inner = gmdl_inner(a, b, c)?;
    let (sign, log_abs) = lu_log_abs_det(&inner)?;
    Ok((sign, log_abs + a.logdet()))
}

/// `det(A + B Cᵀ)` through the `m × m` route.
pub fn gmdl_det(a: &PosDefMatrix, b: &Matrix, c: &Matrix) -> Result<f64, LinalgError> {
    let (sign, log_abs) = gmdl_log_det(a, b, c)?;
    Ok(sign * log_abs.exp())
}

fn check_update_shapes(d: usize, b: &Matrix, c: &Matrix) -> Result<(), LinalgError> {
    if b.rows() != d {
        return Err(LinalgError::DimensionMismatch {
            expected: d,
            got: b.rows(),
        });
    }
    if c.rows() != d {
        return Err(LinalgError::DimensionMismatch {
            expected: d,
            got: c.rows(),
        });
    }
    if b.cols() != c.cols() {
        return Err(LinalgError::ShapeMismatch {
            left: (b.rows(), b.cols()),
            right: (c.rows(), c.cols()),
        });
    }
    Ok(())
}

/// `‖x‖²_M = xᵀ M x`.
pub fn mahalanobis_sq(x: &[f64], m: &PosDefMatrix) -> Result<f64, LinalgError> {
    quad_form(x, m.entries())
}

/// `xᵀ M x` against a raw square matrix, clamped at zero.
pub fn quad_form(x: &[f64], m: &Matrix) -> Result<f64, LinalgError> {
    if x.len() != m.rows() || !m.is_square() {
        return Err(LinalgError::DimensionMismatch {
            expected: m.rows(),
            got: x.len(),
        });
    }
    let mx = m.mat_vec(x)?;
    Ok(super::matrix::dot(x, &mx).max(0.0))
}

/// `Xᵀ M X` for a symmetric `M`, returned exactly symmetric.
pub fn lifted_gram(m: &Matrix, x: &Matrix) -> Result<Matrix, LinalgError> {
    if m.rows() != x.rows() {
        return Err(LinalgError::DimensionMismatch {
            expected: m.rows(),
            got: x.rows(),
        });
    }
    let mut g = x.transpose().matmul(&m.matmul(x)?)?;
    g.symmetrize();
    Ok(g)
}
