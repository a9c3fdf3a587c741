//! Dense kernels for small symmetric matrices: Cholesky, Jacobi
//! eigenvalues, and determinant identities for low-rank updates.
//!
//! Determinants are carried as log-determinants; the raw value is only
//! produced on request through `exp`.

mod eigen;
mod gmdl;
mod matrix;
mod posdef;

pub use eigen::{eigh_jacobi, eigvals_sym, shift_identity_eigs, SymmetricEigen};
pub use gmdl::{gmdl_det, gmdl_inner, gmdl_log_det, lifted_gram, mahalanobis_sq, quad_form};
pub use matrix::{dot, lu_log_abs_det, norm2, Matrix};
pub use posdef::{cholesky, sym_inverse, PosDefMatrix};

/// Absolute tolerance on `|A[i,j] - A[j,i]|` for inputs declared symmetric.
pub const SYMMETRY_TOLERANCE: f64 = 1e-12;

/// A Cholesky pivot at or below this fraction of the largest diagonal entry
/// is treated as a loss of positive definiteness.
pub const PD_RELATIVE_PIVOT: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LinalgError {
    #[error("matrix is not symmetric (max asymmetry {asymmetry:e})")]
    NonSymmetric { asymmetry: f64 },
    #[error("matrix is not positive definite (pivot {pivot} = {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("shape mismatch: {left:?} vs {right:?}")]
    ShapeMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix has zero dimension")]
    Empty,
}
