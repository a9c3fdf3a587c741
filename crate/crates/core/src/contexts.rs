//! Played contexts of one round, in ascending arm order.

use serde::{Deserialize, Serialize};

use crate::linalg::{norm2, Matrix};

/// Slack on the norm cap so that vectors normalized to exactly the cap in
/// floating point are not rejected.
const NORM_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ContextError {
    #[error("super arm is empty")]
    EmptySuperArm,
    #[error("{ids} arm ids for {columns} context columns")]
    LengthMismatch { ids: usize, columns: usize },
    #[error("arm ids must be strictly increasing: {0:?}")]
    UnorderedArms(Vec<usize>),
    #[error("context for arm {arm} has dimension {got}, expected {expected}")]
    DimensionMismatch { arm: usize, expected: usize, got: usize },
    #[error("context for arm {arm} has norm {norm} above cap {cap}")]
    NormExceeded { arm: usize, norm: f64, cap: f64 },
    #[error("context for arm {arm} has a non-finite entry")]
    NonFinite { arm: usize },
}

/// Column matrix `X_t = [x_t(s_1) … x_t(s_|S|)]` with `s_1 < … < s_|S|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundContexts {
    dim: usize,
    arm_ids: Vec<usize>,
    columns: Vec<Vec<f64>>,
}

impl RoundContexts {
    pub fn new(
        dim: usize,
        arm_ids: Vec<usize>,
        columns: Vec<Vec<f64>>,
        max_context_norm: f64,
    ) -> Result<Self, ContextError> {
        if arm_ids.is_empty() || columns.is_empty() {
            return Err(ContextError::EmptySuperArm);
        }
        if arm_ids.len() != columns.len() {
            return Err(ContextError::LengthMismatch {
                ids: arm_ids.len(),
                columns: columns.len(),
            });
        }
        if arm_ids.windows(2).any(|w| w[0] >= w[1]) {
            return Err(ContextError::UnorderedArms(arm_ids));
        }
        for (&arm, col) in arm_ids.iter().zip(&columns) {
            if col.len() != dim {
                return Err(ContextError::DimensionMismatch {
                    arm,
                    expected: dim,
                    got: col.len(),
                });
            }
            if col.iter().any(|v| !v.is_finite()) {
                return Err(ContextError::NonFinite { arm });
            }
            let norm = norm2(col);
            if norm > max_context_norm * (1.0 + NORM_SLACK) {
                return Err(ContextError::NormExceeded {
                    arm,
                    norm,
                    cap: max_context_norm,
                });
            }
        }
        Ok(Self {
            dim,
            arm_ids,
            columns,
        })
    }

    /// Numbers the columns `0..n` as arm ids.
    pub fn sequential(dim: usize, columns: Vec<Vec<f64>>, max_context_norm: f64) -> Result<Self, ContextError> {
        let ids = (0..columns.len()).collect();
        Self::new(dim, ids, columns, max_context_norm)
    }

    /// Picks the chosen arms out of a full round of contexts.
    pub fn select(
        dim: usize,
        all: &[Vec<f64>],
        chosen: &[usize],
        max_context_norm: f64,
    ) -> Result<Self, ContextError> {
        let columns = chosen.iter().map(|&i| all[i].clone()).collect();
        Self::new(dim, chosen.to_vec(), columns, max_context_norm)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    pub fn arm_ids(&self) -> &[usize] {
        &self.arm_ids
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    pub fn max_norm(&self) -> f64 {
        self.columns.iter().map(|c| norm2(c)).fold(0.0, f64::max)
    }

    /// The `d × |S|` matrix with one context per column.
    pub fn matrix(&self) -> Matrix {
        Matrix::from_columns(self.dim, &self.columns).expect("columns validated on construction")
    }
}
