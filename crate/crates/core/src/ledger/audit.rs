//! Per-round audit records and the pieces that produce them: the
//! elementary-symmetric expansion of `det(I + G)` and the co-linearity
//! certificate for rounds where the lower bound is tight.

use serde::{Deserialize, Serialize};

use super::{rel_close, LedgerError};
use crate::contexts::RoundContexts;
use crate::linalg::{dot, eigvals_sym, lifted_gram, norm2, quad_form, Matrix, PosDefMatrix};

/// Eigenvalues below this are an error; between it and zero they are clamped.
pub const NEGATIVE_EIGENVALUE_TOLERANCE: f64 = 1e-10;
/// Relative cutoff for counting a Gram eigenvalue as nonzero.
pub const RANK_TOLERANCE: f64 = 1e-10;
/// Relative cutoff for a 2×2 minor of the context matrix to count as zero.
pub const COLINEARITY_TOLERANCE: f64 = 1e-12;

const EXPANSION_AGREEMENT: f64 = 1e-10;
const AUDIT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundAudit {
    pub round: usize,
    pub arm_ids: Vec<usize>,
    /// `Σ_i ‖x_t(i)‖²` under `V_{t-1}⁻¹`, one quadratic form per column.
    pub round_norm_sum: f64,
    /// `trace(X_tᵀ V_{t-1}⁻¹ X_t)` read off the Gram matrix diagonal.
    pub gram_trace: f64,
    /// `det(I + X_tᵀ V_{t-1}⁻¹ X_t)` from a Cholesky factorization.
    pub round_factor: f64,
    /// Log of `round_factor`, taken from the factorization directly.
    pub log_round_factor: f64,
    /// The same determinant as `Σ_j e_j(λ)`.
    pub round_factor_expanded: f64,
    /// `1 + e_1(λ)`, the part of the expansion the lower bound keeps.
    pub truncated_factor: f64,
    pub gram_eigs: Vec<f64>,
    pub gram_rank: usize,
    /// `round_factor - (1 + round_norm_sum)`.
    pub equality_gap: f64,
    pub logdet_vt: f64,
    pub running_lower_logdet: f64,
    pub sum_norms: f64,
    pub two_delta_logdet: f64,
    /// True when `V_t⁻¹` and `log det V_t` were refactored after this round.
    pub refreshed: bool,
}

impl RoundAudit {
    /// Names of the record-level invariants this audit breaks; empty when sound.
    pub fn invariant_violations(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if self.round_factor < 1.0 + self.round_norm_sum - AUDIT_TOLERANCE * self.round_factor {
            out.push("lower_bound_step");
        }
        let eig_sum: f64 = self.gram_eigs.iter().sum();
        if !rel_close(self.round_norm_sum, eig_sum, AUDIT_TOLERANCE)
            || !rel_close(self.round_norm_sum, self.gram_trace, AUDIT_TOLERANCE)
            || !rel_close(self.gram_trace, eig_sum, AUDIT_TOLERANCE)
        {
            out.push("trace_identity");
        }
        if self.gram_rank <= 1 && self.equality_gap.abs() > AUDIT_TOLERANCE * self.round_factor {
            out.push("rank_one_equality");
        }
        if !rel_close(self.round_factor, self.round_factor_expanded, AUDIT_TOLERANCE) {
            out.push("expansion_agreement");
        }
        out
    }
}

/// `∏(1 + λ_i)` evaluated directly and as a sum of elementary symmetric
/// polynomials of the eigenvalues.
#[derive(Debug, Clone, PartialEq)]
pub struct Expansion {
    pub factor: f64,
    pub expanded: f64,
    /// `e_0, e_1, …, e_|S|`.
    pub elementary: Vec<f64>,
    pub truncated: f64,
}

impl Expansion {
    /// `Σ_{j≥2} e_j`, the terms dropped by the lower bound.
    pub fn dropped(&self) -> f64 {
        self.elementary.iter().skip(2).sum()
    }
}

pub fn round_factor_by_expansion(gram_eigs: &[f64]) -> Result<Expansion, LedgerError> {
    let mut eigs = Vec::with_capacity(gram_eigs.len());
    for &l in gram_eigs {
        if !(l >= -NEGATIVE_EIGENVALUE_TOLERANCE) {
            return Err(LedgerError::NegativeEigenvalue { value: l });
        }
        eigs.push(l.max(0.0));
    }
    let factor: f64 = eigs.iter().map(|l| 1.0 + l).product();

    // e_j(λ_1..λ_i) = e_j(λ_1..λ_{i-1}) + λ_i e_{j-1}(λ_1..λ_{i-1})
    let mut e = vec![0.0; eigs.len() + 1];
    e[0] = 1.0;
    for (i, &l) in eigs.iter().enumerate() {
        for j in (1..=i + 1).rev() {
            e[j] += l * e[j - 1];
        }
    }
    let expanded: f64 = e.iter().sum();
    if !rel_close(factor, expanded, EXPANSION_AGREEMENT) {
        return Err(LedgerError::ExpansionMismatch { factor, expanded });
    }
    let truncated = 1.0 + e.get(1).copied().unwrap_or(0.0);
    Ok(Expansion {
        factor,
        expanded,
        elementary: e,
        truncated,
    })
}

/// Number of eigenvalues above `1e-10 · (1 + λ_max)`.
pub fn numerical_rank(eigs: &[f64]) -> usize {
    let largest = eigs.iter().copied().fold(0.0_f64, f64::max);
    let cutoff = RANK_TOLERANCE * (1.0 + largest);
    eigs.iter().filter(|&&l| l > cutoff).count()
}

/// Evidence for or against equality `det(I + G) = 1 + trace(G)` in a round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EqualityCertificate {
    pub gram_rank: usize,
    pub gram_eigs: Vec<f64>,
    /// All 2×2 minors of the context matrix are zero within tolerance.
    pub colinear: bool,
    /// Unit direction `u` shared by all columns, when co-linear.
    pub direction: Option<Vec<f64>>,
    /// Coefficients `a_i` with `x_i = a_i u`, when co-linear.
    pub coefficients: Option<Vec<f64>>,
    pub trace: f64,
    /// `‖u‖²_{V⁻¹} · ‖a‖²`, when co-linear.
    pub predicted_trace: Option<f64>,
    pub round_factor: f64,
    pub truncated_factor: f64,
    /// `Some(true)` when co-linearity held and every equality check passed;
    /// `None` when the columns are not co-linear and nothing is asserted.
    pub equality_holds: Option<bool>,
}

pub fn equality_certificate(
    x: &RoundContexts,
    vprev_inv: &PosDefMatrix,
) -> Result<EqualityCertificate, LedgerError> {
    let xm = x.matrix();
    let gram = lifted_gram(vprev_inv.entries(), &xm)?;
    let gram_eigs = eigvals_sym(&gram)?;
    let gram_rank = numerical_rank(&gram_eigs);
    let trace = gram.trace();
    let round_factor = identity_plus(&gram)?.det();
    let truncated_factor = 1.0 + trace;
    let colinear = columns_colinear(x.columns());

    let mut cert = EqualityCertificate {
        gram_rank,
        gram_eigs,
        colinear,
        direction: None,
        coefficients: None,
        trace,
        predicted_trace: None,
        round_factor,
        truncated_factor,
        equality_holds: None,
    };
    if colinear {
        let anchor = x
            .columns()
            .iter()
            .max_by(|a, b| norm2(a).total_cmp(&norm2(b)))
            .expect("round has at least one column");
        let anchor_norm = norm2(anchor);
        let u: Vec<f64> = if anchor_norm > 0.0 {
            anchor.iter().map(|v| v / anchor_norm).collect()
        } else {
            vec![0.0; x.dim()]
        };
        let a: Vec<f64> = x.columns().iter().map(|c| dot(c, &u)).collect();
        let predicted = quad_form(&u, vprev_inv.entries())? * dot(&a, &a);
        let holds = gram_rank <= 1
            && rel_close(trace, predicted, AUDIT_TOLERANCE)
            && (round_factor - truncated_factor).abs() <= AUDIT_TOLERANCE * round_factor;
        cert.direction = Some(u);
        cert.coefficients = Some(a);
        cert.predicted_trace = Some(predicted);
        cert.equality_holds = Some(holds);
    }
    Ok(cert)
}

/// Every 2×2 minor `x_i[p] x_j[q] - x_i[q] x_j[p]` is at most
/// `1e-12 · ‖x_i‖ ‖x_j‖` in magnitude.
pub fn columns_colinear(columns: &[Vec<f64>]) -> bool {
    for i in 0..columns.len() {
        for j in (i + 1)..columns.len() {
            let (xi, xj) = (&columns[i], &columns[j]);
            let cutoff = COLINEARITY_TOLERANCE * norm2(xi) * norm2(xj);
            for p in 0..xi.len() {
                for q in (p + 1)..xi.len() {
                    let minor = xi[p] * xj[q] - xi[q] * xj[p];
                    if minor.abs() > cutoff {
                        return false;
                    }
                }
            }
        }
    }
    true
}

pub(crate) fn identity_plus(gram: &Matrix) -> Result<PosDefMatrix, LedgerError> {
    let mut m = gram.clone();
    for i in 0..m.rows() {
        m[(i, i)] += 1.0;
    }
    Ok(PosDefMatrix::new(m)?)
}
