//! Moment-matrix ledger.
//!
//! Tracks `V_t = V_{t-1} + X_t X_tᵀ` together with `V_t⁻¹` and `log det V_t`,
//! updating the inverse by a rank-`|S_t|` Woodbury step and the determinant
//! through the `|S_t| × |S_t|` matrix `I + X_tᵀ V_{t-1}⁻¹ X_t`. Each round
//! produces a [`RoundAudit`] recording how far `det(V_t)` sits above the
//! product lower bound `det(V) ∏(1 + Σ_i ‖x_t(i)‖²_{V_{t-1}⁻¹})`.
//!
//! A ledger is a single-writer state machine. Audits are append-only.

mod audit;
mod checks;
mod export;

pub use audit::{
    columns_colinear, equality_certificate, numerical_rank, round_factor_by_expansion, EqualityCertificate,
    Expansion, RoundAudit, COLINEARITY_TOLERANCE, NEGATIVE_EIGENVALUE_TOLERANCE, RANK_TOLERANCE,
};
pub use checks::{BoundReport, Claim1Report, DriftReport, CLAIM1_TOLERANCE, DRIFT_TOLERANCE};
pub use export::{write_audit_csv, AUDIT_CSV_COLUMNS};

use crate::contexts::{ContextError, RoundContexts};
use crate::linalg::{eigvals_sym, lifted_gram, quad_form, sym_inverse, LinalgError, Matrix, PosDefMatrix};

pub const DEFAULT_REFRESH_INTERVAL: usize = 64;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LedgerError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Context(#[from] ContextError),
    #[error("context dimension {got} does not match ledger dimension {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("super arm of size {size} exceeds cap k = {cap}")]
    SuperArmTooLarge { size: usize, cap: usize },
    #[error("super arm is empty")]
    EmptySuperArm,
    #[error("context norm {norm} exceeds configured cap {cap}")]
    ContextNormExceeded { norm: f64, cap: f64 },
    #[error("gram eigenvalue {value:e} is negative beyond tolerance")]
    NegativeEigenvalue { value: f64 },
    #[error("direct product {factor} and elementary-symmetric sum {expanded} disagree")]
    ExpansionMismatch { factor: f64, expanded: f64 },
    #[error("ledger has no rounds")]
    EmptyLedger,
    #[error("bound assumptions not met: {0}")]
    AssumptionsNotMet(String),
    #[error("numerical drift exceeded tolerance: {0:?}")]
    DriftExceeded(Box<DriftReport>),
    #[error("invalid ledger configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LedgerConfig {
    /// Super-arm size cap `k`.
    pub k_cap: usize,
    /// Refactor `V_t` every this many rounds; `0` disables refreshes.
    pub refresh_interval: usize,
    pub max_context_norm: f64,
}

impl LedgerConfig {
    pub fn new(k_cap: usize) -> Self {
        Self {
            k_cap,
            refresh_interval: DEFAULT_REFRESH_INTERVAL,
            max_context_norm: 1.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct MomentLedger {
    config: LedgerConfig,
    v0: PosDefMatrix,
    vt: Matrix,
    vt_inv: PosDefMatrix,
    t: usize,
    logdet_v0: f64,
    logdet_vt: f64,
    running_lower_logdet: f64,
    sum_norms: f64,
    max_seen_norm: f64,
    history: Vec<RoundContexts>,
    audits: Vec<RoundAudit>,
}

impl MomentLedger {
    pub fn new(v: PosDefMatrix, k: usize) -> Result<Self, LedgerError> {
        Self::with_config(v, LedgerConfig::new(k))
    }

    /// Validates a raw matrix as positive definite and opens a ledger on it.
    pub fn from_matrix(v: Matrix, k: usize) -> Result<Self, LedgerError> {
        Self::new(PosDefMatrix::new(v)?, k)
    }

    pub fn with_config(v: PosDefMatrix, config: LedgerConfig) -> Result<Self, LedgerError> {
        if config.k_cap == 0 {
            return Err(LedgerError::InvalidConfig("k must be positive".into()));
        }
        if !(config.max_context_norm > 0.0) {
            return Err(LedgerError::InvalidConfig("max_context_norm must be positive".into()));
        }
        let logdet = v.logdet();
        Ok(Self {
            config,
            vt: v.entries().clone(),
            vt_inv: sym_inverse(&v),
            v0: v,
            t: 0,
            logdet_v0: logdet,
            logdet_vt: logdet,
            running_lower_logdet: logdet,
            sum_norms: 0.0,
            max_seen_norm: 0.0,
            history: Vec::new(),
            audits: Vec::new(),
        })
    }

    pub fn dim(&self) -> usize {
        self.v0.dim()
    }

    pub fn config(&self) -> &LedgerConfig {
        &self.config
    }

    pub fn k_cap(&self) -> usize {
        self.config.k_cap
    }

    pub fn round(&self) -> usize {
        self.t
    }

    pub fn v0(&self) -> &PosDefMatrix {
        &self.v0
    }

    pub fn vt(&self) -> &Matrix {
        &self.vt
    }

    pub fn vt_inv(&self) -> &PosDefMatrix {
        &self.vt_inv
    }

    pub fn logdet_v0(&self) -> f64 {
        self.logdet_v0
    }

    pub fn logdet_vt(&self) -> f64 {
        self.logdet_vt
    }

    pub fn running_lower_logdet(&self) -> f64 {
        self.running_lower_logdet
    }

    pub fn sum_norms(&self) -> f64 {
        self.sum_norms
    }

    /// Largest context norm seen so far.
    pub fn max_seen_norm(&self) -> f64 {
        self.max_seen_norm
    }

    pub fn audits(&self) -> &[RoundAudit] {
        &self.audits
    }

    pub fn history(&self) -> &[RoundContexts] {
        &self.history
    }

    /// Appends one round of played contexts.
    pub fn update_round(&mut self, x: &RoundContexts) -> Result<RoundAudit, LedgerError> {
        let d = self.dim();
        if x.dim() != d {
            return Err(LedgerError::DimensionMismatch {
                expected: d,
                got: x.dim(),
            });
        }
        if x.is_empty() {
            return Err(LedgerError::EmptySuperArm);
        }
        if x.len() > self.config.k_cap {
            return Err(LedgerError::SuperArmTooLarge {
                size: x.len(),
                cap: self.config.k_cap,
            });
        }
        let max_norm = x.max_norm();
        if max_norm > self.config.max_context_norm * (1.0 + 1e-12) {
            return Err(LedgerError::ContextNormExceeded {
                norm: max_norm,
                cap: self.config.max_context_norm,
            });
        }

        let xm = x.matrix();
        let vinv = self.vt_inv.entries();
        let w = vinv.matmul(&xm)?;
        let mut gram = xm.transpose().matmul(&w)?;
        gram.symmetrize();

        let round_norm_sum: f64 = x
            .columns()
            .iter()
            .map(|c| quad_form(c, vinv))
            .sum::<Result<f64, _>>()?;
        let gram_trace = gram.trace();

        let inner = audit::identity_plus(&gram)?;
        let log_factor = inner.logdet();
        let round_factor = log_factor.exp();
        let gram_eigs = eigvals_sym(&gram)?;
        let expansion = round_factor_by_expansion(&gram_eigs)?;
        let gram_rank = numerical_rank(&gram_eigs);

        // V⁻¹ ← V⁻¹ - W (I + XᵀV⁻¹X)⁻¹ Wᵀ
        let z = inner.solve_matrix(&w.transpose())?;
        let mut next_inv = vinv.sub(&w.matmul(&z)?)?;
        next_inv.symmetrize();

        for col in x.columns() {
            self.vt.add_outer_sym(col, 1.0);
        }
        self.t += 1;
        self.logdet_vt += log_factor;
        self.running_lower_logdet += round_norm_sum.ln_1p();
        self.sum_norms += round_norm_sum;
        self.max_seen_norm = self.max_seen_norm.max(max_norm);
        self.history.push(x.clone());

        let refresh_due = self.config.refresh_interval > 0 && self.t % self.config.refresh_interval == 0;
        let refreshed = match PosDefMatrix::new(next_inv) {
            Ok(inv) if !refresh_due => {
                self.vt_inv = inv;
                false
            }
            // A Woodbury step that loses definiteness forces an early refresh.
            _ => {
                self.refresh()?;
                true
            }
        };

        let audit = RoundAudit {
            round: self.t,
            arm_ids: x.arm_ids().to_vec(),
            round_norm_sum,
            gram_trace,
            round_factor,
            log_round_factor: log_factor,
            round_factor_expanded: expansion.expanded,
            truncated_factor: expansion.truncated,
            gram_eigs,
            gram_rank,
            equality_gap: round_factor - (1.0 + round_norm_sum),
            logdet_vt: self.logdet_vt,
            running_lower_logdet: self.running_lower_logdet,
            sum_norms: self.sum_norms,
            two_delta_logdet: 2.0 * (self.logdet_vt - self.logdet_v0),
            refreshed,
        };
        self.audits.push(audit.clone());
        Ok(audit)
    }

    /// Refactors the accumulated `V_t` and replaces the maintained inverse
    /// and log-determinant.
    fn refresh(&mut self) -> Result<(), LedgerError> {
        let pd = PosDefMatrix::new(self.vt.clone())?;
        self.logdet_vt = pd.logdet();
        self.vt_inv = sym_inverse(&pd);
        Ok(())
    }

    /// `V_0 + Σ_τ X_τ X_τᵀ` recomputed from the stored rounds.
    pub fn rebuild_vt(&self) -> Matrix {
        let mut v = self.v0.entries().clone();
        for round in &self.history {
            for col in round.columns() {
                v.add_outer_sym(col, 1.0);
            }
        }
        v
    }

    /// `X_tᵀ V⁻¹ X_t` against the ledger's current inverse, for a prospective round.
    pub fn prospective_gram(&self, x: &RoundContexts) -> Result<Matrix, LedgerError> {
        Ok(lifted_gram(self.vt_inv.entries(), &x.matrix())?)
    }
}

/// `|a - b| ≤ tol · max(|a|, |b|)`, with exact equality always accepted.
pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    a == b || (a - b).abs() <= tol * a.abs().max(b.abs())
}
