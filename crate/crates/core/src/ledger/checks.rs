use serde::{Deserialize, Serialize};

use super::{LedgerError, MomentLedger};
use crate::linalg::{eigvals_sym, sym_inverse, PosDefMatrix};

/// Log-space margin above which `log det V_t` is considered strictly larger
/// than the claimed product.
pub const CLAIM1_TOLERANCE: f64 = 1e-9;
/// Relative discrepancy allowed between maintained and rebuilt state.
pub const DRIFT_TOLERANCE: f64 = 1e-8;

const BOUND_TOLERANCE: f64 = 1e-9;
const NORM_CAP_SLACK: f64 = 1e-12;

/// Compares `log det V_t` against the claimed equality
/// `log det V + Σ_τ log(1 + Σ_i ‖x_τ(i)‖²_{V_{τ-1}⁻¹})`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Claim1Report {
    pub violated: bool,
    pub rounds: usize,
    /// `log det V_t`.
    pub logdet_actual: f64,
    /// Log of the claimed right-hand side.
    pub logdet_claimed: f64,
    pub log_gap: f64,
    /// `det V_t / claimed`.
    pub multiplicative_gap: f64,
}

impl Claim1Report {
    pub fn det_actual(&self) -> f64 {
        self.logdet_actual.exp()
    }

    pub fn det_claimed(&self) -> f64 {
        self.logdet_claimed.exp()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub rounds: usize,
    pub sum_norms: f64,
    /// `2 (log det V_t - log det V)`.
    pub two_delta_logdet: f64,
    pub holds: bool,
    /// `Σ_i ‖x_τ(i)‖² ≤ 1` in every round, which is what licenses
    /// `a ≤ 2 log(1 + a)`.
    pub per_round_condition_holds: bool,
    pub max_round_norm_sum: f64,
    /// The bound on every prefix `τ ≤ t`.
    pub prefix_holds: bool,
    /// Smallest `2Δ log det - sum_norms` over all prefixes.
    pub worst_prefix_slack: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftReport {
    pub rounds: usize,
    pub vt_rel_frobenius: f64,
    pub vt_inv_rel_frobenius: f64,
    pub logdet_abs: f64,
    pub logdet_rel: f64,
}

impl DriftReport {
    pub fn within(&self, tol: f64) -> bool {
        self.vt_rel_frobenius <= tol && self.vt_inv_rel_frobenius <= tol && self.logdet_rel <= tol
    }
}

impl MomentLedger {
    pub fn claim1_violated(&self) -> Result<Claim1Report, LedgerError> {
        if self.t == 0 {
            return Err(LedgerError::EmptyLedger);
        }
        let log_gap = self.logdet_vt - self.running_lower_logdet;
        Ok(Claim1Report {
            violated: log_gap > CLAIM1_TOLERANCE,
            rounds: self.t,
            logdet_actual: self.logdet_vt,
            logdet_claimed: self.running_lower_logdet,
            log_gap,
            multiplicative_gap: log_gap.exp(),
        })
    }

    /// Checks `Σ_τ Σ_i ‖x_τ(i)‖² ≤ 2 log det V_t - 2 log det V` under the
    /// assumptions `λ_min(V) ≥ k` and `‖x‖ ≤ 1`.
    pub fn sum_bound_check(&self) -> Result<BoundReport, LedgerError> {
        let lambda_min = eigvals_sym(self.v0.entries())?[0];
        let k = self.config.k_cap as f64;
        if lambda_min < k * (1.0 - NORM_CAP_SLACK) {
            return Err(LedgerError::AssumptionsNotMet(format!(
                "smallest eigenvalue of V is {lambda_min}, below k = {k}"
            )));
        }
        if self.max_seen_norm > 1.0 + NORM_CAP_SLACK {
            return Err(LedgerError::AssumptionsNotMet(format!(
                "context norm {} exceeds 1",
                self.max_seen_norm
            )));
        }

        let two_delta = 2.0 * (self.logdet_vt - self.logdet_v0);
        let max_round = self.audits.iter().map(|a| a.round_norm_sum).fold(0.0, f64::max);
        let worst_prefix_slack = self
            .audits
            .iter()
            .map(|a| a.two_delta_logdet - a.sum_norms)
            .fold(f64::INFINITY, f64::min);
        let worst_prefix_slack = if self.audits.is_empty() { 0.0 } else { worst_prefix_slack };
        Ok(BoundReport {
            rounds: self.t,
            sum_norms: self.sum_norms,
            two_delta_logdet: two_delta,
            holds: self.sum_norms <= two_delta + BOUND_TOLERANCE,
            per_round_condition_holds: max_round <= 1.0 + BOUND_TOLERANCE,
            max_round_norm_sum: max_round,
            prefix_holds: worst_prefix_slack >= -BOUND_TOLERANCE,
            worst_prefix_slack,
        })
    }

    /// Rebuilds `V_t` from `V` and the stored rounds, refactors it, and
    /// measures how far the maintained state has drifted.
    pub fn drift_report(&self) -> Result<DriftReport, LedgerError> {
        let rebuilt = self.rebuild_vt();
        let pd = PosDefMatrix::new(rebuilt.clone())?;
        let inv = sym_inverse(&pd);
        let vt_rel = self.vt.sub(&rebuilt)?.frobenius_norm() / rebuilt.frobenius_norm();
        let inv_rel = self.vt_inv.entries().sub(inv.entries())?.frobenius_norm() / inv.entries().frobenius_norm();
        let logdet_abs = (self.logdet_vt - pd.logdet()).abs();
        Ok(DriftReport {
            rounds: self.t,
            vt_rel_frobenius: vt_rel,
            vt_inv_rel_frobenius: inv_rel,
            logdet_abs,
            logdet_rel: logdet_abs / pd.logdet().abs().max(1.0),
        })
    }

    pub fn rebuild_and_verify(&self) -> Result<DriftReport, LedgerError> {
        let report = self.drift_report()?;
        if report.within(DRIFT_TOLERANCE) {
            Ok(report)
        } else {
            Err(LedgerError::DriftExceeded(Box::new(report)))
        }
    }
}
