//! Optimistic linear policy over super arms.
//!
//! Scores are `θ̂ᵀx + α‖x‖_{V_t⁻¹}` with the ridge estimate `θ̂ = V_t⁻¹ b_t`;
//! the super arm is the top-`k` arms by score. The moment matrix lives in a
//! [`MomentLedger`], so every observation is audited as a side effect.

use crate::contexts::RoundContexts;
use crate::ledger::{LedgerError, MomentLedger, RoundAudit};
use crate::linalg::{dot, quad_form, LinalgError, PosDefMatrix};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BanditError {
    #[error(transparent)]
    Ledger(#[from] LedgerError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("k = {k} must satisfy 1 <= k <= m = {m}")]
    BadK { k: usize, m: usize },
    #[error("vector of dimension {got}, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("{rewards} rewards for {arms} played arms")]
    RewardCountMismatch { rewards: usize, arms: usize },
    #[error("exploration width must be finite and nonnegative, got {0}")]
    InvalidAlpha(f64),
}

#[derive(Debug, Clone)]
pub struct PolicyState {
    ledger: MomentLedger,
    b: Vec<f64>,
    theta_hat: Vec<f64>,
    alpha: f64,
}

impl PolicyState {
    /// Policy with `V = lambda · I_d`.
    pub fn new(d: usize, k: usize, alpha: f64, lambda: f64) -> Result<Self, BanditError> {
        let v = PosDefMatrix::scaled_identity(d, lambda)?;
        Self::from_ledger(MomentLedger::new(v, k)?, alpha)
    }

    /// Policy with the default regularizer `V = k · I_d`.
    pub fn with_default_lambda(d: usize, k: usize, alpha: f64) -> Result<Self, BanditError> {
        Self::new(d, k, alpha, k as f64)
    }

    pub fn from_ledger(ledger: MomentLedger, alpha: f64) -> Result<Self, BanditError> {
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(BanditError::InvalidAlpha(alpha));
        }
        let d = ledger.dim();
        Ok(Self {
            ledger,
            b: vec![0.0; d],
            theta_hat: vec![0.0; d],
            alpha,
        })
    }

    pub fn ledger(&self) -> &MomentLedger {
        &self.ledger
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn theta_hat(&self) -> &[f64] {
        &self.theta_hat
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn k_cap(&self) -> usize {
        self.ledger.k_cap()
    }

    pub fn ucb_scores(&self, contexts: &[Vec<f64>]) -> Result<Vec<f64>, BanditError> {
        let d = self.ledger.dim();
        let vinv = self.ledger.vt_inv().entries();
        contexts
            .iter()
            .map(|x| {
                if x.len() != d {
                    return Err(BanditError::DimensionMismatch {
                        expected: d,
                        got: x.len(),
                    });
                }
                let width = quad_form(x, vinv)?.sqrt();
                Ok(dot(&self.theta_hat, x) + self.alpha * width)
            })
            .collect()
    }

    /// Advances the ledger by the played contexts and refits `θ̂`.
    pub fn observe(&mut self, played: &RoundContexts, rewards: &[f64]) -> Result<RoundAudit, BanditError> {
        if rewards.len() != played.len() {
            return Err(BanditError::RewardCountMismatch {
                rewards: rewards.len(),
                arms: played.len(),
            });
        }
        let audit = self.ledger.update_round(played)?;
        for (x, &r) in played.columns().iter().zip(rewards) {
            for (bi, xi) in self.b.iter_mut().zip(x) {
                *bi += xi * r;
            }
        }
        self.theta_hat = self.ledger.vt_inv().entries().mat_vec(&self.b)?;
        Ok(audit)
    }
}

/// Indices of the `k` largest scores, ties to the smaller index, returned
/// in ascending index order.
pub fn select_super_arm(scores: &[f64], k: usize) -> Result<Vec<usize>, BanditError> {
    let m = scores.len();
    if k == 0 || k > m {
        return Err(BanditError::BadK { k, m });
    }
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| scores[j].total_cmp(&scores[i]).then(i.cmp(&j)));
    let mut chosen = order[..k].to_vec();
    chosen.sort_unstable();
    Ok(chosen)
}

/// Expected-reward shortfall of `chosen` against the best `k`-subset under
/// `theta_star`.
pub fn instant_regret(
    theta_star: &[f64],
    contexts: &[Vec<f64>],
    chosen: &[usize],
    k: usize,
) -> Result<f64, BanditError> {
    if chosen.len() != k || k == 0 || k > contexts.len() {
        return Err(BanditError::BadK { k, m: contexts.len() });
    }
    let mut means = Vec::with_capacity(contexts.len());
    for x in contexts {
        if x.len() != theta_star.len() {
            return Err(BanditError::DimensionMismatch {
                expected: theta_star.len(),
                got: x.len(),
            });
        }
        means.push(dot(theta_star, x));
    }
    let chosen_sum: f64 = chosen.iter().map(|&i| means[i]).sum();
    // For a linear objective the best super arm is the top-k by mean.
    let mut sorted = means;
    sorted.sort_by(|a, b| b.total_cmp(a));
    let best: f64 = sorted[..k].iter().sum();
    Ok(best - chosen_sum)
}
