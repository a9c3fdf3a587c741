//! Contextual combinatorial UCB with an audited moment-matrix ledger.
//!
//! The ledger tracks `V_t = V + Σ_s X_s X_sᵀ` and, per round, how far the
//! exact determinant growth `det(I + X_tᵀ V_{t-1}⁻¹ X_t)` sits above the
//! scalar `1 + Σ_i ‖x_t(i)‖²_{V_{t-1}⁻¹}`.

pub mod bandit;
pub mod cli;
pub mod contexts;
pub mod env;
pub mod ledger;
pub mod linalg;
pub mod numfmt;
pub mod sim;

pub use contexts::RoundContexts;
pub use env::{EnvConfig, Environment, Regime};
pub use ledger::{LedgerConfig, LedgerError, MomentLedger, RoundAudit};
pub use linalg::{Matrix, PosDefMatrix};
pub use sim::{simulate, SimOptions, Simulation};
