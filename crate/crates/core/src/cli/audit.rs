use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::contexts::RoundContexts;
use crate::env::{COUNTEREXAMPLE_CONTEXTS, COUNTEREXAMPLE_SCALE};
use crate::ledger::{MomentLedger, CLAIM1_TOLERANCE};
use crate::linalg::PosDefMatrix;
use crate::numfmt::sig9;

pub const EXPECTED_LHS: f64 = 2.892;
pub const EXPECTED_RHS: f64 = 3.1346;
pub const AUDIT_TOLERANCE: f64 = 1e-9;

/// How the per-round term of the claimed product is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClaimKernel {
    /// `1 + Σ_i x_iᵀ V⁻¹ x_i`, the scalar the claim is stated with.
    InnerProduct,
    /// `det(I + Σ_i (V^{-1/2} x_i)(V^{-1/2} x_i)ᵀ)`. Produces equality by
    /// construction, so an audit run with it has to fail.
    OuterProductDeterminant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    /// `det(V) ∏(1 + Σ ‖x‖²_{V⁻¹})`.
    pub lhs: f64,
    /// `det(V_1)`.
    pub rhs: f64,
    /// `det(V_1)` from `ad - bc` on the rebuilt 2×2 matrix.
    pub rhs_direct: f64,
    pub lemma1_holds: bool,
    pub claim1_holds: bool,
    pub lhs_matches: bool,
    pub rhs_matches: bool,
    pub passed: bool,
}

impl AuditReport {
    pub fn render_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "counterexample: n = 1, V = 1.2 I_2, S_1 = {{1, 2, 3}}");
        let _ = writeln!(s, "  x_1(1) = [0.3, 0.7], x_1(2) = [0.6, 0.1], x_1(3) = [0.1, 0.5]");
        let _ = writeln!(s, "det(V) * prod_t (1 + sum_i ||x_t(i)||^2_{{V_(t-1)^-1}}) = {}", sig9(self.lhs));
        let _ = writeln!(s, "det(V_1)                                            = {}", sig9(self.rhs));
        let _ = writeln!(
            s,
            "equality claim:   {}",
            if self.claim1_holds { "holds" } else { "FAILS" }
        );
        let _ = writeln!(
            s,
            "lower bound:      {}",
            if self.lemma1_holds { "holds" } else { "FAILS" }
        );
        let _ = writeln!(s, "audit: {}", if self.passed { "PASS" } else { "FAIL" });
        s
    }

    pub fn failure_reason(&self) -> String {
        let mut reasons = Vec::new();
        if !self.lhs_matches {
            reasons.push(format!("lhs {} != {EXPECTED_LHS}", self.lhs));
        }
        if !self.rhs_matches {
            reasons.push(format!("rhs {} != {EXPECTED_RHS}", self.rhs));
        }
        if !self.lemma1_holds {
            reasons.push("lower bound violated".to_string());
        }
        if self.claim1_holds {
            reasons.push("equality claim unexpectedly holds".to_string());
        }
        reasons.join("; ")
    }
}

pub fn run_audit(kernel: ClaimKernel) -> AuditReport {
    let v = PosDefMatrix::scaled_identity(2, COUNTEREXAMPLE_SCALE).expect("1.2 I is positive definite");
    let mut ledger = MomentLedger::new(v, 3).expect("valid ledger");
    let x = RoundContexts::sequential(2, COUNTEREXAMPLE_CONTEXTS.iter().map(|c| c.to_vec()).collect(), 1.0)
        .expect("counterexample contexts");
    let audit = ledger.update_round(&x).expect("counterexample round");

    let log_lhs = match kernel {
        ClaimKernel::InnerProduct => ledger.running_lower_logdet(),
        ClaimKernel::OuterProductDeterminant => ledger.logdet_v0() + audit.round_factor.ln(),
    };
    let lhs = log_lhs.exp();
    let rhs = ledger.logdet_vt().exp();
    let v1 = ledger.rebuild_vt();
    let rhs_direct = v1[(0, 0)] * v1[(1, 1)] - v1[(0, 1)] * v1[(1, 0)];

    let log_gap = ledger.logdet_vt() - log_lhs;
    let lemma1_holds = log_gap >= -CLAIM1_TOLERANCE;
    let claim1_holds = log_gap <= CLAIM1_TOLERANCE;
    let lhs_matches = (lhs - EXPECTED_LHS).abs() <= AUDIT_TOLERANCE;
    let rhs_matches = (rhs - EXPECTED_RHS).abs() <= AUDIT_TOLERANCE && (rhs_direct - EXPECTED_RHS).abs() <= AUDIT_TOLERANCE;
    AuditReport {
        lhs,
        rhs,
        rhs_direct,
        lemma1_holds,
        claim1_holds,
        lhs_matches,
        rhs_matches,
        passed: lhs_matches && rhs_matches && lemma1_holds && !claim1_holds,
    }
}
