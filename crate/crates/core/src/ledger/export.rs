use std::io::{self, Write};

use super::RoundAudit;
use crate::numfmt::sig9;

pub const AUDIT_CSV_COLUMNS: [&str; 9] = [
    "t",
    "round_norm_sum",
    "round_factor",
    "gram_rank",
    "equality_gap",
    "logdet_Vt",
    "running_lower_logdet",
    "sum_norms",
    "two_delta_logdet",
];

/// One row per round, header first.
pub fn write_audit_csv<W: Write>(mut out: W, audits: &[RoundAudit]) -> io::Result<()> {
    writeln!(out, "{}", AUDIT_CSV_COLUMNS.join(","))?;
    for a in audits {
        writeln!(out, "{}", audit_row(a).join(","))?;
    }
    Ok(())
}

pub(crate) fn audit_row(a: &RoundAudit) -> Vec<String> {
    vec![
        a.round.to_string(),
        sig9(a.round_norm_sum),
        sig9(a.round_factor),
        a.gram_rank.to_string(),
        sig9(a.equality_gap),
        sig9(a.logdet_vt),
        sig9(a.running_lower_logdet),
        sig9(a.sum_norms),
        sig9(a.two_delta_logdet),
    ]
}
