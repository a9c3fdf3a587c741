//! Command-line entry points.
//!
//! Exit codes: 0 success, 2 property or assertion failure, 3 configuration
//! error, 4 I/O error.

mod audit;
mod svg;
mod verify;
mod simulate;

use std::ffi::OsString;
use std::ops::RangeInclusive;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};

pub use audit::{run_audit, AuditReport, ClaimKernel, AUDIT_TOLERANCE, EXPECTED_LHS, EXPECTED_RHS};
pub use simulate::{run_simulate, SimulateArgs, ROUND_CSV_COLUMNS};
pub use svg::render_simulation_svg;
pub use verify::{
    evaluate_instance, run_verify, PropertyOutcome, SweepConfig, TrialOutcome, VerifyInstance, VerifySummary,
    PROPERTIES,
};

use crate::env::EnvConfig;

/// Overrides the seed of `simulate` configs and `verify` sweeps.
pub const SEED_ENV_VAR: &str = "C2UCB_LAB_SEED";

pub const EXIT_OK: i32 = 0;
pub const EXIT_PROPERTY_FAILURE: i32 = 2;
pub const EXIT_CONFIG_ERROR: i32 = 3;
pub const EXIT_IO_ERROR: i32 = 4;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("property failure: {0}")]
    PropertyFailed(String),
    #[error("assertion failed: {0}")]
    AssertionFailed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG_ERROR,
            CliError::Io(_) => EXIT_IO_ERROR,
            CliError::PropertyFailed(_) | CliError::AssertionFailed(_) => EXIT_PROPERTY_FAILURE,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CommandKind {
    Audit,
    Verify,
    Simulate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ManifestConfig {
    Env(EnvConfig),
    Sweep(SweepConfig),
}

/// What a batch run was asked to do; written next to its outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: CommandKind,
    pub config: ManifestConfig,
    pub output_dir: PathBuf,
    pub emit_svg: bool,
}

#[derive(Debug, Parser)]
#[command(name = "c2ucb-lab", version, about = "Audited contextual combinatorial UCB bandit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Reproduce the fixed 2-d counterexample and check both determinant sides.
    Audit {
        #[arg(long)]
        json: bool,
        /// Self-test: evaluate the claimed product with the outer-product
        /// determinant instead of inner products. Must make the audit fail.
        #[arg(long, hide = true)]
        corrupt_kernel: bool,
    },
    /// Randomized property sweeps over the ledger.
    Verify {
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value = "2..6", value_parser = parse_range)]
        d_range: RangeInclusive<usize>,
        #[arg(long, default_value = "1..4", value_parser = parse_range)]
        k_range: RangeInclusive<usize>,
        #[arg(long, default_value = "1..20", value_parser = parse_range)]
        n_range: RangeInclusive<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Draw every round's contexts along a single direction.
        #[arg(long)]
        colinear_only: bool,
        /// Replace the first trial with the fixed counterexample instance.
        #[arg(long)]
        inject_counterexample: bool,
        /// Re-run a single instance from a replay file.
        #[arg(long)]
        replay: Option<PathBuf>,
        /// Directory for summary.csv, summary.json and replay files.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the policy on a synthetic environment.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        svg: bool,
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        /// Regularizer scale; defaults to k (1.2 for the counterexample regime).
        #[arg(long)]
        lambda: Option<f64>,
        /// Baseline policy instead of UCB.
        #[arg(long)]
        uniform_random: bool,
    },
}

/// Parses `A..B` (inclusive on both ends).
pub fn parse_range(s: &str) -> Result<RangeInclusive<usize>, String> {
    let (a, b) = s
        .split_once("..")
        .ok_or_else(|| format!("expected A..B, got {s:?}"))?;
    let b = b.strip_prefix('=').unwrap_or(b);
    let a: usize = a.trim().parse().map_err(|e| format!("bad range start {a:?}: {e}"))?;
    let b: usize = b.trim().parse().map_err(|e| format!("bad range end {b:?}: {e}"))?;
    if a > b {
        return Err(format!("empty range {s:?}"));
    }
    Ok(a..=b)
}

pub(crate) fn seed_override() -> Result<Option<u64>, CliError> {
    match std::env::var(SEED_ENV_VAR) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|e| CliError::Config(format!("{SEED_ENV_VAR}={v:?}: {e}"))),
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(CliError::Config(format!("{SEED_ENV_VAR}: {e}"))),
    }
}

/// Parses arguments, runs the command, and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG_ERROR } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match run(cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Audit { json, corrupt_kernel } => {
            let kernel = if corrupt_kernel {
                ClaimKernel::OuterProductDeterminant
            } else {
                ClaimKernel::InnerProduct
            };
            let report = run_audit(kernel);
            if json {
                println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
            } else {
                print!("{}", report.render_text());
            }
            if report.passed {
                Ok(())
            } else {
                Err(CliError::AssertionFailed(report.failure_reason()))
            }
        }
        Command::Verify {
            trials,
            d_range,
            k_range,
            n_range,
            seed,
            colinear_only,
            inject_counterexample,
            replay,
            out,
        } => {
            let seed = seed_override()?.unwrap_or(seed);
            let sweep = SweepConfig {
                trials,
                d_range,
                k_range,
                n_range,
                seed,
                colinear_only,
                inject_counterexample,
            };
            run_verify(&sweep, replay.as_deref(), out.as_deref())
        }
        Command::Simulate {
            config,
            out,
            svg,
            alpha,
            lambda,
            uniform_random,
        } => {
            let args = SimulateArgs {
                config,
                out,
                svg,
                alpha,
                lambda,
                uniform_random,
            };
            run_simulate(&args).map(|_| ())
        }
    }
}
