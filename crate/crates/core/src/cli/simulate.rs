use std::fs;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use serde::Serialize;

use super::{render_simulation_svg, seed_override, CliError, CommandKind, ManifestConfig, RunManifest};
use crate::env::{EnvConfig, Environment};
use crate::ledger::{write_audit_csv, LedgerError};
use crate::numfmt::sig9;
use crate::sim::{simulate, PolicyKind, RoundLog, SimOptions, Simulation};

pub const ROUND_CSV_COLUMNS: [&str; 14] = [
    "t",
    "chosen",
    "scores",
    "realized_reward",
    "instant_regret",
    "cumulative_regret",
    "round_norm_sum",
    "round_factor",
    "gram_rank",
    "equality_gap",
    "logdet_Vt",
    "running_lower_logdet",
    "sum_norms",
    "two_delta_logdet",
];

#[derive(Debug, Clone, PartialEq)]
pub struct SimulateArgs {
    pub config: PathBuf,
    pub out: PathBuf,
    pub svg: bool,
    pub alpha: f64,
    pub lambda: Option<f64>,
    pub uniform_random: bool,
}

#[derive(Debug, Clone, Serialize)]
struct SimulateSummary {
    manifest: RunManifest,
    policy: PolicyKind,
    alpha: f64,
    lambda: f64,
    rounds: usize,
    cumulative_regret: f64,
    claim1_violated: Option<bool>,
    claim1_log_gap: Option<f64>,
    sum_bound_holds: Option<bool>,
    sum_bound_note: Option<String>,
}

fn round_row(log: &RoundLog) -> String {
    let a = &log.audit;
    let chosen: Vec<String> = log.chosen.iter().map(|i| i.to_string()).collect();
    let scores: Vec<String> = log.scores.iter().map(|&s| sig9(s)).collect();
    [
        log.t.to_string(),
        chosen.join(";"),
        scores.join(";"),
        sig9(log.realized_reward),
        sig9(log.instant_regret),
        sig9(log.cumulative_regret),
        sig9(a.round_norm_sum),
        sig9(a.round_factor),
        a.gram_rank.to_string(),
        sig9(a.equality_gap),
        sig9(a.logdet_vt),
        sig9(a.running_lower_logdet),
        sig9(a.sum_norms),
        sig9(a.two_delta_logdet),
    ]
    .join(",")
}

fn load_config(args: &SimulateArgs) -> Result<EnvConfig, CliError> {
    let text = fs::read_to_string(&args.config)?;
    let mut cfg: EnvConfig = serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("{}: {e}", args.config.display())))?;
    if let Some(seed) = seed_override()? {
        cfg.seed = seed;
    }
    Ok(cfg)
}

/// Reads the config, runs the simulation and writes `rounds.csv`,
/// `audit.csv`, `summary.json` and optionally `simulate.svg` under `out`.
pub fn run_simulate(args: &SimulateArgs) -> Result<Simulation, CliError> {
    let cfg = load_config(args)?;
    if !args.alpha.is_finite() || args.alpha < 0.0 {
        return Err(CliError::Config(format!("alpha must be finite and nonnegative, got {}", args.alpha)));
    }
    if let Some(l) = args.lambda {
        if !(l.is_finite() && l > 0.0) {
            return Err(CliError::Config(format!("lambda must be positive, got {l}")));
        }
    }
    let env = Environment::new(cfg.clone()).map_err(|e| CliError::Config(e.to_string()))?;
    let opts = SimOptions {
        alpha: args.alpha,
        lambda: args.lambda,
        policy: if args.uniform_random {
            PolicyKind::UniformRandom
        } else {
            PolicyKind::Ucb
        },
    };
    let sim = simulate(&env, &opts).map_err(|e| CliError::Config(e.to_string()))?;

    fs::create_dir_all(&args.out)?;
    let mut rounds = BufWriter::new(fs::File::create(args.out.join("rounds.csv"))?);
    writeln!(rounds, "{}", ROUND_CSV_COLUMNS.join(","))?;
    for log in &sim.logs {
        writeln!(rounds, "{}", round_row(log))?;
    }
    rounds.flush()?;

    let mut audit = BufWriter::new(fs::File::create(args.out.join("audit.csv"))?);
    write_audit_csv(&mut audit, sim.state.ledger().audits())?;
    audit.flush()?;

    let (claim1_violated, claim1_log_gap) = match sim.claim1() {
        Ok(r) => (Some(r.violated), Some(r.log_gap)),
        Err(_) => (None, None),
    };
    let (sum_bound_holds, sum_bound_note) = match sim.bound() {
        Ok(r) => (Some(r.holds && r.prefix_holds), None),
        Err(LedgerError::AssumptionsNotMet(why)) => (None, Some(why)),
        Err(e) => (None, Some(e.to_string())),
    };
    let summary = SimulateSummary {
        manifest: RunManifest {
            command: CommandKind::Simulate,
            config: ManifestConfig::Env(env.config().clone()),
            output_dir: args.out.clone(),
            emit_svg: args.svg,
        },
        policy: opts.policy,
        alpha: opts.alpha,
        lambda: opts.lambda_for(&env),
        rounds: sim.logs.len(),
        cumulative_regret: sim.cumulative_regret(),
        claim1_violated,
        claim1_log_gap,
        sum_bound_holds,
        sum_bound_note,
    };
    fs::write(
        args.out.join("summary.json"),
        serde_json::to_string_pretty(&summary).expect("summary serializes") + "\n",
    )?;
    if args.svg {
        fs::write(args.out.join("simulate.svg"), render_simulation_svg(&sim.logs))?;
    }
    println!(
        "{} rounds, cumulative regret {}, output in {}",
        sim.logs.len(),
        sig9(sim.cumulative_regret()),
        args.out.display()
    );
    Ok(sim)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(dir: &std::path::Path, cfg: &EnvConfig) -> SimulateArgs {
        let path = dir.join("cfg.json");
        fs::write(&path, serde_json::to_string(cfg).unwrap()).unwrap();
        SimulateArgs {
            config: path,
            out: dir.join("out"),
            svg: true,
            alpha: 1.0,
            lambda: None,
            uniform_random: false,
        }
    }

    #[test]
    fn counterexample_outputs() {
        let dir = tempfile::tempdir().unwrap();
        let a = args(dir.path(), &EnvConfig::counterexample());
        run_simulate(&a).unwrap();
        let rounds = fs::read_to_string(a.out.join("rounds.csv")).unwrap();
        let mut lines = rounds.lines();
        assert_eq!(lines.next().unwrap(), ROUND_CSV_COLUMNS.join(","));
        let row: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(row[1], "0;1;2");
        assert_eq!(row[7], "2.17680556");
        assert_eq!(row[8], "2");
        assert!(a.out.join("audit.csv").exists());
        assert!(a.out.join("simulate.svg").exists());
        let summary: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(a.out.join("summary.json")).unwrap()).unwrap();
        assert_eq!(summary["claim1_violated"], true);
    }

    #[test]
    fn bad_config_is_config_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.json");
        fs::write(&path, "{\"d\": 2}").unwrap();
        let a = SimulateArgs {
            config: path,
            out: dir.path().join("out"),
            svg: false,
            alpha: 1.0,
            lambda: None,
            uniform_random: false,
        };
        assert!(matches!(run_simulate(&a), Err(CliError::Config(_))));
    }

    #[test]
    fn missing_config_is_io_error() {
        let dir = tempfile::tempdir().unwrap();
        let a = SimulateArgs {
            config: dir.path().join("nope.json"),
            out: dir.path().join("out"),
            svg: false,
            alpha: 1.0,
            lambda: None,
            uniform_random: false,
        };
        assert_eq!(run_simulate(&a).unwrap_err().exit_code(), super::super::EXIT_IO_ERROR);
    }
}
