//! Randomized property sweeps over the ledger.
//!
//! Each trial draws a positive definite `V` with `λ_min(V) ≥ k`, a horizon,
//! and `k` contexts per round, then runs every property against the same
//! instance. Failing instances are written out as replay files that can be
//! fed back with `verify --replay FILE`.

use std::fs;
use std::io::Write as _;
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{CliError, CommandKind, ManifestConfig, RunManifest};
use crate::contexts::RoundContexts;
use crate::env::{sample_unit_ball, sample_unit_sphere, COUNTEREXAMPLE_CONTEXTS, COUNTEREXAMPLE_SCALE};
use crate::ledger::{rel_close, LedgerError, MomentLedger, CLAIM1_TOLERANCE};
use crate::linalg::{Matrix, PosDefMatrix};

pub const PROPERTIES: [&str; 8] = [
    "lemma1",
    "trace_identity",
    "telescoping",
    "sharpness",
    "sum_bound",
    "monotone_logdet",
    "gmdl_route",
    "drift",
];

const LEMMA_TOLERANCE: f64 = 1e-9;
const TRACE_TOLERANCE: f64 = 1e-9;
const TELESCOPE_TOLERANCE: f64 = 1e-10;
const SHARPNESS_TOLERANCE: f64 = 1e-9;
const ROUTE_TOLERANCE: f64 = 1e-9;
/// Absolute floor for the route comparison: the `d × d` side is a difference
/// of two log-determinants and loses digits when the increment is tiny.
const ROUTE_FLOOR: f64 = 1e-12;
const MONOTONE_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub trials: usize,
    pub d_range: RangeInclusive<usize>,
    pub k_range: RangeInclusive<usize>,
    pub n_range: RangeInclusive<usize>,
    pub seed: u64,
    pub colinear_only: bool,
    pub inject_counterexample: bool,
}

impl SweepConfig {
    pub fn new(trials: usize, seed: u64) -> Self {
        Self {
            trials,
            d_range: 2..=6,
            k_range: 1..=4,
            n_range: 1..=20,
            seed,
            colinear_only: false,
            inject_counterexample: false,
        }
    }

    fn validate(&self) -> Result<(), CliError> {
        if self.trials == 0 {
            return Err(CliError::Config("trials must be at least 1".into()));
        }
        for (name, r) in [("d", &self.d_range), ("k", &self.k_range), ("n", &self.n_range)] {
            if r.is_empty() || *r.start() == 0 {
                return Err(CliError::Config(format!("{name} range must be nonempty and positive")));
            }
        }
        Ok(())
    }
}

/// A self-contained ledger run: `V`, `k`, and every round's played contexts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyInstance {
    pub label: String,
    pub v0: Vec<Vec<f64>>,
    pub k: usize,
    pub rounds: Vec<Vec<Vec<f64>>>,
}

impl VerifyInstance {
    pub fn random(trial: usize, sweep: &SweepConfig) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(sweep.seed);
        rng.set_stream(trial as u64);
        let d = rng.random_range(sweep.d_range.clone());
        let k = rng.random_range(sweep.k_range.clone());
        let n = rng.random_range(sweep.n_range.clone());

        // V = λ I + ½ B Bᵀ with λ ∈ [k, 2k), so λ_min(V) ≥ k.
        let lambda = k as f64 * (1.0 + rng.random::<f64>());
        let mut v = Matrix::scaled_identity(d, lambda);
        for _ in 0..d {
            let b: Vec<f64> = (0..d)
                .map(|_| rng.sample::<f64, _>(StandardNormal) / (d as f64).sqrt())
                .collect();
            v.add_outer_sym(&b, 0.5);
        }

        let rounds = (0..n)
            .map(|_| {
                if sweep.colinear_only {
                    let u = sample_unit_sphere(d, &mut rng);
                    (0..k)
                        .map(|_| {
                            let a: f64 = rng.random();
                            u.iter().map(|x| a * x).collect()
                        })
                        .collect()
                } else {
                    (0..k).map(|_| sample_unit_ball(d, &mut rng)).collect()
                }
            })
            .collect();
        Self {
            label: format!("seed {} trial {}", sweep.seed, trial),
            v0: (0..d).map(|i| v.row(i).to_vec()).collect(),
            k,
            rounds,
        }
    }

    pub fn counterexample() -> Self {
        Self {
            label: "counterexample".into(),
            v0: vec![vec![COUNTEREXAMPLE_SCALE, 0.0], vec![0.0, COUNTEREXAMPLE_SCALE]],
            k: 3,
            rounds: vec![COUNTEREXAMPLE_CONTEXTS.iter().map(|c| c.to_vec()).collect()],
        }
    }

    pub fn dim(&self) -> usize {
        self.v0.len()
    }

    fn v0_matrix(&self) -> Result<Matrix, LedgerError> {
        let rows: Vec<&[f64]> = self.v0.iter().map(|r| r.as_slice()).collect();
        if rows.iter().any(|r| r.len() != rows.len()) {
            return Err(LedgerError::InvalidConfig("v0 must be square".into()));
        }
        Ok(Matrix::from_rows(&rows))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", content = "detail", rename_all = "snake_case")]
pub enum PropertyOutcome {
    Pass,
    Fail(String),
    Skipped(String),
}

impl PropertyOutcome {
    pub fn is_fail(&self) -> bool {
        matches!(self, PropertyOutcome::Fail(_))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub outcomes: Vec<(String, PropertyOutcome)>,
    pub claim1_violated: bool,
}

impl TrialOutcome {
    pub fn get(&self, property: &str) -> Option<&PropertyOutcome> {
        self.outcomes.iter().find(|(p, _)| p == property).map(|(_, o)| o)
    }

    pub fn failed(&self) -> Vec<String> {
        self.outcomes
            .iter()
            .filter(|(_, o)| o.is_fail())
            .map(|(p, _)| p.clone())
            .collect()
    }
}

/// Runs the instance through a fresh ledger and checks every property.
pub fn evaluate_instance(inst: &VerifyInstance) -> TrialOutcome {
    match evaluate_inner(inst) {
        Ok(out) => out,
        Err(e) => TrialOutcome {
            outcomes: PROPERTIES
                .iter()
                .map(|p| (p.to_string(), PropertyOutcome::Fail(format!("ledger error: {e}"))))
                .collect(),
            claim1_violated: false,
        },
    }
}

#[derive(Default)]
struct Checks {
    failures: Vec<Vec<String>>,
}

impl Checks {
    fn new() -> Self {
        Self {
            failures: vec![Vec::new(); PROPERTIES.len()],
        }
    }

    fn check(&mut self, property: &str, ok: bool, detail: impl FnOnce() -> String) {
        if !ok {
            let idx = PROPERTIES.iter().position(|p| *p == property).expect("known property");
            if self.failures[idx].len() < 3 {
                self.failures[idx].push(detail());
            }
        }
    }
}

fn evaluate_inner(inst: &VerifyInstance) -> Result<TrialOutcome, LedgerError> {
    let d = inst.dim();
    let v0 = inst.v0_matrix()?;
    let mut ledger = MomentLedger::from_matrix(v0.clone(), inst.k)?;
    let logdet_v0 = ledger.logdet_v0();
    let mut checks = Checks::new();

    let mut fresh = v0;
    let mut prev_fresh_logdet = logdet_v0;
    let mut prev_ledger_logdet = logdet_v0;
    let mut lower_sum = 0.0;
    let mut all_rank_le_one = true;
    let mut strict_round = None;

    for (t, cols) in inst.rounds.iter().enumerate() {
        let t = t + 1;
        let x = RoundContexts::sequential(d, cols.clone(), 1.0)?;
        let a = ledger.update_round(&x)?;
        for c in cols {
            fresh.add_outer_sym(c, 1.0);
        }
        let fresh_logdet = PosDefMatrix::new(fresh.clone())?.logdet();
        lower_sum += a.round_norm_sum.ln_1p();

        // det(V_t) ≥ det(V) ∏(1 + Σ‖x‖²), both sides independent of the ledger's
        // own bookkeeping on the left.
        checks.check("lemma1", fresh_logdet >= logdet_v0 + lower_sum - LEMMA_TOLERANCE, || {
            format!("round {t}: logdet {fresh_logdet} < lower {}", logdet_v0 + lower_sum)
        });
        checks.check(
            "lemma1",
            ledger.logdet_vt() >= ledger.running_lower_logdet() - LEMMA_TOLERANCE,
            || format!("round {t}: ledger logdet below running lower bound"),
        );
        checks.check(
            "lemma1",
            a.round_factor >= 1.0 + a.round_norm_sum - LEMMA_TOLERANCE * a.round_factor,
            || format!("round {t}: factor {} < 1 + {}", a.round_factor, a.round_norm_sum),
        );

        let eig_sum: f64 = a.gram_eigs.iter().sum();
        checks.check(
            "trace_identity",
            rel_close(a.round_norm_sum, a.gram_trace, TRACE_TOLERANCE)
                && rel_close(a.round_norm_sum, eig_sum, TRACE_TOLERANCE)
                && rel_close(a.gram_trace, eig_sum, TRACE_TOLERANCE),
            || format!("round {t}: norms {} trace {} eigs {eig_sum}", a.round_norm_sum, a.gram_trace),
        );

        if a.gram_rank <= 1 {
            checks.check(
                "sharpness",
                a.equality_gap.abs() <= SHARPNESS_TOLERANCE * a.round_factor,
                || format!("round {t}: rank {} but gap {}", a.gram_rank, a.equality_gap),
            );
        } else {
            all_rank_le_one = false;
            let dropped = a.round_factor_expanded - a.truncated_factor;
            if strict_round.is_none() && (dropped / a.truncated_factor).ln_1p() > 2.0 * CLAIM1_TOLERANCE {
                strict_round = Some(t);
            }
        }

        let scale = prev_ledger_logdet.abs().max(1.0);
        checks.check(
            "monotone_logdet",
            a.logdet_vt >= prev_ledger_logdet - MONOTONE_SLACK * scale,
            || format!("round {t}: logdet fell from {prev_ledger_logdet} to {}", a.logdet_vt),
        );
        let any_nonzero = cols.iter().any(|c| c.iter().any(|&v| v != 0.0));
        checks.check("monotone_logdet", !any_nonzero || a.round_factor > 1.0, || {
            format!("round {t}: nonzero contexts but factor {}", a.round_factor)
        });

        let fresh_increment = fresh_logdet - prev_fresh_logdet;
        checks.check(
            "gmdl_route",
            (fresh_increment - a.log_round_factor).abs()
                <= ROUTE_TOLERANCE * fresh_increment.abs().max(a.log_round_factor.abs()) + ROUTE_FLOOR,
            || format!("round {t}: d×d increment {fresh_increment} vs {} route {}", x.len(), a.log_round_factor),
        );

        prev_fresh_logdet = fresh_logdet;
        prev_ledger_logdet = a.logdet_vt;
    }

    // Sum the per-round logs in reverse to decouple from the ledger's order.
    let telescoped = logdet_v0
        + ledger
            .audits()
            .iter()
            .rev()
            .map(|a| a.round_norm_sum.ln_1p())
            .sum::<f64>();
    checks.check(
        "telescoping",
        (telescoped - ledger.running_lower_logdet()).abs() <= TELESCOPE_TOLERANCE,
        || format!("telescoped {telescoped} vs running {}", ledger.running_lower_logdet()),
    );

    let claim1_violated = match ledger.claim1_violated() {
        Ok(r) => r.violated,
        Err(LedgerError::EmptyLedger) => false,
        Err(e) => return Err(e),
    };
    if all_rank_le_one {
        checks.check("sharpness", !claim1_violated, || {
            "every round had rank <= 1 but the equality claim was reported violated".into()
        });
    }
    if let Some(t) = strict_round {
        checks.check("sharpness", claim1_violated, || {
            format!("round {t} dropped nonzero expansion terms but no violation was reported")
        });
    }

    let sum_bound = match ledger.sum_bound_check() {
        Ok(r) => {
            if r.holds && r.per_round_condition_holds && r.prefix_holds {
                PropertyOutcome::Pass
            } else {
                PropertyOutcome::Fail(format!(
                    "sum {} vs 2Δlogdet {}, max round {}, worst prefix slack {}",
                    r.sum_norms, r.two_delta_logdet, r.max_round_norm_sum, r.worst_prefix_slack
                ))
            }
        }
        Err(LedgerError::AssumptionsNotMet(why)) => PropertyOutcome::Skipped(why),
        Err(e) => return Err(e),
    };

    let drift = match ledger.rebuild_and_verify() {
        Ok(_) => PropertyOutcome::Pass,
        Err(LedgerError::DriftExceeded(r)) => PropertyOutcome::Fail(format!("{r:?}")),
        Err(e) => return Err(e),
    };

    let outcomes = PROPERTIES
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            let outcome = match p {
                "sum_bound" => sum_bound.clone(),
                "drift" => drift.clone(),
                _ if checks.failures[i].is_empty() => PropertyOutcome::Pass,
                _ => PropertyOutcome::Fail(checks.failures[i].join("; ")),
            };
            (p.to_string(), outcome)
        })
        .collect();
    Ok(TrialOutcome {
        outcomes,
        claim1_violated,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyTally {
    pub property: String,
    pub trials: usize,
    pub passed: usize,
    pub failed: usize,
    pub skipped: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifySummary {
    pub trials: usize,
    pub tallies: Vec<PropertyTally>,
    pub claim1_violations: usize,
    pub failing_trials: Vec<usize>,
    pub replay_files: Vec<PathBuf>,
}

impl VerifySummary {
    pub fn all_passed(&self) -> bool {
        self.tallies.iter().all(|t| t.failed == 0)
    }

    pub fn tally(&self, property: &str) -> Option<&PropertyTally> {
        self.tallies.iter().find(|t| t.property == property)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("property,trials,passed,failed,skipped\n");
        for t in &self.tallies {
            s.push_str(&format!("{},{},{},{},{}\n", t.property, t.trials, t.passed, t.failed, t.skipped));
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayFile {
    pub trial: usize,
    pub failed: Vec<String>,
    pub instance: VerifyInstance,
}

/// Runs the sweep; failing instances go to `replay_dir` when given.
pub fn sweep(config: &SweepConfig, replay_dir: Option<&Path>) -> Result<VerifySummary, CliError> {
    config.validate()?;
    let mut tallies: Vec<PropertyTally> = PROPERTIES
        .iter()
        .map(|p| PropertyTally {
            property: p.to_string(),
            trials: 0,
            passed: 0,
            failed: 0,
            skipped: 0,
        })
        .collect();
    let mut claim1_violations = 0;
    let mut failing_trials = Vec::new();
    let mut replay_files = Vec::new();

    for trial in 0..config.trials {
        let inst = if trial == 0 && config.inject_counterexample {
            VerifyInstance::counterexample()
        } else {
            VerifyInstance::random(trial, config)
        };
        let outcome = evaluate_instance(&inst);
        claim1_violations += usize::from(outcome.claim1_violated);
        for (tally, (_, o)) in tallies.iter_mut().zip(&outcome.outcomes) {
            tally.trials += 1;
            match o {
                PropertyOutcome::Pass => tally.passed += 1,
                PropertyOutcome::Fail(_) => tally.failed += 1,
                PropertyOutcome::Skipped(_) => tally.skipped += 1,
            }
        }
        let failed = outcome.failed();
        if !failed.is_empty() {
            failing_trials.push(trial);
            if let Some(dir) = replay_dir {
                fs::create_dir_all(dir)?;
                let path = dir.join(format!("replay_trial{trial}.json"));
                let file = ReplayFile {
                    trial,
                    failed,
                    instance: inst,
                };
                fs::write(&path, serde_json::to_string_pretty(&file).expect("replay serializes"))?;
                replay_files.push(path);
            }
        }
    }
    Ok(VerifySummary {
        trials: config.trials,
        tallies,
        claim1_violations,
        failing_trials,
        replay_files,
    })
}

pub fn run_verify(config: &SweepConfig, replay: Option<&Path>, out: Option<&Path>) -> Result<(), CliError> {
    if let Some(path) = replay {
        return run_replay(path);
    }
    let replay_dir = out.map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("verify-replays"));
    let summary = sweep(config, Some(&replay_dir))?;
    print!("{}", summary.to_csv());
    println!(
        "# claim1 violations: {} of {} trials",
        summary.claim1_violations, summary.trials
    );
    if let Some(dir) = out {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("summary.csv"), summary.to_csv())?;
        let manifest = RunManifest {
            command: CommandKind::Verify,
            config: ManifestConfig::Sweep(config.clone()),
            output_dir: dir.to_path_buf(),
            emit_svg: false,
        };
        let json = serde_json::json!({ "manifest": manifest, "summary": summary });
        let mut f = fs::File::create(dir.join("summary.json"))?;
        writeln!(f, "{}", serde_json::to_string_pretty(&json).expect("summary serializes"))?;
    }
    if summary.all_passed() {
        Ok(())
    } else {
        for p in &summary.replay_files {
            eprintln!("replay file: {}", p.display());
        }
        Err(CliError::PropertyFailed(format!(
            "{} trial(s) failed: {:?}",
            summary.failing_trials.len(),
            summary.failing_trials
        )))
    }
}

fn run_replay(path: &Path) -> Result<(), CliError> {
    let text = fs::read_to_string(path)?;
    let file: ReplayFile =
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let outcome = evaluate_instance(&file.instance);
    println!("instance: {}", file.instance.label);
    for (p, o) in &outcome.outcomes {
        let status = match o {
            PropertyOutcome::Pass => "pass".to_string(),
            PropertyOutcome::Fail(why) => format!("FAIL {why}"),
            PropertyOutcome::Skipped(why) => format!("skipped ({why})"),
        };
        println!("{p}: {status}");
    }
    println!("claim1_violated: {}", outcome.claim1_violated);
    let failed = outcome.failed();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::PropertyFailed(format!("replayed failure in {failed:?}")))
    }
}
