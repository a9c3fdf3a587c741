//! Simulation loop: environment → policy → ledger, one [`RoundLog`] per round.

use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use crate::bandit::{instant_regret, select_super_arm, BanditError, PolicyState};
use crate::contexts::RoundContexts;
use crate::env::{substream, EnvError, Environment, Lane, Regime, COUNTEREXAMPLE_SCALE};
use crate::ledger::{BoundReport, Claim1Report, LedgerError, RoundAudit};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Bandit(#[from] BanditError),
}

impl From<LedgerError> for SimError {
    fn from(e: LedgerError) -> Self {
        SimError::Bandit(BanditError::Ledger(e))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    Ucb,
    UniformRandom,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimOptions {
    pub alpha: f64,
    /// `V = lambda · I`; `None` picks `k`, or 1.2 in the counterexample regime.
    pub lambda: Option<f64>,
    pub policy: PolicyKind,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            lambda: None,
            policy: PolicyKind::Ucb,
        }
    }
}

impl SimOptions {
    pub fn lambda_for(&self, env: &Environment) -> f64 {
        self.lambda.unwrap_or(match env.config().regime {
            Regime::Counterexample => COUNTEREXAMPLE_SCALE,
            _ => env.config().k as f64,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundLog {
    pub t: usize,
    pub chosen: Vec<usize>,
    pub scores: Vec<f64>,
    /// Sum of realized rewards over the chosen arms.
    pub realized_reward: f64,
    pub instant_regret: f64,
    pub cumulative_regret: f64,
    pub audit: RoundAudit,
}

#[derive(Debug, Clone)]
pub struct Simulation {
    pub logs: Vec<RoundLog>,
    pub state: PolicyState,
}

impl Simulation {
    pub fn cumulative_regret(&self) -> f64 {
        self.logs.last().map_or(0.0, |l| l.cumulative_regret)
    }

    pub fn claim1(&self) -> Result<Claim1Report, LedgerError> {
        self.state.ledger().claim1_violated()
    }

    pub fn bound(&self) -> Result<BoundReport, LedgerError> {
        self.state.ledger().sum_bound_check()
    }
}

pub fn simulate(env: &Environment, opts: &SimOptions) -> Result<Simulation, SimError> {
    let cfg = env.config();
    let mut state = PolicyState::new(cfg.d, cfg.k, opts.alpha, opts.lambda_for(env))?;
    let mut logs = Vec::with_capacity(cfg.n);
    let mut cumulative = 0.0;
    for t in 1..=cfg.n {
        let contexts = env.contexts(t)?;
        let scores = state.ucb_scores(&contexts)?;
        let chosen = match opts.policy {
            PolicyKind::Ucb => select_super_arm(&scores, cfg.k)?,
            PolicyKind::UniformRandom => {
                let mut rng = substream(cfg.seed, t, Lane::Baseline);
                let mut idx = sample(&mut rng, cfg.m, cfg.k).into_vec();
                idx.sort_unstable();
                idx
            }
        };
        let all_rewards = env.rewards(t, &contexts);
        let rewards: Vec<f64> = chosen.iter().map(|&i| all_rewards[i]).collect();
        let regret = instant_regret(&cfg.theta_star, &contexts, &chosen, cfg.k)?;
        cumulative += regret;
        let played = RoundContexts::select(cfg.d, &contexts, &chosen, 1.0).map_err(LedgerError::from)?;
        let audit = state.observe(&played, &rewards)?;
        logs.push(RoundLog {
            t,
            chosen,
            scores,
            realized_reward: rewards.iter().sum(),
            instant_regret: regret,
            cumulative_regret: cumulative,
            audit,
        });
    }
    Ok(Simulation { logs, state })
}
