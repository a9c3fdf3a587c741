//! Synthetic context and reward generators.
//!
//! Four regimes cover the cases the ledger distinguishes:
//! - `generic`: contexts i.i.d. uniform in the unit ball (strict inequality
//!   almost surely once two or more arms are played),
//! - `colinear`: all contexts of a round are multiples `a_i u_t` of one
//!   fresh unit direction (equality every round),
//! - `single_play`: unit-ball contexts with `k = 1` (equality),
//! - `counterexample`: the fixed 2-d, 3-arm, one-round instance.
//!
//! # Random streams
//!
//! Every draw comes from a ChaCha8 stream keyed by
//! `ChaCha8Rng::seed_from_u64(seed)` (PCG32 key expansion from `rand_core`)
//! with stream id `4·t + lane`, so round `t` of a run can be regenerated
//! without replaying rounds `1..t`. Lanes separate contexts, reward noise,
//! and the uniform-random baseline policy.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::linalg::{dot, norm2};

/// The fixed contexts of the counterexample round.
pub const COUNTEREXAMPLE_CONTEXTS: [[f64; 2]; 3] = [[0.3, 0.7], [0.6, 0.1], [0.1, 0.5]];
/// Scale of `V = c · I_2` in the counterexample.
pub const COUNTEREXAMPLE_SCALE: f64 = 1.2;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EnvError {
    #[error("invalid environment config: {0}")]
    InvalidConfig(String),
    #[error("round {t} outside 1..={n}")]
    BadRound { t: usize, n: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Generic,
    Colinear,
    SinglePlay,
    Counterexample,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Lane {
    Contexts = 0,
    Rewards = 1,
    Baseline = 2,
}

/// Independent generator for `(seed, round, lane)`.
pub fn substream(seed: u64, t: usize, lane: Lane) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((t as u64) << 2) | lane as u64);
    rng
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvConfig {
    pub d: usize,
    pub m: usize,
    pub k: usize,
    pub n: usize,
    pub regime: Regime,
    /// Empty means the default `0.9 · e_1`.
    #[serde(default)]
    pub theta_star: Vec<f64>,
    #[serde(default)]
    pub noise_sigma: f64,
    #[serde(default)]
    pub seed: u64,
}

impl EnvConfig {
    pub fn new(d: usize, m: usize, k: usize, n: usize, regime: Regime, seed: u64) -> Self {
        Self {
            d,
            m,
            k,
            n,
            regime,
            theta_star: default_theta(d),
            noise_sigma: 0.0,
            seed,
        }
    }

    pub fn counterexample() -> Self {
        Self::new(2, 3, 3, 1, Regime::Counterexample, 0)
    }

    /// Checks the regime constraints and fills a missing `theta_star`.
    pub fn validated(mut self) -> Result<Self, EnvError> {
        let bad = |msg: String| Err(EnvError::InvalidConfig(msg));
        if self.d == 0 || self.m == 0 || self.k == 0 || self.n == 0 {
            return bad("d, m, k, n must all be positive".into());
        }
        if self.k > self.m {
            return bad(format!("k = {} exceeds m = {}", self.k, self.m));
        }
        match self.regime {
            Regime::SinglePlay if self.k != 1 => return bad("single_play requires k = 1".into()),
            Regime::Counterexample if (self.d, self.m, self.k, self.n) != (2, 3, 3, 1) => {
                return bad("counterexample requires d = 2, m = 3, k = 3, n = 1".into())
            }
            _ => {}
        }
        if self.theta_star.is_empty() {
            self.theta_star = default_theta(self.d);
        }
        if self.theta_star.len() != self.d {
            return bad(format!("theta_star has length {}, expected {}", self.theta_star.len(), self.d));
        }
        if !(norm2(&self.theta_star) <= 1.0 + 1e-12) {
            return bad("theta_star must have norm at most 1".into());
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return bad("noise_sigma must be finite and nonnegative".into());
        }
        Ok(self)
    }

    pub fn mean_reward(&self, x: &[f64]) -> f64 {
        dot(&self.theta_star, x)
    }
}

fn default_theta(d: usize) -> Vec<f64> {
    let mut theta = vec![0.0; d];
    if let Some(first) = theta.first_mut() {
        *first = 0.9;
    }
    theta
}

/// Uniform draw from the unit ball: normalized Gaussian direction scaled by
/// `U^(1/d)`.
pub fn sample_unit_ball<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<f64> {
    let dir = sample_unit_sphere(d, rng);
    let r = rng.random::<f64>().powf(1.0 / d as f64);
    dir.into_iter().map(|v| v * r).collect()
}

pub fn sample_unit_sphere<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let g: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let norm = norm2(&g);
        if norm > 0.0 {
            return g.into_iter().map(|v| v / norm).collect();
        }
    }
}

/// The `m` contexts offered in round `t`.
pub fn gen_contexts<R: Rng + ?Sized>(config: &EnvConfig, t: usize, rng: &mut R) -> Result<Vec<Vec<f64>>, EnvError> {
    if t == 0 || t > config.n {
        return Err(EnvError::BadRound { t, n: config.n });
    }
    let (d, m) = (config.d, config.m);
    Ok(match config.regime {
        Regime::Generic | Regime::SinglePlay => (0..m).map(|_| sample_unit_ball(d, rng)).collect(),
        Regime::Colinear => {
            let u = sample_unit_sphere(d, rng);
            (0..m)
                .map(|_| {
                    let a: f64 = rng.random();
                    u.iter().map(|v| a * v).collect()
                })
                .collect()
        }
        Regime::Counterexample => COUNTEREXAMPLE_CONTEXTS.iter().map(|x| x.to_vec()).collect(),
    })
}

/// `θ*ᵀx + ε` with `ε ~ N(0, noise_sigma²)`.
pub fn gen_reward<R: Rng + ?Sized>(config: &EnvConfig, x: &[f64], rng: &mut R) -> f64 {
    let z: f64 = rng.sample(StandardNormal);
    config.mean_reward(x) + config.noise_sigma * z
}

/// A validated config bound to its per-round streams.
#[derive(Debug, Clone)]
pub struct Environment {
    config: EnvConfig,
}

impl Environment {
    pub fn new(config: EnvConfig) -> Result<Self, EnvError> {
        Ok(Self {
            config: config.validated()?,
        })
    }

    pub fn config(&self) -> &EnvConfig {
        &self.config
    }

    pub fn contexts(&self, t: usize) -> Result<Vec<Vec<f64>>, EnvError> {
        gen_contexts(&self.config, t, &mut substream(self.config.seed, t, Lane::Contexts))
    }

    /// Realized rewards for every arm in round `t`; arm `i` always receives
    /// the `i`-th noise draw so that different policies see the same noise.
    pub fn rewards(&self, t: usize, contexts: &[Vec<f64>]) -> Vec<f64> {
        let mut rng = substream(self.config.seed, t, Lane::Rewards);
        contexts.iter().map(|x| gen_reward(&self.config, x, &mut rng)).collect()
    }
}
