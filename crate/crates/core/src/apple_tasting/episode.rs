use serde::{Deserialize, Serialize};

use crate::error::{Result, TradeError};
use crate::rng::{stream_rng, LearnerRngs, SimRng, Stream};

use super::policy::MatPolicy;
use super::MatInstance;

/// Generators owned by a MAT policy: the wrapped learner's streams plus the
/// uniform seeds used to simulate trade feedback.
#[derive(Debug, Clone)]
pub struct MatRngs {
    pub learner: LearnerRngs,
    pub seeds: SimRng,
}

impl MatRngs {
    pub fn from_seed(seed: u64) -> Self {
        Self {
            learner: LearnerRngs::from_seed(seed),
            seeds: stream_rng(seed, Stream::Feedback),
        }
    }
}

/// Play counts: `n[k - 1]` for exploring action `k`, `m[k - 1]` for
/// exploiting action `K + k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatCounters {
    pub n: Vec<u64>,
    pub m: Vec<u64>,
}

impl MatCounters {
    pub fn new(big_k: usize) -> Self {
        Self {
            n: vec![0; big_k],
            m: vec![0; big_k],
        }
    }

    pub fn record(&mut self, action: usize) {
        let big_k = self.n.len();
        if action <= big_k {
            self.n[action - 1] += 1;
        } else {
            self.m[action - big_k - 1] += 1;
        }
    }

    /// `N_t`: total exploring plays.
    pub fn exploring(&self) -> u64 {
        self.n.iter().sum()
    }

    /// `M_t`: total exploiting plays.
    pub fn exploiting(&self) -> u64 {
        self.m.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatEpisode {
    pub scenario: usize,
    pub counters: MatCounters,
    pub regret: f64,
}

/// Plays `horizon` rounds of `inst` with `policy`.
///
/// Bits come from the seed's adversary stream; the policy draws from its own
/// streams. Regret is `T` times the best expected reward minus the expected
/// rewards of the actions played.
pub fn run_mat_episode(
    inst: &MatInstance,
    policy: &mut dyn MatPolicy,
    horizon: usize,
    seed: u64,
) -> Result<MatEpisode> {
    let mut env = stream_rng(seed, Stream::Adversary);
    let mut rngs = MatRngs::from_seed(seed);
    let rewards: Vec<f64> = (1..=inst.actions())
        .map(|i| inst.expected_reward(i))
        .collect::<Result<_>>()?;
    let best = rewards.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut counters = MatCounters::new(inst.big_k);
    for _ in 0..horizon {
        let i = policy.choose(&mut rngs)?;
        if i == 0 || i > inst.actions() {
            return Err(TradeError::InvalidParameter(format!(
                "{} chose action {i} outside 1..={}",
                policy.name(),
                inst.actions()
            )));
        }
        counters.record(i);
        let bit = (i <= inst.big_k).then(|| inst.sample_bit(i, &mut env));
        policy.observe(i, bit, &mut rngs)?;
    }
    let plays = counters.n.iter().chain(&counters.m);
    let regret = plays
        .zip(&rewards)
        .map(|(&c, r)| c as f64 * (best - r))
        .sum();
    Ok(MatEpisode {
        scenario: inst.scenario,
        counters,
        regret,
    })
}
