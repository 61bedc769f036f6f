//! Episode runner, sweeps, MAT batches and output writers.

mod emit;
mod episode;
mod mat;
mod sweep;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::adversary::lower_bound::{spike_center, spike_eps};
use crate::adversary::AdversarySpec;
use crate::error::{Result, TradeError};
use crate::feedback::FeedbackKind;
use crate::learners::LearnerSpec;
use crate::rng::{stream_rng, Stream};
use crate::trade::{ceil_root, GftDefinition};

pub use emit::{
    record_to_csv, record_to_json, sweep_to_csv, sweep_to_json, to_json_string, write_output,
    OutputFormat,
};
pub use episode::{oracle_value, run_episode, run_summary, EpisodeSummary, RoundRow, RunRecord};
pub use mat::{run_mat, MatConfig, MatReport};
pub use sweep::{
    default_workers, fit_loglog, sweep, LogLogFit, SweepPoint, SweepResult, WORKERS_ENV,
};

/// How the benchmark value of the best fixed price is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleMode {
    /// `T` times the best expected gain of a single price.
    #[default]
    ClosedForm,
    /// Best single price on a grid against the realized valuations.
    GridHindsight {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        resolution: Option<usize>,
    },
}

/// Default hindsight grid: `10 ceil(sqrt(T))`.
pub fn default_resolution(horizon: usize) -> usize {
    (10 * ceil_root(horizon as u64, 2) as usize).max(100)
}

/// Seeds as an explicit list or a count `n` meaning `0..n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Seeds {
    Count(u64),
    List(Vec<u64>),
}

impl Default for Seeds {
    fn default() -> Self {
        Seeds::Count(1)
    }
}

impl Seeds {
    pub fn to_vec(&self) -> Vec<u64> {
        match self {
            Seeds::Count(n) => (0..*n).collect(),
            Seeds::List(v) => v.clone(),
        }
    }
}

/// Lower-bound scenario: `0` is the base density, `k` the `k`-th spike, and
/// `uniform` draws `k` from `1..=K` per seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScenarioChoice {
    Fixed(usize),
    Named(ScenarioName),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioName {
    Uniform,
}

impl ScenarioChoice {
    pub const UNIFORM: Self = ScenarioChoice::Named(ScenarioName::Uniform);

    /// Scenario index for `seed` among `big_k` spikes.
    pub fn resolve(&self, big_k: usize, seed: u64) -> Result<usize> {
        match *self {
            ScenarioChoice::Fixed(k) if k <= big_k => Ok(k),
            ScenarioChoice::Fixed(k) => Err(TradeError::InvalidParameter(format!(
                "scenario {k} outside 0..={big_k}"
            ))),
            ScenarioChoice::Named(ScenarioName::Uniform) => {
                Ok(stream_rng(seed, Stream::Scenario).random_range(1..=big_k))
            }
        }
    }
}

/// The lower-bound adversary for horizon `T`: `K = ceil(T^(1/4))` spikes of
/// half-width `1/(12K)`.
pub fn lower_bound_spec(horizon: usize, scenario: usize) -> Result<AdversarySpec> {
    let big_k = ceil_root(horizon as u64, 4).max(1) as usize;
    if scenario > big_k {
        return Err(TradeError::InvalidParameter(format!(
            "scenario {scenario} outside 0..={big_k}"
        )));
    }
    Ok(if scenario == 0 {
        AdversarySpec::BaseF
    } else {
        AdversarySpec::PerturbedF {
            v: spike_center(big_k, scenario),
            eps: spike_eps(big_k),
        }
    })
}

/// One experiment: adversary, learner, channel, horizon and seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub adversary: AdversarySpec,
    pub learner: LearnerSpec,
    pub feedback: FeedbackKind,
    #[serde(rename = "T", alias = "horizon")]
    pub horizon: usize,
    #[serde(default)]
    pub seeds: Seeds,
    #[serde(default)]
    pub oracle: OracleMode,
    #[serde(default)]
    pub gft: GftDefinition,
    /// When set, replaces `adversary` by the lower-bound instance sized for
    /// the horizon.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<ScenarioChoice>,
}

impl RunConfig {
    pub fn new(
        adversary: AdversarySpec,
        learner: LearnerSpec,
        feedback: FeedbackKind,
        horizon: usize,
    ) -> Self {
        Self {
            adversary,
            learner,
            feedback,
            horizon,
            seeds: Seeds::default(),
            oracle: OracleMode::default(),
            gft: GftDefinition::default(),
            scenario: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn with_horizon(&self, horizon: usize) -> Self {
        Self {
            horizon,
            ..self.clone()
        }
    }

    /// Adversary used for `seed`.
    pub fn adversary_for(&self, seed: u64) -> Result<AdversarySpec> {
        match self.scenario {
            None => Ok(self.adversary.clone()),
            Some(choice) => {
                let big_k = ceil_root(self.horizon as u64, 4).max(1) as usize;
                lower_bound_spec(self.horizon, choice.resolve(big_k, seed)?)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_json_shape() {
        let cfg = RunConfig::from_json(
            r#"{
                "adversary": {"variant": "base_f"},
                "learner": {"alg": "price-hedge", "K": 100},
                "feedback": "full",
                "T": 1000,
                "seeds": [1, 2, 3],
                "oracle": {"grid_hindsight": {"resolution": 500}}
            }"#,
        )
        .unwrap();
        assert_eq!(cfg.seeds.to_vec(), vec![1, 2, 3]);
        assert_eq!(
            cfg.oracle,
            OracleMode::GridHindsight {
                resolution: Some(500)
            }
        );
        let back: RunConfig = serde_json::from_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(back, cfg);

        let cfg = RunConfig::from_json(
            r#"{"adversary": {"variant": "base_f"}, "learner": {"alg": "blind-exp3"},
                "feedback": "one_bit", "T": 4096, "seeds": 5, "oracle": "closed_form",
                "scenario": "uniform"}"#,
        )
        .unwrap();
        assert_eq!(cfg.seeds.to_vec().len(), 5);
        assert_eq!(cfg.scenario, Some(ScenarioChoice::UNIFORM));
    }

    #[test]
    fn scenarios_resolve() {
        assert_eq!(ScenarioChoice::Fixed(3).resolve(8, 0).unwrap(), 3);
        assert!(ScenarioChoice::Fixed(9).resolve(8, 0).is_err());
        let drawn: Vec<usize> = (0..200)
            .map(|s| ScenarioChoice::UNIFORM.resolve(8, s).unwrap())
            .collect();
        assert!(drawn.iter().all(|k| (1..=8).contains(k)));
        assert!(drawn.contains(&1) && drawn.contains(&8));
        assert_eq!(lower_bound_spec(100_000, 0).unwrap(), AdversarySpec::BaseF);
        let AdversarySpec::PerturbedF { v, eps } = lower_bound_spec(100_000, 3).unwrap() else {
            panic!()
        };
        assert_eq!(eps, 1.0 / 216.0);
        assert!((v - (1.0 / 3.0 + 5.0 / 216.0)).abs() < 1e-15);
    }
}
