use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::apple_tasting::{
    build_mat_policy, run_mat_episode, MatEpisode, MatInstance, MatPolicySpec,
};
use crate::error::{Result, TradeError};

use super::sweep::{default_workers, mean_stderr};
use super::{ScenarioChoice, Seeds};

/// A batch of 2K-action episodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatConfig {
    /// Defaults to `ceil(T^(1/4))`.
    #[serde(
        default,
        rename = "K",
        alias = "k",
        skip_serializing_if = "Option::is_none"
    )]
    pub big_k: Option<usize>,
    #[serde(rename = "T", alias = "horizon")]
    pub horizon: usize,
    #[serde(default = "uniform")]
    pub scenario: ScenarioChoice,
    #[serde(flatten)]
    pub policy: MatPolicySpec,
    #[serde(default)]
    pub seeds: Seeds,
}

fn uniform() -> ScenarioChoice {
    ScenarioChoice::UNIFORM
}

impl MatConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn instance(&self, seed: u64) -> Result<MatInstance> {
        let base = match self.big_k {
            Some(k) => MatInstance::new(k, 0)?,
            None => MatInstance::for_horizon(self.horizon, 0)?,
        };
        base.with_scenario(self.scenario.resolve(base.big_k, seed)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatReport {
    #[serde(rename = "K")]
    pub big_k: usize,
    #[serde(rename = "T")]
    pub horizon: usize,
    pub policy: String,
    pub episodes: Vec<MatEpisode>,
    pub mean_regret: f64,
    pub stderr: f64,
}

/// Runs every seed of `cfg`, in seed order.
pub fn run_mat(cfg: &MatConfig, workers: Option<usize>) -> Result<MatReport> {
    let seeds = cfg.seeds.to_vec();
    if seeds.is_empty() || cfg.horizon == 0 {
        return Err(TradeError::InvalidParameter(
            "need seeds and a positive horizon".into(),
        ));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.unwrap_or_else(default_workers))
        .build()
        .map_err(|e| TradeError::InvalidParameter(format!("worker pool: {e}")))?;
    let episodes: Vec<MatEpisode> = pool.install(|| {
        seeds
            .par_iter()
            .map(|&seed| {
                let inst = cfg.instance(seed)?;
                let mut policy = build_mat_policy(&cfg.policy, &inst, cfg.horizon)?;
                run_mat_episode(&inst, policy.as_mut(), cfg.horizon, seed)
            })
            .collect::<Result<_>>()
    })?;
    let regrets: Vec<f64> = episodes.iter().map(|e| e.regret).collect();
    let (mean_regret, stderr) = mean_stderr(&regrets);
    Ok(MatReport {
        big_k: cfg.instance(seeds[0])?.big_k,
        horizon: cfg.horizon,
        policy: cfg.policy.policy.clone(),
        episodes,
        mean_regret,
        stderr,
    })
}
