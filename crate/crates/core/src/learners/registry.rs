use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Result, TradeError};

use super::{BlindExp3State, Exp3GridState, FixedPrice, HedgeState, Learner};

/// Learner section of a run config. Unset hyperparameters fall back to the
/// horizon-dependent defaults of each algorithm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnerSpec {
    pub alg: String,
    #[serde(
        default,
        rename = "K",
        alias = "k",
        skip_serializing_if = "Option::is_none"
    )]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    /// Posted price for `fixed-price`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub price: Option<f64>,
}

impl LearnerSpec {
    pub fn named(alg: &str) -> Self {
        Self {
            alg: alg.to_string(),
            k: None,
            eta: None,
            gamma: None,
            price: None,
        }
    }
}

pub type LearnerFactory = fn(&LearnerSpec, usize) -> Result<Box<dyn Learner>>;

/// Learners by name.
#[derive(Clone)]
pub struct LearnerRegistry {
    entries: BTreeMap<&'static str, LearnerFactory>,
}

impl LearnerRegistry {
    pub fn empty() -> Self {
        Self {
            entries: BTreeMap::new(),
        }
    }

    pub fn with_builtins() -> Self {
        let mut r = Self::empty();
        r.register("price-hedge", build_hedge);
        r.register("blind-exp3", build_blind_exp3);
        r.register("exp3-grid", build_exp3_grid);
        r.register("fixed-price", build_fixed);
        r
    }

    pub fn register(&mut self, name: &'static str, factory: LearnerFactory) {
        self.entries.insert(name, factory);
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.keys().copied().collect()
    }

    pub fn build(&self, spec: &LearnerSpec, horizon: usize) -> Result<Box<dyn Learner>> {
        let factory =
            self.entries
                .get(spec.alg.as_str())
                .ok_or_else(|| TradeError::UnknownName {
                    kind: "learner",
                    name: spec.alg.clone(),
                })?;
        factory(spec, horizon)
    }
}

/// Build a built-in learner.
pub fn build_learner(spec: &LearnerSpec, horizon: usize) -> Result<Box<dyn Learner>> {
    LearnerRegistry::with_builtins().build(spec, horizon)
}

pub fn learner_names() -> Vec<&'static str> {
    LearnerRegistry::with_builtins().names()
}

fn build_hedge(spec: &LearnerSpec, horizon: usize) -> Result<Box<dyn Learner>> {
    let d = HedgeState::default_tuning(horizon);
    let k = spec.k.unwrap_or(d.k);
    let eta = spec
        .eta
        .unwrap_or(((k as f64).ln() / horizon as f64).sqrt());
    Ok(Box::new(HedgeState::new(k, eta)?))
}

fn build_blind_exp3(spec: &LearnerSpec, horizon: usize) -> Result<Box<dyn Learner>> {
    let d = BlindExp3State::default_tuning(horizon);
    Ok(Box::new(BlindExp3State::new(
        spec.k.unwrap_or(d.k),
        spec.eta.unwrap_or(d.eta),
        spec.gamma.unwrap_or(d.gamma),
    )?))
}

fn build_exp3_grid(spec: &LearnerSpec, horizon: usize) -> Result<Box<dyn Learner>> {
    let d = Exp3GridState::default_tuning(horizon);
    let k = spec.k.unwrap_or(d.k);
    let gamma = spec.gamma.unwrap_or_else(|| {
        (k as f64 * (k as f64).ln() / horizon as f64)
            .sqrt()
            .min(1.0)
    });
    let eta = spec.eta.unwrap_or(gamma / k as f64);
    Ok(Box::new(Exp3GridState::new(k, eta, gamma)?))
}

fn build_fixed(spec: &LearnerSpec, _horizon: usize) -> Result<Box<dyn Learner>> {
    let p = spec
        .price
        .ok_or_else(|| TradeError::InvalidParameter("fixed-price needs a `price` field".into()))?;
    Ok(Box::new(FixedPrice::new(p, p)?))
}
