use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, TradeError};
use crate::learners::LearnerSpec;
use crate::trade::ceil_root;

use super::episode::MatRngs;
use super::reduction::TradeReduction;
use super::MatInstance;

/// An algorithm for the 2K-action problem. Actions are `1..=2K`.
pub trait MatPolicy: Send {
    fn name(&self) -> &'static str;

    fn choose(&mut self, rngs: &mut MatRngs) -> Result<usize>;

    /// `bit` is `Some` exactly when `action` is an exploring action.
    fn observe(&mut self, action: usize, bit: Option<bool>, rngs: &mut MatRngs) -> Result<()>;
}

/// Named policy plus its optional knobs.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MatPolicySpec {
    pub policy: String,
    /// Plays per exploring arm for explore-then-commit.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<usize>,
    /// Action played by `fixed`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arm: Option<usize>,
    /// Trade learner wrapped by `reduction`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub learner: Option<LearnerSpec>,
}

impl MatPolicySpec {
    pub fn named(policy: &str) -> Self {
        Self {
            policy: policy.to_string(),
            ..Self::default()
        }
    }
}

pub type MatPolicyFactory = fn(&MatPolicySpec, &MatInstance, usize) -> Result<Box<dyn MatPolicy>>;

#[derive(Clone)]
pub struct MatPolicyRegistry {
    factories: BTreeMap<String, MatPolicyFactory>,
}

impl MatPolicyRegistry {
    pub fn empty() -> Self {
        Self {
            factories: BTreeMap::new(),
        }
    }

    pub fn with_builtins() -> Self {
        let mut r = Self::empty();
        r.register("uniform-exploring", |_, inst, _| {
            Ok(Box::new(UniformExploring::new(inst.big_k)))
        });
        r.register("explore-then-commit", |spec, inst, horizon| {
            let budget = spec
                .budget
                .unwrap_or_else(|| ceil_root(horizon as u64, 2) as usize);
            Ok(Box::new(ExploreThenCommit::new(inst.big_k, budget)))
        });
        r.register("always-commit", |_, inst, _| {
            Ok(Box::new(AlwaysCommit::new(inst.big_k)))
        });
        r.register("fixed", |spec, inst, _| {
            let arm = spec
                .arm
                .ok_or_else(|| TradeError::InvalidParameter("policy `fixed` needs `arm`".into()))?;
            Ok(Box::new(FixedArm::new(arm, inst)?))
        });
        r.register("reduction", |spec, inst, horizon| {
            let learner = spec
                .learner
                .clone()
                .unwrap_or_else(|| LearnerSpec::named("blind-exp3"));
            Ok(Box::new(TradeReduction::new(&learner, inst, horizon)?))
        });
        r
    }

    pub fn register(&mut self, name: &str, factory: MatPolicyFactory) {
        self.factories.insert(name.to_string(), factory);
    }

    pub fn names(&self) -> Vec<&str> {
        self.factories.keys().map(String::as_str).collect()
    }

    pub fn build(
        &self,
        spec: &MatPolicySpec,
        inst: &MatInstance,
        horizon: usize,
    ) -> Result<Box<dyn MatPolicy>> {
        let factory = self
            .factories
            .get(&spec.policy)
            .ok_or_else(|| TradeError::UnknownName {
                kind: "MAT policy",
                name: spec.policy.clone(),
            })?;
        factory(spec, inst, horizon)
    }
}

pub fn build_mat_policy(
    spec: &MatPolicySpec,
    inst: &MatInstance,
    horizon: usize,
) -> Result<Box<dyn MatPolicy>> {
    MatPolicyRegistry::with_builtins().build(spec, inst, horizon)
}

pub fn mat_policy_names() -> Vec<String> {
    MatPolicyRegistry::with_builtins()
        .names()
        .into_iter()
        .map(String::from)
        .collect()
}

/// Plays an exploring action uniformly at random every round.
#[derive(Debug, Clone)]
pub struct UniformExploring {
    big_k: usize,
}

impl UniformExploring {
    pub fn new(big_k: usize) -> Self {
        Self { big_k }
    }
}

impl MatPolicy for UniformExploring {
    fn name(&self) -> &'static str {
        "uniform-exploring"
    }

    fn choose(&mut self, rngs: &mut MatRngs) -> Result<usize> {
        Ok(rngs.learner.policy.random_range(1..=self.big_k))
    }

    fn observe(&mut self, _: usize, _: Option<bool>, _: &mut MatRngs) -> Result<()> {
        Ok(())
    }
}

/// Round-robin over exploring arms until each has `budget` plays, then plays
/// the exploiting arm of the empirically best bit forever.
#[derive(Debug, Clone)]
pub struct ExploreThenCommit {
    big_k: usize,
    budget: usize,
    plays: usize,
    ones: Vec<u64>,
    committed: Option<usize>,
}

impl ExploreThenCommit {
    pub fn new(big_k: usize, budget: usize) -> Self {
        Self {
            big_k,
            budget,
            plays: 0,
            ones: vec![0; big_k],
            committed: None,
        }
    }

    /// Exploiting action chosen after exploration, if already decided.
    pub fn committed(&self) -> Option<usize> {
        self.committed
    }

    fn commit(&mut self) -> usize {
        // First maximum wins.
        let mut best = 0;
        for (k, &c) in self.ones.iter().enumerate() {
            if c > self.ones[best] {
                best = k;
            }
        }
        let action = self.big_k + best + 1;
        self.committed = Some(action);
        action
    }
}

impl MatPolicy for ExploreThenCommit {
    fn name(&self) -> &'static str {
        "explore-then-commit"
    }

    fn choose(&mut self, _: &mut MatRngs) -> Result<usize> {
        if let Some(a) = self.committed {
            return Ok(a);
        }
        if self.plays < self.budget * self.big_k {
            Ok(self.plays % self.big_k + 1)
        } else {
            Ok(self.commit())
        }
    }

    fn observe(&mut self, action: usize, bit: Option<bool>, _: &mut MatRngs) -> Result<()> {
        if action <= self.big_k {
            self.plays += 1;
            if bit == Some(true) {
                self.ones[action - 1] += 1;
            }
        }
        Ok(())
    }
}

/// Commits to the first exploiting action without exploring.
#[derive(Debug, Clone)]
pub struct AlwaysCommit {
    action: usize,
}

impl AlwaysCommit {
    pub fn new(big_k: usize) -> Self {
        Self { action: big_k + 1 }
    }
}

impl MatPolicy for AlwaysCommit {
    fn name(&self) -> &'static str {
        "always-commit"
    }

    fn choose(&mut self, _: &mut MatRngs) -> Result<usize> {
        Ok(self.action)
    }

    fn observe(&mut self, _: usize, _: Option<bool>, _: &mut MatRngs) -> Result<()> {
        Ok(())
    }
}

/// Plays one action forever.
#[derive(Debug, Clone)]
pub struct FixedArm {
    action: usize,
}

impl FixedArm {
    pub fn new(action: usize, inst: &MatInstance) -> Result<Self> {
        if action == 0 || action > inst.actions() {
            return Err(TradeError::InvalidParameter(format!(
                "arm {action} outside 1..={}",
                inst.actions()
            )));
        }
        Ok(Self { action })
    }
}

impl MatPolicy for FixedArm {
    fn name(&self) -> &'static str {
        "fixed"
    }

    fn choose(&mut self, _: &mut MatRngs) -> Result<usize> {
        Ok(self.action)
    }

    fn observe(&mut self, _: usize, _: Option<bool>, _: &mut MatRngs) -> Result<()> {
        Ok(())
    }
}
