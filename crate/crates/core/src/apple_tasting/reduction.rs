use rand::Rng;

use crate::adversary::lower_bound::{base_density, perturbed_density, PerturbationParams};
use crate::adversary::PiecewiseDensity;
use crate::error::{Result, TradeError};
use crate::feedback::{Feedback, FeedbackKind};
use crate::learners::{build_learner, Learner, LearnerAction, LearnerSpec};

use super::decomposition::{decompose_feedback, inverse_cdf};
use super::episode::MatRngs;
use super::policy::MatPolicy;
use super::{iota, MatInstance};

/// Runs a trade learner as a MAT policy.
///
/// Each posted pair is mapped to its region by `iota`. The learner then sees
/// two-bit feedback simulated from the MAT observation alone: on an exploring
/// strip from the decomposition of the base and perturbed feedback laws, and
/// elsewhere from the base law, which every scenario shares there.
pub struct TradeReduction {
    learner: Box<dyn Learner>,
    kind: FeedbackKind,
    inst: MatInstance,
    base: PiecewiseDensity,
    perturbed: Vec<PiecewiseDensity>,
    pending: Option<LearnerAction>,
}

impl TradeReduction {
    pub fn new(spec: &LearnerSpec, inst: &MatInstance, horizon: usize) -> Result<Self> {
        let learner = build_learner(spec, horizon)?;
        Self::wrap(learner, inst)
    }

    /// Wrap an already built learner; it must draw all its randomness from
    /// the generators it is handed.
    pub fn wrap(learner: Box<dyn Learner>, inst: &MatInstance) -> Result<Self> {
        let kind = if learner.accepts(FeedbackKind::TwoBit) {
            FeedbackKind::TwoBit
        } else if learner.accepts(FeedbackKind::OneBit) {
            FeedbackKind::OneBit
        } else {
            return Err(TradeError::Incompatible(format!(
                "{} takes neither two-bit nor one-bit feedback",
                learner.name()
            )));
        };
        let perturbed = (1..=inst.big_k)
            .map(|k| PerturbationParams::spike(inst.big_k, k).map(|p| perturbed_density(&p)))
            .collect::<Result<_>>()?;
        Ok(Self {
            learner,
            kind,
            inst: *inst,
            base: base_density(),
            perturbed,
            pending: None,
        })
    }

    pub fn learner(&self) -> &dyn Learner {
        self.learner.as_ref()
    }
}

impl MatPolicy for TradeReduction {
    fn name(&self) -> &'static str {
        "reduction"
    }

    fn choose(&mut self, rngs: &mut MatRngs) -> Result<usize> {
        let action = self.learner.act(&mut rngs.learner);
        let i = iota(&action.pp, &self.inst)?;
        self.pending = Some(action);
        Ok(i)
    }

    fn observe(&mut self, i: usize, bit: Option<bool>, rngs: &mut MatRngs) -> Result<()> {
        let action = self
            .pending
            .take()
            .ok_or_else(|| TradeError::InvalidParameter("observe called before choose".into()))?;
        let (p, q) = (action.pp.p, action.pp.q);
        let u: f64 = rngs.seeds.random();
        let base = self.base.feedback_probs(p, q);
        let outcome = match bit {
            Some(y) if i <= self.inst.big_k => {
                let fk = self.perturbed[i - 1].feedback_probs(p, q);
                let p0 = 0.5;
                let pk = 0.5 + self.inst.c_prob * self.inst.eps;
                decompose_feedback(base, fk, p0, pk)?.simulate(y, u)
            }
            _ => inverse_cdf(&base, u),
        };
        let (seller, buyer) = (outcome & 2 != 0, outcome & 1 != 0);
        let feedback = match self.kind {
            FeedbackKind::TwoBit => Feedback::TwoBit(seller, buyer),
            _ => Feedback::OneBit(seller && buyer),
        };
        self.learner.update(&action, &feedback)
    }
}
