use rand::Rng;

use crate::error::{Result, TradeError};
use crate::feedback::{Feedback, FeedbackKind};
use crate::rng::LearnerRngs;
use crate::trade::{floor_root, grid_unchecked, PriceGrid, PricePair};

use super::{
    sample_index, softmax_into, theoretical_bound, ActionMode, Algorithm, Learner, LearnerAction,
    Tuning,
};

/// Exponential weights over single prices on a uniform grid, fed the
/// counterfactual gain of every grid price.
#[derive(Debug, Clone)]
pub struct HedgeState {
    pub eta: f64,
    grid: PriceGrid,
    log_weights: Vec<f64>,
    scratch: Vec<f64>,
}

impl HedgeState {
    pub fn new(k: usize, eta: f64) -> Result<Self> {
        if k == 0 || !(eta >= 0.0 && eta.is_finite()) {
            return Err(TradeError::InvalidParameter(format!(
                "hedge needs k >= 1 and a finite eta >= 0 (k = {k}, eta = {eta})"
            )));
        }
        Ok(Self {
            eta,
            grid: grid_unchecked(k),
            log_weights: vec![0.0; k],
            scratch: Vec::with_capacity(k),
        })
    }

    /// `K = floor(sqrt(T))`, `eta = sqrt(ln K / T)`.
    pub fn default_tuning(horizon: usize) -> Tuning {
        let k = (floor_root(horizon as u64, 2) as usize).max(1);
        Tuning {
            k,
            eta: ((k as f64).ln() / horizon as f64).sqrt(),
            gamma: 0.0,
        }
    }

    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }

    /// Overwrite the log-weights, e.g. to start from a non-uniform state.
    pub fn set_log_weights(&mut self, w: Vec<f64>) -> Result<()> {
        if w.len() != self.log_weights.len() {
            return Err(TradeError::InvalidParameter(
                "log-weight length mismatch".into(),
            ));
        }
        self.log_weights = w;
        Ok(())
    }

    /// Draw a grid index from the softmax of the log-weights.
    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> usize {
        softmax_into(&self.log_weights, &mut self.scratch);
        sample_index(&self.scratch, rng)
    }

    /// `log_weights[i] += eta * rewards[i]`.
    pub fn update_rewards(&mut self, rewards: &[f64]) -> Result<()> {
        if rewards.len() != self.log_weights.len() {
            return Err(TradeError::InvalidParameter(format!(
                "expected {} rewards, got {}",
                self.log_weights.len(),
                rewards.len()
            )));
        }
        if let Some(r) = rewards.iter().find(|r| !(0.0..=1.0).contains(*r)) {
            return Err(TradeError::InvalidParameter(format!(
                "reward {r} outside [0, 1]"
            )));
        }
        for (w, r) in self.log_weights.iter_mut().zip(rewards) {
            *w += self.eta * r;
        }
        Ok(())
    }

    /// Full-feedback update: the gain of grid price `g` is `b - s` when
    /// `s <= g <= b`, so only a contiguous run of arms moves.
    pub fn update_from_valuations(&mut self, s: f64, b: f64) {
        if s > b {
            return;
        }
        let bump = self.eta * (b - s);
        for i in self.grid.index_range(s, b) {
            self.log_weights[i] += bump;
        }
    }
}

impl Learner for HedgeState {
    fn name(&self) -> &'static str {
        "price-hedge"
    }

    fn accepts(&self, kind: FeedbackKind) -> bool {
        kind == FeedbackKind::Full
    }

    fn grid(&self) -> &PriceGrid {
        &self.grid
    }

    fn distribution(&self) -> Vec<f64> {
        let mut out = Vec::new();
        softmax_into(&self.log_weights, &mut out);
        out
    }

    fn act(&mut self, rngs: &mut LearnerRngs) -> LearnerAction {
        let arm = self.step(&mut rngs.policy);
        let p = self.grid.point(arm);
        LearnerAction {
            pp: PricePair { p, q: p },
            arm,
            mode: ActionMode::Exploit,
        }
    }

    fn regret_bound(&self, horizon: usize, sigma: f64) -> Option<f64> {
        let tuning = Tuning {
            k: self.grid.len(),
            eta: self.eta,
            gamma: 0.0,
        };
        Some(theoretical_bound(
            Algorithm::PriceHedge,
            horizon,
            &tuning,
            sigma,
        ))
    }

    fn update(&mut self, _action: &LearnerAction, feedback: &Feedback) -> Result<()> {
        match feedback {
            Feedback::Full(v) => {
                self.update_from_valuations(v.s, v.b);
                Ok(())
            }
            other => Err(TradeError::Incompatible(format!(
                "price-hedge needs full feedback, got {other:?}"
            ))),
        }
    }
}
