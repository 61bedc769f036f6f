use crate::error::{Result, TradeError};
use crate::feedback::{Feedback, FeedbackKind};
use crate::rng::LearnerRngs;
use crate::trade::{ceil_root, grid_unchecked, PriceGrid, PricePair};

use super::{
    sample_index, softmax_into, theoretical_bound, ActionMode, Algorithm, Learner, LearnerAction,
    Tuning,
};

/// Exp3 with explicit uniform mixing over a diagonal price grid, learning from
/// the realized gain of the posted price.
#[derive(Debug, Clone)]
pub struct Exp3GridState {
    pub eta: f64,
    pub gamma: f64,
    grid: PriceGrid,
    log_weights: Vec<f64>,
    probs: Vec<f64>,
}

impl Exp3GridState {
    pub fn new(k: usize, eta: f64, gamma: f64) -> Result<Self> {
        if k == 0 || !(0.0..=1.0).contains(&gamma) || !(eta >= 0.0 && eta.is_finite()) {
            return Err(TradeError::InvalidParameter(format!(
                "exp3-grid needs k >= 1, gamma in [0, 1], eta >= 0 (k = {k}, gamma = {gamma}, eta = {eta})"
            )));
        }
        let mut s = Self {
            eta,
            gamma,
            grid: grid_unchecked(k),
            log_weights: vec![0.0; k],
            probs: Vec::with_capacity(k),
        };
        s.refresh();
        Ok(s)
    }

    /// `K = ceil(T^(1/3))`, `gamma = min(1, sqrt(K ln K / T))`, `eta = gamma / K`.
    pub fn default_tuning(horizon: usize) -> Tuning {
        let k = (ceil_root(horizon as u64, 3) as usize).max(1);
        let kf = k as f64;
        let gamma = (kf * kf.ln() / horizon as f64).sqrt().min(1.0);
        Tuning {
            k,
            eta: gamma / kf,
            gamma,
        }
    }

    fn refresh(&mut self) {
        softmax_into(&self.log_weights, &mut self.probs);
        let mix = self.gamma / self.grid.len() as f64;
        for p in &mut self.probs {
            *p = (1.0 - self.gamma) * *p + mix;
        }
    }
}

impl Learner for Exp3GridState {
    fn name(&self) -> &'static str {
        "exp3-grid"
    }

    fn accepts(&self, kind: FeedbackKind) -> bool {
        kind == FeedbackKind::Bandit
    }

    fn grid(&self) -> &PriceGrid {
        &self.grid
    }

    fn distribution(&self) -> Vec<f64> {
        self.probs.clone()
    }

    fn act(&mut self, rngs: &mut LearnerRngs) -> LearnerAction {
        let arm = if self.grid.len() == 1 {
            0
        } else {
            sample_index(&self.probs, &mut rngs.policy)
        };
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
            gamma: self.gamma,
        };
        Some(theoretical_bound(
            Algorithm::Exp3Grid,
            horizon,
            &tuning,
            sigma,
        ))
    }

    fn update(&mut self, action: &LearnerAction, feedback: &Feedback) -> Result<()> {
        let Feedback::Bandit(reward) = *feedback else {
            return Err(TradeError::Incompatible(format!(
                "exp3-grid needs bandit feedback, got {feedback:?}"
            )));
        };
        if reward > 0.0 {
            self.log_weights[action.arm] += self.eta * reward / self.probs[action.arm];
            self.refresh();
        }
        Ok(())
    }
}
