//! Price-posting learners behind one trait, selected by name at runtime.

mod blind_exp3;
mod exp3_grid;
mod fixed;
mod hedge;
mod registry;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::feedback::{Feedback, FeedbackKind};
use crate::rng::LearnerRngs;
use crate::trade::{PriceGrid, PricePair};

pub use blind_exp3::BlindExp3State;
pub use exp3_grid::Exp3GridState;
pub use fixed::FixedPrice;
pub use hedge::HedgeState;
pub use registry::{build_learner, learner_names, LearnerFactory, LearnerRegistry, LearnerSpec};

/// Whether a round exploits the current distribution or runs the estimator on
/// a grid index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionMode {
    Exploit,
    Explore(usize),
}

/// A posted pair together with the grid arm behind it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LearnerAction {
    pub pp: PricePair,
    pub arm: usize,
    pub mode: ActionMode,
}

/// An online price-posting algorithm.
pub trait Learner: Send {
    fn name(&self) -> &'static str;

    /// Whether the learner can run on this feedback channel.
    fn accepts(&self, kind: FeedbackKind) -> bool;

    fn grid(&self) -> &PriceGrid;

    /// Current sampling distribution over grid arms.
    fn distribution(&self) -> Vec<f64>;

    fn act(&mut self, rngs: &mut LearnerRngs) -> LearnerAction;

    fn update(&mut self, action: &LearnerAction, feedback: &Feedback) -> Result<()>;

    /// Closed-form regret bound for this tuning, if the algorithm has one.
    fn regret_bound(&self, _horizon: usize, _sigma: f64) -> Option<f64> {
        None
    }
}

/// Algorithms with a closed-form regret bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    PriceHedge,
    BlindExp3,
    Exp3Grid,
}

/// Hyperparameters of a learner.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tuning {
    pub k: usize,
    pub eta: f64,
    pub gamma: f64,
}

/// Closed-form regret bound of `alg` for horizon `t` and smoothness `sigma`.
pub fn theoretical_bound(alg: Algorithm, t: usize, tuning: &Tuning, sigma: f64) -> f64 {
    let (t, k) = (t as f64, tuning.k as f64);
    let (eta, gamma) = (tuning.eta, tuning.gamma);
    let discretization = t / (sigma * k);
    match alg {
        Algorithm::PriceHedge => 2.0 * (t * k.ln()).sqrt() + discretization,
        Algorithm::BlindExp3 => k.ln() / eta + (gamma + eta * k / gamma) * t + discretization,
        Algorithm::Exp3Grid => {
            (std::f64::consts::E - 1.0) * gamma * t + k * k.ln() / gamma + discretization
        }
    }
}

/// Softmax of `log_weights` into `out`, subtracting the maximum first.
pub(crate) fn softmax_into(log_weights: &[f64], out: &mut Vec<f64>) {
    let max = log_weights
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    out.clear();
    out.extend(log_weights.iter().map(|&w| (w - max).exp()));
    let total: f64 = out.iter().sum();
    out.iter_mut().for_each(|x| *x /= total);
}

/// Index drawn from the (possibly unnormalized) weights.
pub(crate) fn sample_index<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> usize {
    let total: f64 = weights.iter().sum();
    let mut u = rng.random::<f64>() * total;
    for (i, &w) in weights.iter().enumerate() {
        if u < w {
            return i;
        }
        u -= w;
    }
    weights.iter().rposition(|&w| w > 0.0).unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn hedge_bound_example() {
        let tuning = Tuning {
            k: 223,
            eta: 0.0,
            gamma: 0.0,
        };
        let b = theoretical_bound(Algorithm::PriceHedge, 50_000, &tuning, 1.0 / 9.0);
        let expect = 2.0 * (50_000.0 * 223f64.ln()).sqrt() + 50_000.0 * 9.0 / 223.0;
        assert_abs_diff_eq!(b, expect, epsilon = 1e-9);
        assert_abs_diff_eq!(b, 3057.8, epsilon = 0.5);
    }

    #[test]
    fn softmax_is_shift_invariant_and_stable() {
        let mut a = Vec::new();
        let mut b = Vec::new();
        softmax_into(&[1.0, 2.0, 3.0], &mut a);
        softmax_into(&[1001.0, 1002.0, 1003.0], &mut b);
        for (x, y) in a.iter().zip(&b) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-15);
        }
        softmax_into(&[1e6, 0.0], &mut a);
        assert_eq!(a, vec![1.0, 0.0]);
    }
}
