//! Multi-apple tasting: `K` exploring actions that reveal a bit and earn
//! nothing, and `K` exploiting actions that earn but stay silent.
//!
//! Actions are numbered `1..=2K` throughout, matching the reduction from
//! two-price trading: `iota` maps every price pair to the action it stands for.

mod decomposition;
mod episode;
mod kl;
mod policy;
mod reduction;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::adversary::lower_bound::{spike_eps, strip_bounds, A, C_PLAT, C_PROB, C_SPIKE};
use crate::error::{Result, TradeError};
use crate::trade::{ceil_root, PricePair};

pub use decomposition::{decompose_feedback, FourOutcomeDecomposition, REPRESENTABILITY_TOL};
pub use episode::{run_mat_episode, MatCounters, MatEpisode, MatRngs};
pub use kl::{bernoulli_kl, check_useful_inequality, useful_inequality_terms};
pub use policy::{
    build_mat_policy, mat_policy_names, AlwaysCommit, ExploreThenCommit, FixedArm, MatPolicy,
    MatPolicyFactory, MatPolicyRegistry, MatPolicySpec, UniformExploring,
};
pub use reduction::TradeReduction;

/// One scenario of the 2K-action problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatInstance {
    pub big_k: usize,
    pub eps: f64,
    /// `0` for the unperturbed scenario, otherwise the index of the biased bit.
    pub scenario: usize,
    pub a: f64,
    pub c_prob: f64,
    pub c_plat: f64,
    pub c_spike: f64,
}

impl MatInstance {
    pub fn new(big_k: usize, scenario: usize) -> Result<Self> {
        if big_k == 0 || scenario > big_k {
            return Err(TradeError::InvalidParameter(format!(
                "need K >= 1 and scenario in 0..={big_k}, got K = {big_k}, scenario = {scenario}"
            )));
        }
        let inst = Self {
            big_k,
            eps: spike_eps(big_k),
            scenario,
            a: A,
            c_prob: C_PROB,
            c_plat: C_PLAT,
            c_spike: C_SPIKE,
        };
        debug_assert!(0.5 + inst.c_prob * inst.eps < 1.0);
        Ok(inst)
    }

    /// `K = ceil(T^(1/4))`.
    pub fn for_horizon(horizon: usize, scenario: usize) -> Result<Self> {
        Self::new((ceil_root(horizon as u64, 4) as usize).max(1), scenario)
    }

    pub fn with_scenario(&self, scenario: usize) -> Result<Self> {
        Self::new(self.big_k, scenario)
    }

    pub fn actions(&self) -> usize {
        2 * self.big_k
    }

    fn check_action(&self, i: usize) -> Result<()> {
        if i == 0 || i > self.actions() {
            return Err(TradeError::InvalidParameter(format!(
                "action {i} outside 1..={}",
                self.actions()
            )));
        }
        Ok(())
    }

    /// `P[Y(i) = 1]`.
    pub fn bit_probability(&self, i: usize) -> f64 {
        if i > self.big_k {
            0.0
        } else if i == self.scenario {
            0.5 + self.c_prob * self.eps
        } else {
            0.5
        }
    }

    /// Expected reward of action `i`, from the reward map and the bit law.
    pub fn expected_reward(&self, i: usize) -> Result<f64> {
        self.check_action(i)?;
        if i <= self.big_k {
            return Ok(0.0);
        }
        let p = self.bit_probability(i - self.big_k);
        Ok(self.c_plat + self.c_spike / self.c_prob * (p - 0.5))
    }

    /// Best expected reward over all actions.
    pub fn optimal_reward(&self) -> f64 {
        (1..=self.actions())
            .map(|i| self.expected_reward(i).expect("action in range"))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Draw only bit `i`; bits are independent, so this matches the law of
    /// the corresponding coordinate of a full vector.
    pub fn sample_bit<R: Rng + ?Sized>(&self, i: usize, rng: &mut R) -> bool {
        i <= self.big_k && rng.random::<f64>() < self.bit_probability(i)
    }
}

/// The bits `Y(1..=2K)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RewardVector {
    bits: Vec<bool>,
}

impl RewardVector {
    pub fn from_bits(bits: Vec<bool>) -> Self {
        Self { bits }
    }

    /// `Y(i)`, 1-based.
    pub fn get(&self, i: usize) -> bool {
        self.bits[i - 1]
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }
}

pub fn sample_reward_vector<R: Rng + ?Sized>(inst: &MatInstance, rng: &mut R) -> RewardVector {
    RewardVector {
        bits: (1..=inst.actions())
            .map(|i| inst.sample_bit(i, rng))
            .collect(),
    }
}

/// `rho(i, y)`: zero for exploring actions, otherwise
/// `c_plat + (c_spike / c_prob)(y(i - K) - 1/2)`.
pub fn mat_reward(i: usize, y: &RewardVector, inst: &MatInstance) -> Result<f64> {
    inst.check_action(i)?;
    if i <= inst.big_k {
        return Ok(0.0);
    }
    let bit = if y.get(i - inst.big_k) { 1.0 } else { 0.0 };
    Ok(inst.c_plat + inst.c_spike / inst.c_prob * (bit - 0.5))
}

/// Exploring actions reveal their own bit; exploiting actions reveal nothing.
pub fn mat_feedback(i: usize, y: &RewardVector, inst: &MatInstance) -> Option<bool> {
    (i >= 1 && i <= inst.big_k).then(|| y.get(i))
}

/// Region of the upper triangle that `pp` falls in.
///
/// Exploring strip `k` is `[v_k - eps, v_k + eps) x [2/3, 5/6]` (closed on the
/// right for `k = K`); below it, `q < 2/3`, is region `k + K`; everything else
/// is region `2K`.
pub fn iota(pp: &PricePair, inst: &MatInstance) -> Result<usize> {
    let pp = PricePair::new(pp.p, pp.q)?;
    let big_k = inst.big_k;
    let Some(k) = strip_of(pp.p, big_k) else {
        return Ok(2 * big_k);
    };
    if (2.0 / 3.0..=5.0 / 6.0).contains(&pp.q) {
        Ok(k)
    } else if pp.q < 2.0 / 3.0 && k < big_k {
        Ok(k + big_k)
    } else {
        Ok(2 * big_k)
    }
}

/// Strip index `k` with `lo_k <= p < hi_k` (`p <= hi_K` for the last one).
fn strip_of(p: f64, big_k: usize) -> Option<usize> {
    let (first, _) = strip_bounds(big_k, 1);
    let (_, last) = strip_bounds(big_k, big_k);
    if p < first || p > last {
        return None;
    }
    let guess = (((p - first) * 6.0 * big_k as f64).floor() as usize + 1).clamp(1, big_k);
    // Correct the float guess against the exact bounds.
    let mut k = guess;
    while k > 1 && p < strip_bounds(big_k, k).0 {
        k -= 1;
    }
    while k < big_k && p >= strip_bounds(big_k, k).1 {
        k += 1;
    }
    Some(k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream_rng, Stream};
    use approx::assert_abs_diff_eq;

    #[test]
    fn instance_constants() {
        let inst = MatInstance::new(10, 3).unwrap();
        assert_eq!(inst.eps, 1.0 / 120.0);
        assert!(0.5 + inst.c_prob * inst.eps < 1.0);
        assert!(MatInstance::new(4, 5).is_err());
        assert_eq!(MatInstance::for_horizon(8008, 0).unwrap().big_k, 10);
        assert_eq!(MatInstance::for_horizon(100_000, 0).unwrap().big_k, 18);
    }

    #[test]
    fn reward_vector_frequencies() {
        let inst = MatInstance::new(10, 3).unwrap();
        let mut rng = stream_rng(1, Stream::Adversary);
        let n = 100_000;
        let mut ones = [0usize; 20];
        for _ in 0..n {
            let y = sample_reward_vector(&inst, &mut rng);
            for (i, c) in ones.iter_mut().enumerate() {
                *c += y.get(i + 1) as usize;
            }
        }
        let freq = |i: usize| ones[i - 1] as f64 / n as f64;
        assert!((freq(3) - 0.50597).abs() <= 0.005);
        assert!((freq(1) - 0.5).abs() <= 0.005);
        assert!((11..=20).all(|i| ones[i - 1] == 0));
    }

    #[test]
    fn reward_and_feedback_examples() {
        let inst = MatInstance::new(4, 0).unwrap();
        let y = RewardVector::from_bits(vec![true, false, true, false, false, false, false, false]);
        assert_eq!(mat_reward(2, &y, &inst).unwrap(), 0.0);
        let r = mat_reward(5, &y, &inst).unwrap();
        assert_abs_diff_eq!(r, C_PLAT + C_SPIKE / (2.0 * C_PROB), epsilon = 1e-15);
        assert_abs_diff_eq!(r, 0.055916, epsilon = 2e-6);
        assert!(mat_reward(9, &y, &inst).is_err());
        assert_eq!(mat_feedback(1, &y, &inst), Some(true));
        assert_eq!(mat_feedback(6, &y, &inst), None);
        assert_eq!(mat_feedback(4, &y, &inst), Some(false));
    }

    #[test]
    fn expected_reward_of_the_spike() {
        for k in 1..=6 {
            let inst = MatInstance::new(6, k).unwrap();
            assert_abs_diff_eq!(
                inst.expected_reward(k + 6).unwrap(),
                C_PLAT + C_SPIKE * inst.eps,
                epsilon = 1e-15
            );
            assert_abs_diff_eq!(
                inst.optimal_reward(),
                C_PLAT + C_SPIKE * inst.eps,
                epsilon = 1e-15
            );
        }
        assert_eq!(MatInstance::new(6, 0).unwrap().optimal_reward(), C_PLAT);
    }

    #[test]
    fn iota_examples() {
        let inst = MatInstance::new(4, 0).unwrap();
        let at = |p, q| iota(&PricePair::new(p, q).unwrap(), &inst).unwrap();
        assert_eq!(at(0.34, 0.70), 1);
        assert_eq!(at(0.34, 0.50), 5);
        assert_eq!(at(0.90, 0.95), 8);
        assert_eq!(at(0.5, 0.7), 4);
        assert_eq!(at(0.49, 0.6), 8);
        assert_eq!(at(0.4, 0.9), 8);
        assert_eq!(at(1.0 / 3.0 + 1.0 / 24.0, 0.8), 2);
        assert!(iota(&PricePair { p: 0.5, q: 0.4 }, &inst).is_err());
    }

    #[test]
    fn strip_lookup_agrees_with_bounds() {
        for big_k in 1..=40 {
            for k in 1..=big_k {
                let (lo, hi) = strip_bounds(big_k, k);
                assert_eq!(strip_of(lo, big_k), Some(k));
                let mid = 0.5 * (lo + hi);
                assert_eq!(strip_of(mid, big_k), Some(k));
            }
            assert_eq!(strip_of(0.5, big_k), Some(big_k));
            assert_eq!(strip_of(0.3, big_k), None);
        }
    }
}
