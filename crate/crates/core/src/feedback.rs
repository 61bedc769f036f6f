//! Feedback channels and the one-bit estimator of the gain from trade.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_unit, Result};
use crate::trade::{gft, trades, GftDefinition, PricePair, ValuationPair};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeedbackKind {
    /// Both valuations are revealed.
    Full,
    /// Each agent's acceptance is revealed separately.
    TwoBit,
    /// Only whether the trade happened.
    OneBit,
    /// The realized gain from trade of the posted pair.
    Bandit,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Feedback {
    Full(ValuationPair),
    TwoBit(bool, bool),
    OneBit(bool),
    Bandit(f64),
}

impl Feedback {
    /// Short text form for logs and CSV cells.
    pub fn compact(&self) -> String {
        match *self {
            Feedback::Full(v) => format!("{:.16e};{:.16e}", v.s, v.b),
            Feedback::TwoBit(a, b) => format!("{}{}", a as u8, b as u8),
            Feedback::OneBit(a) => format!("{}", a as u8),
            Feedback::Bandit(x) => format!("{x:.16e}"),
        }
    }
}

/// What the learner sees after posting `pp` against `v`.
pub fn observe(kind: FeedbackKind, pp: &PricePair, v: &ValuationPair) -> Result<Feedback> {
    let pp = PricePair::new(pp.p, pp.q)?;
    Ok(match kind {
        FeedbackKind::Full => Feedback::Full(*v),
        FeedbackKind::TwoBit => Feedback::TwoBit(v.s <= pp.p, pp.q <= v.b),
        FeedbackKind::OneBit => Feedback::OneBit(trades(&pp, v)),
        FeedbackKind::Bandit => Feedback::Bandit(gft(&pp, v, GftDefinition::SurplusSplit)),
    })
}

/// One run of the estimation procedure: the pair it posted and the trade bit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorDraw {
    pub pair: PricePair,
    pub bit: bool,
}

/// Draws the pair the estimator posts for target price `p`.
///
/// With probability `p` it posts `(U, p)` with `U ~ U[0, p]`, otherwise
/// `(p, V)` with `V ~ U[p, 1]`.
pub fn estimator_pair<R: Rng + ?Sized>(p: f64, rng: &mut R) -> PricePair {
    if rng.random::<f64>() < p {
        PricePair {
            p: p * rng.random::<f64>(),
            q: p,
        }
    } else {
        PricePair {
            p,
            q: p + (1.0 - p) * rng.random::<f64>(),
        }
    }
}

/// Unbiased one-bit estimate of `gft_single(p, v)`.
pub fn estimate_gft<R: Rng + ?Sized>(
    p: f64,
    v: &ValuationPair,
    rng: &mut R,
) -> Result<EstimatorDraw> {
    check_unit("p", p)?;
    let pair = estimator_pair(p, rng);
    Ok(EstimatorDraw {
        pair,
        bit: trades(&pair, v),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream_rng, Stream};
    use crate::trade::gft_single;
    use proptest::prelude::*;

    fn v(s: f64, b: f64) -> ValuationPair {
        ValuationPair::new(s, b).unwrap()
    }

    fn mean_estimate(p: f64, val: &ValuationPair, n: usize, seed: u64) -> f64 {
        let mut rng = stream_rng(seed, Stream::Estimator);
        let hits = (0..n)
            .filter(|_| estimate_gft(p, val, &mut rng).unwrap().bit)
            .count();
        hits as f64 / n as f64
    }

    #[test]
    fn observe_examples() {
        let pp = PricePair::new(0.5, 0.6).unwrap();
        assert_eq!(
            observe(FeedbackKind::TwoBit, &pp, &v(0.4, 0.55)).unwrap(),
            Feedback::TwoBit(true, false)
        );
        assert_eq!(
            observe(FeedbackKind::OneBit, &pp, &v(0.4, 0.7)).unwrap(),
            Feedback::OneBit(true)
        );
        assert_eq!(
            observe(FeedbackKind::Full, &pp, &v(0.2, 0.9)).unwrap(),
            Feedback::Full(v(0.2, 0.9))
        );
        let bad = PricePair { p: 0.7, q: 0.6 };
        assert!(observe(FeedbackKind::OneBit, &bad, &v(0.2, 0.9)).is_err());
    }

    #[test]
    fn estimator_examples() {
        assert_eq!(mean_estimate(0.5, &v(0.0, 1.0), 100_000, 1), 1.0);
        let m = mean_estimate(0.5, &v(0.25, 0.75), 100_000, 2);
        assert!((m - 0.5).abs() <= 0.005, "{m}");
        assert_eq!(mean_estimate(0.0, &v(0.3, 0.9), 10_000, 3), 0.0);
        assert!(estimate_gft(1.5, &v(0.3, 0.9), &mut stream_rng(0, Stream::Estimator)).is_err());
    }

    proptest! {
        #[test]
        fn estimator_pairs_are_budget_balanced(p in 0.0f64..=1.0, seed in any::<u64>()) {
            let mut rng = stream_rng(seed, Stream::Estimator);
            for _ in 0..32 {
                let pair = estimator_pair(p, &mut rng);
                prop_assert!(0.0 <= pair.p && pair.p <= pair.q && pair.q <= 1.0);
                prop_assert!(pair.p == p || pair.q == p);
            }
        }

        #[test]
        fn one_bit_is_and_of_two_bits(p in 0.0f64..=1.0, dq in 0.0f64..=1.0, s in 0.0f64..=1.0, b in 0.0f64..=1.0) {
            let pp = PricePair::new(p, p + (1.0 - p) * dq).unwrap();
            let val = v(s, b);
            let Feedback::TwoBit(x, y) = observe(FeedbackKind::TwoBit, &pp, &val).unwrap() else { unreachable!() };
            prop_assert_eq!(observe(FeedbackKind::OneBit, &pp, &val).unwrap(), Feedback::OneBit(x && y));
        }
    }

    #[test]
    fn estimator_unbiased_on_a_few_triples() {
        for (i, &(p, s, b)) in [(0.3, 0.1, 0.8), (0.7, 0.65, 0.72), (0.9, 0.2, 0.95)]
            .iter()
            .enumerate()
        {
            let val = v(s, b);
            let m = mean_estimate(p, &val, 100_000, 10 + i as u64);
            let target = gft_single(p, &val, GftDefinition::SurplusSplit).unwrap();
            assert!((m - target).abs() <= 0.01, "p={p}: {m} vs {target}");
        }
    }
}
