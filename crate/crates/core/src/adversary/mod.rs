//! Smooth valuation distributions.

pub mod geometry;
pub mod lower_bound;
pub mod single_price;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, TradeError};
use crate::trade::{uniform_grid, GftDefinition, PricePair, ValuationPair};

pub use geometry::{AxisAlignedBox, Piece, PieceKind, PiecewiseDensity};
pub use lower_bound::{
    expected_gft_base, expected_gft_perturbed, PerturbationParams, A, C_PLAT, C_PROB, C_SPIKE,
};
pub use single_price::{single_price_gap, Color, SquareMixture};

/// Serializable description of an adversary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum AdversarySpec {
    Uniform01Sq,
    Blue,
    Red,
    /// Oblivious adversary drawing each round from one square of `color`,
    /// either following `indices` or uniformly at random.
    FamilyF {
        color: Color,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        indices: Option<Vec<u8>>,
    },
    BaseF,
    PerturbedF {
        v: f64,
        eps: f64,
    },
    Custom {
        density: PiecewiseDensity,
    },
}

#[derive(Debug, Clone)]
enum RoundLaw {
    Iid,
    Sequence {
        squares: Vec<PiecewiseDensity>,
        indices: Vec<u8>,
    },
}

/// A compiled adversary ready to sample and integrate.
#[derive(Debug, Clone)]
pub struct Adversary {
    spec: AdversarySpec,
    /// Per-round law, averaged over rounds when it varies.
    law: PiecewiseDensity,
    rounds: RoundLaw,
}

impl Adversary {
    pub fn new(spec: AdversarySpec) -> Result<Self> {
        let mut rounds = RoundLaw::Iid;
        let law = match &spec {
            AdversarySpec::Uniform01Sq => PiecewiseDensity::new(
                vec![Piece::constant(
                    AxisAlignedBox::raw(0.0, 1.0, 0.0, 1.0),
                    1.0,
                )],
                1.0,
            )?,
            AdversarySpec::Blue => single_price::color_density(Color::Blue),
            AdversarySpec::Red => single_price::color_density(Color::Red),
            AdversarySpec::FamilyF { color, indices } => match indices {
                None => single_price::color_density(*color),
                Some(seq) => {
                    if seq.is_empty() {
                        return Err(TradeError::InvalidParameter(
                            "family index sequence is empty".into(),
                        ));
                    }
                    let allowed = color.indices();
                    let mut counts = [0usize; 3];
                    for &i in seq {
                        let slot = allowed.iter().position(|&a| a == i).ok_or_else(|| {
                            TradeError::InvalidParameter(format!(
                                "square {i} does not belong to color {color:?}"
                            ))
                        })?;
                        counts[slot] += 1;
                    }
                    let n = seq.len() as f64;
                    let mixture = SquareMixture::new(
                        allowed
                            .iter()
                            .zip(counts)
                            .map(|(&i, c)| (single_price::SP_SQUARES[i as usize - 1], c as f64 / n))
                            .collect(),
                    )?;
                    rounds = RoundLaw::Sequence {
                        squares: (1..=6)
                            .map(single_price::square_density)
                            .collect::<Result<_>>()?,
                        indices: seq.clone(),
                    };
                    mixture.to_density(single_price::SP_SIGMA)?
                }
            },
            AdversarySpec::BaseF => lower_bound::base_density(),
            AdversarySpec::PerturbedF { v, eps } => {
                lower_bound::perturbed_density(&PerturbationParams::new(*v, *eps)?)
            }
            AdversarySpec::Custom { density } => density.clone(),
        };
        Ok(Self { spec, law, rounds })
    }

    pub fn spec(&self) -> &AdversarySpec {
        &self.spec
    }

    /// Declared smoothness level.
    pub fn sigma(&self) -> f64 {
        self.law.smoothness_sigma()
    }

    /// Whether every round has the same law.
    pub fn is_iid(&self) -> bool {
        matches!(self.rounds, RoundLaw::Iid)
    }

    /// Number of rounds an index sequence covers, if any.
    pub fn sequence_len(&self) -> Option<usize> {
        match &self.rounds {
            RoundLaw::Iid => None,
            RoundLaw::Sequence { indices, .. } => Some(indices.len()),
        }
    }

    /// The per-round law (round-averaged for index sequences).
    pub fn law(&self) -> &PiecewiseDensity {
        &self.law
    }

    fn perturbation(&self) -> Option<PerturbationParams> {
        match self.spec {
            AdversarySpec::PerturbedF { v, eps } => Some(PerturbationParams { v, eps }),
            _ => None,
        }
    }

    pub fn density(&self, x: f64, y: f64) -> Result<f64> {
        ValuationPair::new(x, y)?;
        Ok(self.law.value(x, y))
    }

    /// Draw from the law of round `t` (0-based).
    pub fn sample_round<R: Rng + ?Sized>(&self, t: usize, rng: &mut R) -> Result<ValuationPair> {
        match &self.rounds {
            RoundLaw::Iid => self.law.sample(rng),
            RoundLaw::Sequence { squares, indices } => {
                let i = *indices.get(t).ok_or_else(|| {
                    TradeError::InvalidParameter(format!(
                        "round {t} beyond the index sequence of length {}",
                        indices.len()
                    ))
                })?;
                squares[i as usize - 1].sample(rng)
            }
        }
    }

    /// Draw from the (round-averaged) law.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<ValuationPair> {
        self.law.sample(rng)
    }

    /// Expected gain from trade of `(p, q)` under the (round-averaged) law.
    pub fn expected_gft(&self, pp: &PricePair, d: GftDefinition) -> f64 {
        if pp.is_single() {
            return self.expected_gft_single(pp.p);
        }
        self.law.expected_gft(pp.p, pp.q, d)
    }

    /// Expected gain from trade of a single price, closed form where known.
    pub fn expected_gft_single(&self, p: f64) -> f64 {
        match (&self.spec, self.perturbation()) {
            (AdversarySpec::BaseF, _) => expected_gft_base(p),
            (_, Some(pert)) => expected_gft_perturbed(p, &pert),
            _ => self.law.expected_gft(p, p, GftDefinition::SurplusSplit),
        }
    }

    /// Best single price and its per-round value, ties to the smallest price.
    pub fn best_fixed_price(&self, resolution: usize) -> Result<(f64, f64)> {
        if resolution < 100 {
            return Err(TradeError::InvalidParameter(format!(
                "oracle resolution {resolution} below 100"
            )));
        }
        match (&self.spec, self.perturbation()) {
            (AdversarySpec::BaseF, _) => Ok((1.0 / 6.0, lower_bound::plateau_value())),
            (_, Some(pert)) => Ok((pert.v, expected_gft_perturbed(pert.v, &pert))),
            _ => {
                let grid = uniform_grid(resolution)?;
                let mut best = (0.0, 0.0);
                for &p in grid.points() {
                    let value = self.expected_gft_single(p);
                    if value > best.1 {
                        best = (p, value);
                    }
                }
                Ok(best)
            }
        }
    }

    /// Probabilities of the two-bit feedback in the order
    /// `(0,0), (0,1), (1,0), (1,1)`.
    pub fn feedback_probs(&self, pp: &PricePair) -> [f64; 4] {
        self.law.feedback_probs(pp.p, pp.q)
    }

    /// `(sup density <= 1/sigma, sup density)`.
    pub fn check_smoothness(&self) -> (bool, f64) {
        let sup = match &self.rounds {
            RoundLaw::Iid => self.law.sup(),
            RoundLaw::Sequence { squares, .. } => squares
                .iter()
                .map(PiecewiseDensity::sup)
                .fold(0.0, f64::max),
        };
        (sup <= 1.0 / self.sigma() * (1.0 + 1e-12), sup)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream_rng, Stream};
    use approx::assert_abs_diff_eq;

    fn adv(spec: AdversarySpec) -> Adversary {
        Adversary::new(spec).unwrap()
    }

    #[test]
    fn density_examples() {
        let f = adv(AdversarySpec::BaseF);
        assert_abs_diff_eq!(
            f.density(0.9, 0.9).unwrap(),
            72.0 * A / (1.0 + 8.0 * A),
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(f.density(0.9, 0.9).unwrap(), 8.0386, epsilon = 2e-3);
        assert_eq!(f.density(0.25, 0.25).unwrap(), 0.0);
        assert!(f.density(1.2, 0.5).is_err());
        let g = adv(AdversarySpec::PerturbedF { v: 0.4, eps: 0.05 });
        assert_eq!(g.density(0.38, 0.7).unwrap(), 0.0);
    }

    #[test]
    fn smoothness_examples() {
        let (ok, sup) = adv(AdversarySpec::BaseF).check_smoothness();
        assert!(ok);
        assert_abs_diff_eq!(sup, 72.0 * A / (1.0 + 8.0 * A), epsilon = 1e-12);
        let (ok, sup) = adv(AdversarySpec::Blue).check_smoothness();
        assert!(ok);
        assert_abs_diff_eq!(sup, 64.0 / 3.0, epsilon = 1e-12);
        assert_eq!(
            adv(AdversarySpec::Uniform01Sq).check_smoothness(),
            (true, 1.0)
        );
        let fam = adv(AdversarySpec::FamilyF {
            color: Color::Red,
            indices: Some(vec![4, 5, 6, 6]),
        });
        assert_eq!(fam.check_smoothness(), (true, 64.0));
    }

    #[test]
    fn best_fixed_price_examples() {
        let (p, v) = adv(AdversarySpec::Uniform01Sq)
            .best_fixed_price(1000)
            .unwrap();
        assert_eq!(p, 0.5);
        assert_abs_diff_eq!(v, 0.125, epsilon = 1e-15);
        let (p, v) = adv(AdversarySpec::BaseF).best_fixed_price(100).unwrap();
        assert_eq!(p, 1.0 / 6.0);
        assert_abs_diff_eq!(v, 0.277502, epsilon = 1e-6);
        let (v0, e) = (17.0 / 48.0, 1.0 / 48.0);
        let (p, v) = adv(AdversarySpec::PerturbedF { v: v0, eps: e })
            .best_fixed_price(100)
            .unwrap();
        assert_eq!(p, v0);
        assert_abs_diff_eq!(
            v,
            lower_bound::plateau_value() + e * lower_bound::SPIKE_SLOPE,
            epsilon = 1e-15
        );
        assert!(adv(AdversarySpec::BaseF).best_fixed_price(10).is_err());
    }

    #[test]
    fn feedback_examples() {
        let f = adv(AdversarySpec::BaseF);
        let probs = f.feedback_probs(&PricePair::single(0.25).unwrap());
        assert_abs_diff_eq!(probs[3], 4.0 * A / (1.0 + 8.0 * A), epsilon = 1e-13);
        assert_abs_diff_eq!(probs.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
        for spec in [
            AdversarySpec::BaseF,
            AdversarySpec::Red,
            AdversarySpec::Uniform01Sq,
        ] {
            let probs = adv(spec).feedback_probs(&PricePair::single(1.0).unwrap());
            assert_abs_diff_eq!(probs[2] + probs[3], 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn blue_draws_land_in_blue_squares() {
        let blue = adv(AdversarySpec::Blue);
        let mut rng = stream_rng(3, Stream::Adversary);
        let squares = Color::Blue
            .indices()
            .map(|i| single_price::SP_SQUARES[i as usize - 1]);
        for _ in 0..10_000 {
            let v = blue.sample(&mut rng).unwrap();
            assert!(squares.iter().any(|b| b.contains(v.s, v.b)));
        }
    }

    #[test]
    fn family_sequence_follows_indices() {
        let fam = adv(AdversarySpec::FamilyF {
            color: Color::Blue,
            indices: Some(vec![1, 3, 2]),
        });
        assert!(!fam.is_iid());
        let mut rng = stream_rng(5, Stream::Adversary);
        for (t, i) in [1u8, 3, 2].into_iter().enumerate() {
            let v = fam.sample_round(t, &mut rng).unwrap();
            assert!(single_price::SP_SQUARES[i as usize - 1].contains(v.s, v.b));
        }
        assert!(fam.sample_round(3, &mut rng).is_err());
        assert!(Adversary::new(AdversarySpec::FamilyF {
            color: Color::Blue,
            indices: Some(vec![4]),
        })
        .is_err());
    }

    #[test]
    fn spec_json_round_trip() {
        let specs = [
            AdversarySpec::Uniform01Sq,
            AdversarySpec::PerturbedF { v: 0.4, eps: 0.05 },
            AdversarySpec::FamilyF {
                color: Color::Red,
                indices: Some(vec![4, 6]),
            },
            AdversarySpec::Custom {
                density: lower_bound::base_density(),
            },
        ];
        for spec in specs {
            let text = serde_json::to_string(&spec).unwrap();
            let back: AdversarySpec = serde_json::from_str(&text).unwrap();
            assert_eq!(back, spec);
        }
        let parsed: AdversarySpec =
            serde_json::from_str(r#"{"variant":"perturbed_f","v":0.4,"eps":0.05}"#).unwrap();
        assert_eq!(parsed, AdversarySpec::PerturbedF { v: 0.4, eps: 0.05 });
        let bad = r#"{"variant":"custom","density":{"pieces":[],"smoothness_sigma":1.0}}"#;
        assert!(serde_json::from_str::<AdversarySpec>(bad).is_err());
    }

    #[test]
    fn base_sampler_matches_box_masses() {
        let f = adv(AdversarySpec::BaseF);
        let mut rng = stream_rng(11, Stream::Adversary);
        let n = 200_000;
        let (mut q1, mut q2) = (0usize, 0usize);
        for _ in 0..n {
            let v = f.sample(&mut rng).unwrap();
            q1 += lower_bound::LB_Q1.contains(v.s, v.b) as usize;
            q2 += lower_bound::LB_Q2.contains(v.s, v.b) as usize;
        }
        let target = A / (1.0 + 8.0 * A);
        assert_abs_diff_eq!(q1 as f64 / n as f64, target, epsilon = 0.004);
        assert_abs_diff_eq!(q2 as f64 / n as f64, target, epsilon = 0.004);
    }
}
