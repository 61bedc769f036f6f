use serde::{Deserialize, Serialize};

use crate::adversary::Adversary;
use crate::error::{Result, TradeError};
use crate::feedback::{observe, Feedback};
use crate::learners::build_learner;
use crate::rng::{stream_rng, LearnerRngs, Stream};
use crate::trade::{gft, uniform_grid, ValuationPair};

use super::{default_resolution, OracleMode, RunConfig};

/// One round of the protocol.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoundRow {
    pub t: usize,
    pub p: f64,
    pub q: f64,
    pub s: f64,
    pub b: f64,
    pub feedback: Feedback,
    pub payoff: f64,
    pub cum_payoff: f64,
    /// Prorated oracle `oracle * t / T` minus `cum_payoff`.
    pub cum_regret: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub seed: u64,
    pub horizon: usize,
    pub rows: Vec<RoundRow>,
    pub cum_payoff: f64,
    pub oracle_value: f64,
    pub regret: f64,
}

/// Totals of an episode without its trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpisodeSummary {
    pub seed: u64,
    pub cum_payoff: f64,
    pub oracle_value: f64,
    pub regret: f64,
}

/// Runs one episode and keeps every round.
pub fn run_episode(cfg: &RunConfig, seed: u64) -> Result<RunRecord> {
    let mut rows = Vec::with_capacity(cfg.horizon);
    let summary = play(cfg, seed, Some(&mut rows))?;
    Ok(RunRecord {
        seed,
        horizon: cfg.horizon,
        rows,
        cum_payoff: summary.cum_payoff,
        oracle_value: summary.oracle_value,
        regret: summary.regret,
    })
}

/// Runs one episode and keeps only the totals.
pub fn run_summary(cfg: &RunConfig, seed: u64) -> Result<EpisodeSummary> {
    play(cfg, seed, None)
}

fn play(
    cfg: &RunConfig,
    seed: u64,
    mut rows: Option<&mut Vec<RoundRow>>,
) -> Result<EpisodeSummary> {
    let horizon = cfg.horizon;
    if horizon == 0 {
        return Err(TradeError::InvalidParameter(
            "horizon must be positive".into(),
        ));
    }
    let adversary = Adversary::new(cfg.adversary_for(seed)?)?;
    if let Some(len) = adversary.sequence_len() {
        if len < horizon {
            return Err(TradeError::InvalidParameter(format!(
                "index sequence covers {len} rounds, horizon is {horizon}"
            )));
        }
    }
    let mut learner = build_learner(&cfg.learner, horizon)?;
    if !learner.accepts(cfg.feedback) {
        return Err(TradeError::Incompatible(format!(
            "{} does not run on {:?} feedback",
            learner.name(),
            cfg.feedback
        )));
    }
    let mut adv_rng = stream_rng(seed, Stream::Adversary);
    let mut rngs = LearnerRngs::from_seed(seed);
    let mut draws = Vec::with_capacity(horizon);
    let mut cum_payoff = 0.0;
    let mut payoffs = rows.as_ref().map(|_| Vec::with_capacity(horizon));
    for t in 0..horizon {
        let v = adversary.sample_round(t, &mut adv_rng)?;
        let action = learner.act(&mut rngs);
        let payoff = gft(&action.pp, &v, cfg.gft);
        let feedback = observe(cfg.feedback, &action.pp, &v)?;
        learner.update(&action, &feedback)?;
        cum_payoff += payoff;
        if let Some(p) = payoffs.as_mut() {
            p.push((action.pp, feedback, payoff, cum_payoff));
        }
        draws.push(v);
    }
    let oracle = oracle_value(&adversary, cfg.oracle, &draws)?;
    if let (Some(rows), Some(payoffs)) = (rows.as_mut(), payoffs) {
        for (t, ((pp, feedback, payoff, cum), v)) in payoffs.into_iter().zip(&draws).enumerate() {
            let round = t + 1;
            rows.push(RoundRow {
                t: round,
                p: pp.p,
                q: pp.q,
                s: v.s,
                b: v.b,
                feedback,
                payoff,
                cum_payoff: cum,
                cum_regret: oracle * (round as f64 / horizon as f64) - cum,
            });
        }
    }
    Ok(EpisodeSummary {
        seed,
        cum_payoff,
        oracle_value: oracle,
        regret: oracle - cum_payoff,
    })
}

/// Benchmark total over the rounds in `draws`.
///
/// The best pair is always a single price, so both modes search the diagonal.
pub fn oracle_value(
    adversary: &Adversary,
    mode: OracleMode,
    draws: &[ValuationPair],
) -> Result<f64> {
    let horizon = draws.len();
    match mode {
        OracleMode::ClosedForm => {
            let (_, value) = adversary.best_fixed_price(default_resolution(horizon))?;
            Ok(horizon as f64 * value)
        }
        OracleMode::GridHindsight { resolution } => {
            let grid = uniform_grid(resolution.unwrap_or_else(|| default_resolution(horizon)))?;
            // A single price `g` earns `b - s` exactly when `s <= g <= b`, so
            // each round adds a constant over a run of grid points.
            let mut diff = vec![0.0; grid.len() + 1];
            for v in draws {
                let range = grid.index_range(v.s, v.b);
                if !range.is_empty() {
                    diff[range.start] += v.b - v.s;
                    diff[range.end] -= v.b - v.s;
                }
            }
            let mut acc = 0.0;
            let mut best = 0.0f64;
            for d in &diff[..grid.len()] {
                acc += d;
                best = best.max(acc);
            }
            Ok(best)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adversary::{AdversarySpec, AxisAlignedBox, Piece, PiecewiseDensity};
    use crate::feedback::FeedbackKind;
    use crate::learners::LearnerSpec;
    use crate::trade::{gft_single, GftDefinition};
    use approx::assert_abs_diff_eq;

    fn hedge_cfg(horizon: usize) -> RunConfig {
        RunConfig::new(
            AdversarySpec::Uniform01Sq,
            LearnerSpec::named("price-hedge"),
            FeedbackKind::Full,
            horizon,
        )
    }

    #[test]
    fn accounting_identities() {
        let rec = run_episode(&hedge_cfg(300), 4).unwrap();
        assert_eq!(rec.rows.len(), 300);
        let last = rec.rows.last().unwrap();
        assert_eq!(last.cum_regret, rec.oracle_value - rec.cum_payoff);
        assert_eq!(rec.regret, last.cum_regret);
        for r in &rec.rows {
            let v = ValuationPair::new(r.s, r.b).unwrap();
            let pp = crate::trade::PricePair::new(r.p, r.q).unwrap();
            assert_eq!(r.payoff, gft(&pp, &v, GftDefinition::SurplusSplit));
        }
    }

    #[test]
    fn runs_are_deterministic_and_paired() {
        let cfg = hedge_cfg(500);
        assert_eq!(
            run_episode(&cfg, 11).unwrap(),
            run_episode(&cfg, 11).unwrap()
        );
        let mut other = cfg.clone();
        other.learner = LearnerSpec {
            price: Some(0.5),
            ..LearnerSpec::named("fixed-price")
        };
        let a = run_episode(&cfg, 11).unwrap();
        let b = run_episode(&other, 11).unwrap();
        for (x, y) in a.rows.iter().zip(&b.rows) {
            assert_eq!((x.s, x.b), (y.s, y.b));
        }
    }

    #[test]
    fn incompatible_pairing_is_rejected() {
        let mut cfg = hedge_cfg(10);
        cfg.feedback = FeedbackKind::OneBit;
        assert!(matches!(
            run_episode(&cfg, 0),
            Err(TradeError::Incompatible(_))
        ));
    }

    #[test]
    fn hindsight_oracle_matches_brute_force() {
        let adversary = Adversary::new(AdversarySpec::Uniform01Sq).unwrap();
        let mut rng = stream_rng(2, Stream::Adversary);
        let draws: Vec<_> = (0..400)
            .map(|_| adversary.sample(&mut rng).unwrap())
            .collect();
        let mode = OracleMode::GridHindsight {
            resolution: Some(250),
        };
        let fast = oracle_value(&adversary, mode, &draws).unwrap();
        let grid = uniform_grid(250).unwrap();
        let brute = grid
            .points()
            .iter()
            .map(|&g| {
                draws
                    .iter()
                    .map(|v| gft_single(g, v, GftDefinition::SurplusSplit).unwrap())
                    .sum::<f64>()
            })
            .fold(0.0, f64::max);
        assert_abs_diff_eq!(fast, brute, epsilon = 1e-9);
    }

    #[test]
    fn no_trade_box_has_zero_oracle() {
        let density = PiecewiseDensity::new(
            vec![Piece::constant(
                AxisAlignedBox::new(0.9, 1.0, 0.0, 0.1).unwrap(),
                100.0,
            )],
            0.01,
        )
        .unwrap();
        let mut cfg = hedge_cfg(2000);
        cfg.adversary = AdversarySpec::Custom { density };
        let rec = run_summary(&cfg, 1).unwrap();
        assert_eq!(rec.oracle_value, 0.0);
        assert_eq!(rec.regret, 0.0);
        cfg.oracle = OracleMode::GridHindsight { resolution: None };
        assert_eq!(run_summary(&cfg, 1).unwrap().regret, 0.0);
    }
}
