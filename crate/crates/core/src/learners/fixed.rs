use crate::error::Result;
use crate::feedback::{Feedback, FeedbackKind};
use crate::rng::LearnerRngs;
use crate::trade::{PriceGrid, PricePair};

use super::{ActionMode, Learner, LearnerAction};

/// Posts the same pair every round and ignores feedback. With the oracle's
/// price it is the zero-regret reference.
#[derive(Debug, Clone)]
pub struct FixedPrice {
    pp: PricePair,
    grid: PriceGrid,
}

impl FixedPrice {
    pub fn new(p: f64, q: f64) -> Result<Self> {
        let pp = PricePair::new(p, q)?;
        Ok(Self {
            pp,
            grid: PriceGrid::single_point(p),
        })
    }
}

impl Learner for FixedPrice {
    fn name(&self) -> &'static str {
        "fixed-price"
    }

    fn accepts(&self, _kind: FeedbackKind) -> bool {
        true
    }

    fn grid(&self) -> &PriceGrid {
        &self.grid
    }

    fn distribution(&self) -> Vec<f64> {
        vec![1.0]
    }

    fn act(&mut self, _rngs: &mut LearnerRngs) -> LearnerAction {
        LearnerAction {
            pp: self.pp,
            arm: 0,
            mode: ActionMode::Exploit,
        }
    }

    fn update(&mut self, _action: &LearnerAction, _feedback: &Feedback) -> Result<()> {
        Ok(())
    }
}
