//! Repeated bilateral trade against smooth adversaries.
//!
//! The crate covers the payoff primitives, the smooth valuation laws used as
//! hard instances, the three feedback channels, the learning algorithms, a
//! multi-armed reduction with costly exploration, and a seeded harness that
//! measures regret.

pub mod adversary;
pub mod apple_tasting;
pub mod error;
pub mod feedback;
pub mod harness;
pub mod learners;
pub mod rng;
pub mod trade;
pub mod verify;

pub use error::{Result, TradeError};
pub use trade::{
    gft, gft_single, uniform_grid, GftDefinition, PriceGrid, PricePair, ValuationPair,
};
