//! Hard instance for a single posted price: six small squares split into a
//! blue and a red triple.

use serde::{Deserialize, Serialize};

use crate::error::{Result, TradeError};
use crate::trade::{uniform_grid, GftDefinition};

use super::geometry::{AxisAlignedBox, Piece, PiecewiseDensity};

pub const SP_SIGMA: f64 = 1.0 / 64.0;

pub const SP_Q1: AxisAlignedBox = AxisAlignedBox::raw(0.0, 0.125, 0.375, 0.5);
pub const SP_Q2: AxisAlignedBox = AxisAlignedBox::raw(0.25, 0.375, 0.875, 1.0);
pub const SP_Q3: AxisAlignedBox = AxisAlignedBox::raw(0.5, 0.625, 0.625, 0.75);
pub const SP_Q4: AxisAlignedBox = AxisAlignedBox::raw(0.5, 0.625, 0.875, 1.0);
pub const SP_Q5: AxisAlignedBox = AxisAlignedBox::raw(0.0, 0.125, 0.625, 0.75);
pub const SP_Q6: AxisAlignedBox = AxisAlignedBox::raw(0.25, 0.375, 0.375, 0.5);

/// Squares indexed 1..=6.
pub const SP_SQUARES: [AxisAlignedBox; 6] = [SP_Q1, SP_Q2, SP_Q3, SP_Q4, SP_Q5, SP_Q6];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Color {
    Blue,
    Red,
}

impl Color {
    /// Square indices (1-based) of the color.
    pub fn indices(self) -> [u8; 3] {
        match self {
            Color::Blue => [1, 2, 3],
            Color::Red => [4, 5, 6],
        }
    }
}

/// Weighted mixture of uniform laws on boxes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SquareMixture {
    pub components: Vec<(AxisAlignedBox, f64)>,
}

impl SquareMixture {
    pub fn new(components: Vec<(AxisAlignedBox, f64)>) -> Result<Self> {
        let total: f64 = components.iter().map(|(_, w)| w).sum();
        if components.iter().any(|(_, w)| *w < 0.0) || (total - 1.0).abs() > 1e-12 {
            return Err(TradeError::InvalidParameter(format!(
                "mixture weights must be nonnegative and sum to 1, got {total}"
            )));
        }
        Ok(Self { components })
    }

    /// Uniform mixture over the given squares.
    pub fn uniform_over(boxes: &[AxisAlignedBox]) -> Result<Self> {
        let w = 1.0 / boxes.len() as f64;
        Self::new(boxes.iter().map(|&b| (b, w)).collect())
    }

    pub fn to_density(&self, sigma: f64) -> Result<PiecewiseDensity> {
        let pieces = self
            .components
            .iter()
            .filter(|(_, w)| *w > 0.0)
            .map(|&(b, w)| Piece::constant(b, w / b.area()))
            .collect();
        PiecewiseDensity::new(pieces, sigma)
    }
}

pub fn color_mixture(color: Color) -> SquareMixture {
    let boxes: Vec<_> = color
        .indices()
        .iter()
        .map(|&i| SP_SQUARES[i as usize - 1])
        .collect();
    SquareMixture::uniform_over(&boxes).expect("three equal weights")
}

pub fn color_density(color: Color) -> PiecewiseDensity {
    color_mixture(color)
        .to_density(SP_SIGMA)
        .expect("color density is well formed")
}

/// Uniform law on square `index` (1-based).
pub fn square_density(index: u8) -> Result<PiecewiseDensity> {
    let b = square(index)?;
    PiecewiseDensity::new(vec![Piece::constant(b, 1.0 / b.area())], SP_SIGMA)
}

pub fn square(index: u8) -> Result<AxisAlignedBox> {
    SP_SQUARES
        .get((index as usize).wrapping_sub(1))
        .copied()
        .ok_or_else(|| TradeError::InvalidParameter(format!("square index {index} outside 1..=6")))
}

/// Smallest, over single prices on the `resolution` grid, of the larger
/// per-round shortfall against the best grid price under either law.
pub fn single_price_gap(
    first: &PiecewiseDensity,
    second: &PiecewiseDensity,
    resolution: usize,
) -> Result<f64> {
    let grid = uniform_grid(resolution)?;
    let d = GftDefinition::SurplusSplit;
    let values = |f: &PiecewiseDensity| -> Vec<f64> {
        grid.points()
            .iter()
            .map(|&p| f.expected_gft(p, p, d))
            .collect()
    };
    let (v1, v2) = (values(first), values(second));
    let best = |v: &[f64]| v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (b1, b2) = (best(&v1), best(&v2));
    Ok(v1
        .iter()
        .zip(&v2)
        .map(|(x, y)| (b1 - x).max(b2 - y))
        .fold(f64::INFINITY, f64::min))
}
