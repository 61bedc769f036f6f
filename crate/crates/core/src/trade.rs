//! Payoff primitives and price-space geometry.

use serde::{Deserialize, Serialize};

use crate::error::{check_unit, Result, TradeError};

/// Seller and buyer valuations, both in `[0, 1]`. No ordering is implied.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValuationPair {
    pub s: f64,
    pub b: f64,
}

impl ValuationPair {
    pub fn new(s: f64, b: f64) -> Result<Self> {
        Ok(Self {
            s: check_unit("s", s)?,
            b: check_unit("b", b)?,
        })
    }
}

/// Posted prices: `p` to the seller, `q` to the buyer, with `p <= q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PricePair {
    pub p: f64,
    pub q: f64,
}

impl PricePair {
    pub fn new(p: f64, q: f64) -> Result<Self> {
        check_unit("p", p)?;
        check_unit("q", q)?;
        if p > q {
            return Err(TradeError::NotBudgetBalanced { p, q });
        }
        Ok(Self { p, q })
    }

    /// The same price posted to both agents.
    pub fn single(p: f64) -> Result<Self> {
        Self::new(p, p)
    }

    pub fn is_single(&self) -> bool {
        self.p == self.q
    }
}

/// Which surplus counts as the gain from trade.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GftDefinition {
    /// `(b - q) + (p - s)`: the surplus left to the agents.
    #[default]
    SurplusSplit,
    /// `b - s`: the full surplus, whatever the mechanism keeps.
    FullSurplus,
}

/// Whether the trade clears: `s <= p <= q <= b`.
#[inline]
pub fn trades(pp: &PricePair, v: &ValuationPair) -> bool {
    v.s <= pp.p && pp.p <= pp.q && pp.q <= v.b
}

/// Gain from trade of the posted pair against realized valuations.
#[inline]
pub fn gft(pp: &PricePair, v: &ValuationPair, d: GftDefinition) -> f64 {
    if !trades(pp, v) {
        return 0.0;
    }
    match d {
        // (b - q) + (p - s) collapses to b - s on the diagonal; keep that form
        // so both definitions agree bit for bit there.
        GftDefinition::SurplusSplit if pp.p != pp.q => (v.b - pp.q) + (pp.p - v.s),
        _ => v.b - v.s,
    }
}

/// Gain from trade when the same price is posted to both sides.
pub fn gft_single(p: f64, v: &ValuationPair, d: GftDefinition) -> Result<f64> {
    let pp = PricePair::single(p)?;
    Ok(gft(&pp, v, d))
}

/// Uniform grid `{1/k, 2/k, ..., 1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceGrid {
    k: usize,
    points: Vec<f64>,
}

impl PriceGrid {
    pub fn len(&self) -> usize {
        self.k
    }

    pub fn is_empty(&self) -> bool {
        self.k == 0
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn point(&self, i: usize) -> f64 {
        self.points[i]
    }

    /// Largest distance from a point of `[0, 1]` to the grid.
    pub fn mesh(&self) -> f64 {
        1.0 / self.k as f64
    }

    /// Index range of grid points lying in `[lo, hi]`.
    pub fn index_range(&self, lo: f64, hi: f64) -> std::ops::Range<usize> {
        let start = self.points.partition_point(|&g| g < lo);
        let end = self.points.partition_point(|&g| g <= hi);
        start..end.max(start)
    }

    /// Grid holding the single point `p`.
    pub(crate) fn single_point(p: f64) -> Self {
        Self {
            k: 1,
            points: vec![p],
        }
    }
}

/// The uniform `k`-grid on `[0, 1]`.
pub fn uniform_grid(k: usize) -> Result<PriceGrid> {
    if k < 2 {
        return Err(TradeError::InvalidParameter(format!(
            "grid size must be at least 2, got {k}"
        )));
    }
    Ok(grid_unchecked(k))
}

pub(crate) fn grid_unchecked(k: usize) -> PriceGrid {
    let points = (1..=k).map(|i| i as f64 / k as f64).collect();
    PriceGrid { k, points }
}

/// Largest integer `r` with `r^n <= x`.
pub fn floor_root(x: u64, n: u32) -> u64 {
    if x < 2 {
        return x;
    }
    let mut r = (x as f64).powf(1.0 / n as f64).round() as u64;
    while r > 0 && r.checked_pow(n).is_none_or(|v| v > x) {
        r -= 1;
    }
    while (r + 1).checked_pow(n).is_some_and(|v| v <= x) {
        r += 1;
    }
    r
}

/// Smallest integer `r` with `r^n >= x`.
pub fn ceil_root(x: u64, n: u32) -> u64 {
    let r = floor_root(x, n);
    if r.pow(n) == x {
        r
    } else {
        r + 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute_gft(p: f64, q: f64, s: f64, b: f64) -> f64 {
        // Direct transcription of the indicator form, independent of `gft`.
        let ind = if s <= p && p <= q && q <= b { 1.0 } else { 0.0 };
        ((b - q) + (p - s)) * ind
    }

    #[test]
    fn gft_examples() {
        let d = GftDefinition::SurplusSplit;
        let v = ValuationPair::new(0.0, 1.0).unwrap();
        assert_eq!(gft(&PricePair::new(0.5, 0.5).unwrap(), &v, d), 1.0);

        let v = ValuationPair::new(0.7, 0.9).unwrap();
        assert_eq!(gft(&PricePair::new(0.5, 0.6).unwrap(), &v, d), 0.0);

        let v = ValuationPair::new(0.25, 0.75).unwrap();
        let got = gft(&PricePair::new(0.5, 0.6).unwrap(), &v, d);
        assert!((got - 0.4).abs() < 1e-15);
        assert_eq!(got, brute_gft(0.5, 0.6, 0.25, 0.75));
    }

    #[test]
    fn gft_single_examples() {
        let d = GftDefinition::SurplusSplit;
        let v = ValuationPair::new(0.25, 0.75).unwrap();
        assert_eq!(gft_single(0.5, &v, d).unwrap(), 0.5);
        let v = ValuationPair::new(0.5, 0.9).unwrap();
        assert_eq!(gft_single(0.0, &v, d).unwrap(), 0.0);
        let v = ValuationPair::new(0.3, 0.3).unwrap();
        assert_eq!(gft_single(0.3, &v, d).unwrap(), 0.0);
        assert!(gft_single(1.5, &v, d).is_err());
    }

    #[test]
    fn invalid_inputs_rejected() {
        assert!(matches!(
            PricePair::new(0.7, 0.6),
            Err(TradeError::NotBudgetBalanced { .. })
        ));
        assert!(PricePair::new(-0.1, 0.6).is_err());
        assert!(ValuationPair::new(0.2, 1.01).is_err());
        assert!(ValuationPair::new(f64::NAN, 0.5).is_err());
    }

    #[test]
    fn grid_examples() {
        let g = uniform_grid(4).unwrap();
        assert_eq!(g.points(), &[0.25, 0.5, 0.75, 1.0]);
        assert_eq!(uniform_grid(2).unwrap().points(), &[0.5, 1.0]);
        let g = uniform_grid(10).unwrap();
        assert_eq!(g.len(), 10);
        assert_eq!(g.point(0), 0.1);
        assert_eq!(g.point(9), 1.0);
        assert_eq!(g.mesh(), 0.1);
        assert!(uniform_grid(1).is_err());
        assert!(uniform_grid(0).is_err());
    }

    #[test]
    fn grid_index_range() {
        let g = uniform_grid(4).unwrap();
        assert_eq!(g.index_range(0.3, 0.75), 1..3);
        assert_eq!(g.index_range(0.0, 0.2), 0..0);
        assert_eq!(g.index_range(0.25, 1.0), 0..4);
        assert_eq!(g.index_range(0.8, 0.3), 3..3);
    }

    #[test]
    fn integer_roots() {
        assert_eq!(floor_root(10_000, 4), 10);
        assert_eq!(ceil_root(10_000, 4), 10);
        assert_eq!(ceil_root(8008, 4), 10);
        assert_eq!(floor_root(100_000, 4), 17);
        assert_eq!(ceil_root(100_000, 4), 18);
        assert_eq!(floor_root(50_000, 2), 223);
        assert_eq!(ceil_root(1_000_000, 4), 32);
        assert_eq!(floor_root(1, 3), 1);
        assert_eq!(ceil_root(1 << 18, 3), 64);
    }

    #[test]
    fn single_price_dominates_on_fine_grid() {
        let n = 24;
        let pts: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
        let d = GftDefinition::SurplusSplit;
        for &s in &pts {
            for &b in &pts {
                let v = ValuationPair::new(s, b).unwrap();
                for (i, &p) in pts.iter().enumerate() {
                    let diag = gft(&PricePair::new(p, p).unwrap(), &v, d);
                    for &q in &pts[i..] {
                        let pp = PricePair::new(p, q).unwrap();
                        assert!(diag >= gft(&pp, &v, d));
                    }
                }
            }
        }
    }

    proptest! {
        #[test]
        fn gft_bounded_and_matches_brute(p in 0.0f64..=1.0, dq in 0.0f64..=1.0, s in 0.0f64..=1.0, b in 0.0f64..=1.0) {
            let q = p + (1.0 - p) * dq;
            let pp = PricePair::new(p, q).unwrap();
            let v = ValuationPair::new(s, b).unwrap();
            let split = gft(&pp, &v, GftDefinition::SurplusSplit);
            let full = gft(&pp, &v, GftDefinition::FullSurplus);
            prop_assert!((0.0..=1.0).contains(&split));
            prop_assert!((split - brute_gft(p, q, s, b)).abs() <= 1e-15);
            prop_assert!(full >= split);
            let diag = PricePair::single(p).unwrap();
            prop_assert_eq!(
                gft(&diag, &v, GftDefinition::SurplusSplit),
                gft(&diag, &v, GftDefinition::FullSurplus)
            );
        }
    }
}
