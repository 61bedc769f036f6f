//! Piecewise densities on the unit square.
//!
//! A density is a list of pieces, each supported on an axis-aligned box and
//! either constant there or equal to the analytic factor
//! `(5 - 6(x + y)) / (6(y - x))` scaled by a fixed constant. Every integral the
//! crate needs (masses of quadrants, expected gain from trade) is computed in
//! closed form piece by piece.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, TradeError};
use crate::trade::{GftDefinition, ValuationPair};

use super::lower_bound::BASE_SCALE;

/// Box `[x0, x1) x [y0, y1)`, closed on edges lying on the boundary of the unit
/// square.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisAlignedBox {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl AxisAlignedBox {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Result<Self> {
        let ok = 0.0 <= x0 && x0 < x1 && x1 <= 1.0 && 0.0 <= y0 && y0 < y1 && y1 <= 1.0;
        if !ok {
            return Err(TradeError::InvalidParameter(format!(
                "degenerate box [{x0}, {x1}] x [{y0}, {y1}]"
            )));
        }
        Ok(Self { x0, x1, y0, y1 })
    }

    pub(crate) const fn raw(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        Self { x0, x1, y0, y1 }
    }

    pub fn area(&self) -> f64 {
        (self.x1 - self.x0) * (self.y1 - self.y0)
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        let in_x = self.x0 <= x && (x < self.x1 || (self.x1 == 1.0 && x == 1.0));
        let in_y = self.y0 <= y && (y < self.y1 || (self.y1 == 1.0 && y == 1.0));
        in_x && in_y
    }

    /// Intersection with the closed rectangle `[xa, xb] x [ya, yb]`, if it has
    /// positive area.
    pub fn clip(&self, xa: f64, xb: f64, ya: f64, yb: f64) -> Option<Self> {
        let x0 = self.x0.max(xa);
        let x1 = self.x1.min(xb);
        let y0 = self.y0.max(ya);
        let y1 = self.y1.min(yb);
        (x0 < x1 && y0 < y1).then_some(Self { x0, x1, y0, y1 })
    }

    fn corners(&self) -> [(f64, f64); 4] {
        [
            (self.x0, self.y0),
            (self.x0, self.y1),
            (self.x1, self.y0),
            (self.x1, self.y1),
        ]
    }
}

/// Shape of a density piece.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PieceKind {
    Constant {
        value: f64,
    },
    /// `36 / (1 + 8a) * (5 - 6(x + y)) / (6(y - x))`.
    Q1Analytic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Piece {
    #[serde(rename = "box")]
    pub bbox: AxisAlignedBox,
    #[serde(flatten)]
    pub kind: PieceKind,
}

impl Piece {
    pub fn constant(bbox: AxisAlignedBox, value: f64) -> Self {
        Self {
            bbox,
            kind: PieceKind::Constant { value },
        }
    }

    pub fn q1_analytic(bbox: AxisAlignedBox) -> Self {
        Self {
            bbox,
            kind: PieceKind::Q1Analytic,
        }
    }

    fn value_at(&self, x: f64, y: f64) -> f64 {
        match self.kind {
            PieceKind::Constant { value } => value,
            PieceKind::Q1Analytic => BASE_SCALE * analytic_factor(x, y),
        }
    }

    /// Supremum of the piece on its box.
    pub fn sup(&self) -> f64 {
        match self.kind {
            PieceKind::Constant { value } => value,
            // The factor is monotone in each coordinate, so extremes sit at corners.
            PieceKind::Q1Analytic => {
                BASE_SCALE
                    * self
                        .bbox
                        .corners()
                        .iter()
                        .map(|&(x, y)| analytic_factor(x, y))
                        .fold(f64::NEG_INFINITY, f64::max)
            }
        }
    }

    fn inf(&self) -> f64 {
        match self.kind {
            PieceKind::Constant { value } => value,
            PieceKind::Q1Analytic => {
                BASE_SCALE
                    * self
                        .bbox
                        .corners()
                        .iter()
                        .map(|&(x, y)| analytic_factor(x, y))
                        .fold(f64::INFINITY, f64::min)
            }
        }
    }

    /// Mass of the piece inside `sub`, which must lie inside the piece's box.
    fn mass_on(&self, sub: &AxisAlignedBox) -> f64 {
        match self.kind {
            PieceKind::Constant { value } => value * sub.area(),
            PieceKind::Q1Analytic => BASE_SCALE * factor_mass(sub),
        }
    }

    /// `int int (y - x - shift) * density` over `sub`.
    fn weighted_on(&self, sub: &AxisAlignedBox, shift: f64) -> f64 {
        let (xc, yc) = (0.5 * (sub.x0 + sub.x1), 0.5 * (sub.y0 + sub.y1));
        match self.kind {
            // Linear integrand: area times its value at the centroid.
            PieceKind::Constant { value } => value * sub.area() * ((yc - xc) - shift),
            PieceKind::Q1Analytic => {
                // factor * (y - x) = (5 - 6(x + y)) / 6 is linear.
                let moment = sub.area() * (5.0 - 6.0 * (xc + yc)) / 6.0;
                BASE_SCALE * (moment - shift * factor_mass(sub))
            }
        }
    }
}

/// `(5 - 6(x + y)) / (6(y - x))`.
#[inline]
pub fn analytic_factor(x: f64, y: f64) -> f64 {
    (5.0 - 6.0 * (y + x)) / (6.0 * (y - x))
}

/// Antiderivative in `y` of `(5 - 12y) ln(y - c)`.
fn log_antiderivative(c: f64, y: f64) -> f64 {
    let w = y - c;
    let lw = w.ln();
    (5.0 - 12.0 * c) * (w * lw - w) - 6.0 * w * w * lw + 3.0 * w * w
}

/// Exact integral of the analytic factor over a box with `y0 > x1`.
///
/// Writing the factor as `1 + (5 - 12y) / (6(y - x))`, the `x` integral is a
/// logarithm and the `y` integral has the antiderivative above.
pub fn factor_mass(b: &AxisAlignedBox) -> f64 {
    debug_assert!(b.y0 > b.x1);
    let g = |y: f64| log_antiderivative(b.x0, y) - log_antiderivative(b.x1, y);
    b.area() + (g(b.y1) - g(b.y0)) / 6.0
}

/// Same integral by adaptive Simpson quadrature of the inner closed form.
/// Kept as an independent route for checks.
pub fn factor_mass_quadrature(b: &AxisAlignedBox, tol: f64) -> f64 {
    let inner = |y: f64| (b.x1 - b.x0) + (5.0 - 12.0 * y) / 6.0 * ((y - b.x0) / (y - b.x1)).ln();
    adaptive_simpson(&inner, b.y0, b.y1, tol)
}

/// Adaptive Simpson integration to absolute tolerance `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn step<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let diff = left + right - whole;
        if depth == 0 || diff.abs() <= 15.0 * tol {
            return left + right + diff / 15.0;
        }
        step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    step(f, a, b, fa, fm, fb, whole, tol, 48)
}

/// A density made of pieces with disjoint supports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDensity", into = "RawDensity")]
pub struct PiecewiseDensity {
    pieces: Vec<Piece>,
    smoothness_sigma: f64,
    cumulative: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawDensity {
    pieces: Vec<Piece>,
    smoothness_sigma: f64,
}

impl TryFrom<RawDensity> for PiecewiseDensity {
    type Error = TradeError;
    fn try_from(raw: RawDensity) -> Result<Self> {
        PiecewiseDensity::new(raw.pieces, raw.smoothness_sigma)
    }
}

impl From<PiecewiseDensity> for RawDensity {
    fn from(d: PiecewiseDensity) -> Self {
        RawDensity {
            pieces: d.pieces,
            smoothness_sigma: d.smoothness_sigma,
        }
    }
}

const REJECTION_CAP: usize = 1_000_000;

impl PiecewiseDensity {
    pub fn new(pieces: Vec<Piece>, smoothness_sigma: f64) -> Result<Self> {
        if pieces.is_empty() {
            return Err(TradeError::InvalidParameter("density has no pieces".into()));
        }
        if !(smoothness_sigma > 0.0 && smoothness_sigma <= 1.0) {
            return Err(TradeError::InvalidParameter(format!(
                "smoothness level {smoothness_sigma} outside (0, 1]"
            )));
        }
        for piece in &pieces {
            AxisAlignedBox::new(piece.bbox.x0, piece.bbox.x1, piece.bbox.y0, piece.bbox.y1)?;
            if let PieceKind::Q1Analytic = piece.kind {
                if piece.bbox.y0 <= piece.bbox.x1 {
                    return Err(TradeError::InvalidParameter(
                        "analytic piece needs its box strictly above the diagonal".into(),
                    ));
                }
            }
            if piece.inf() < 0.0 || !piece.sup().is_finite() {
                return Err(TradeError::InvalidParameter(
                    "density pieces must be finite and nonnegative".into(),
                ));
            }
        }
        let mut acc = 0.0;
        let cumulative = pieces
            .iter()
            .map(|p| {
                acc += p.mass_on(&p.bbox);
                acc
            })
            .collect();
        Ok(Self {
            pieces,
            smoothness_sigma,
            cumulative,
        })
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn smoothness_sigma(&self) -> f64 {
        self.smoothness_sigma
    }

    pub fn value(&self, x: f64, y: f64) -> f64 {
        self.pieces
            .iter()
            .filter(|p| p.bbox.contains(x, y))
            .map(|p| p.value_at(x, y))
            .sum()
    }

    pub fn total_mass(&self) -> f64 {
        *self.cumulative.last().unwrap_or(&0.0)
    }

    pub fn sup(&self) -> f64 {
        self.pieces.iter().map(Piece::sup).fold(0.0, f64::max)
    }

    /// Probability of the closed rectangle `[xa, xb] x [ya, yb]`.
    pub fn mass_in(&self, xa: f64, xb: f64, ya: f64, yb: f64) -> f64 {
        self.pieces
            .iter()
            .filter_map(|p| p.bbox.clip(xa, xb, ya, yb).map(|sub| p.mass_on(&sub)))
            .sum()
    }

    /// Expected gain from trade of the pair `(p, q)`.
    pub fn expected_gft(&self, p: f64, q: f64, d: GftDefinition) -> f64 {
        let shift = match d {
            GftDefinition::SurplusSplit => q - p,
            GftDefinition::FullSurplus => 0.0,
        };
        self.pieces
            .iter()
            .filter_map(|piece| {
                piece
                    .bbox
                    .clip(0.0, p, q, 1.0)
                    .map(|sub| piece.weighted_on(&sub, shift))
            })
            .sum()
    }

    /// Probabilities of `(1{S <= p}, 1{q <= B})` in the order
    /// `(0,0), (0,1), (1,0), (1,1)`.
    pub fn feedback_probs(&self, p: f64, q: f64) -> [f64; 4] {
        [
            self.mass_in(p, 1.0, 0.0, q),
            self.mass_in(p, 1.0, q, 1.0),
            self.mass_in(0.0, p, 0.0, q),
            self.mass_in(0.0, p, q, 1.0),
        ]
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<ValuationPair> {
        let total = self.total_mass();
        let u = rng.random::<f64>() * total;
        let idx = self
            .cumulative
            .partition_point(|&c| c <= u)
            .min(self.pieces.len() - 1);
        let piece = &self.pieces[idx];
        let b = piece.bbox;
        let (s, v) = match piece.kind {
            PieceKind::Constant { .. } => (
                b.x0 + (b.x1 - b.x0) * rng.random::<f64>(),
                b.y0 + (b.y1 - b.y0) * rng.random::<f64>(),
            ),
            PieceKind::Q1Analytic => {
                let envelope = piece.sup();
                let mut found = None;
                for _ in 0..REJECTION_CAP {
                    let x = b.x0 + (b.x1 - b.x0) * rng.random::<f64>();
                    let y = b.y0 + (b.y1 - b.y0) * rng.random::<f64>();
                    if rng.random::<f64>() * envelope <= piece.value_at(x, y) {
                        found = Some((x, y));
                        break;
                    }
                }
                found.ok_or(TradeError::RejectionExhausted(REJECTION_CAP))?
            }
        };
        Ok(ValuationPair { s, b: v })
    }
}
