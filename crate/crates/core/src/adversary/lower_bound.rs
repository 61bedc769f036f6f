//! The hard instance for two prices and one-bit feedback.
//!
//! A base density `f` on six boxes keeps the expected gain from trade flat on
//! `[1/6, 1/2]`. A perturbation `g_{v, eps}` moves mass inside the exploring box
//! `LB_Q6` and raises the expected gain by a small tent around `v`, while the
//! two-bit feedback only changes for prices in the four rectangles it touches.

use serde::{Deserialize, Serialize};

use crate::error::{Result, TradeError};

use super::geometry::{AxisAlignedBox, Piece, PiecewiseDensity};

/// Normalization constant `2 ln(27/16)`.
pub const A: f64 = 1.046_496_287_529_095_7;

/// `36 / (1 + 8a)`: the density unit on every box.
pub const BASE_SCALE: f64 = 36.0 / (1.0 + 8.0 * A);

pub const LB_SIGMA: f64 = 1.0 / 9.0;

const SIXTH: f64 = 1.0 / 6.0;
const THIRD: f64 = 1.0 / 3.0;
const TWO_THIRDS: f64 = 2.0 / 3.0;
const FIVE_SIXTHS: f64 = 5.0 / 6.0;

pub const LB_Q1: AxisAlignedBox = AxisAlignedBox::raw(0.0, SIXTH, THIRD, 0.5);
pub const LB_Q2: AxisAlignedBox = AxisAlignedBox::raw(0.0, SIXTH, 0.5, TWO_THIRDS);
pub const LB_Q3: AxisAlignedBox = AxisAlignedBox::raw(0.0, SIXTH, FIVE_SIXTHS, 1.0);
pub const LB_Q4: AxisAlignedBox = AxisAlignedBox::raw(FIVE_SIXTHS, 1.0, FIVE_SIXTHS, 1.0);
pub const LB_Q5: AxisAlignedBox = AxisAlignedBox::raw(FIVE_SIXTHS, 1.0, 0.0, SIXTH);
pub const LB_Q6: AxisAlignedBox = AxisAlignedBox::raw(THIRD, 0.5, TWO_THIRDS, FIVE_SIXTHS);

/// Exploration constant of the reduction, `3 / (4a)`.
pub const C_PROB: f64 = 3.0 / (4.0 * A);
/// Plateau gap `a / (2(1 + 8a))`.
pub const C_PLAT: f64 = A / (2.0 * (1.0 + 8.0 * A));
/// Guaranteed cost of suboptimality per unit of `eps`, `1 / (864(1 + 8a))`.
pub const C_SPIKE: f64 = 1.0 / (864.0 * (1.0 + 8.0 * A));

/// Height of the spike at `v` per unit of `eps`: the integral of
/// `(y - x) g_{v, eps}` over the trade region, `1 / (4(1 + 8a))`.
pub const SPIKE_SLOPE: f64 = 1.0 / (4.0 * (1.0 + 8.0 * A));

/// Height of the second bump at `3/4` per unit of `eps^2`, `3 / (1 + 8a)`.
pub const BUMP_SLOPE: f64 = 3.0 / (1.0 + 8.0 * A);

/// Center and radius of a perturbation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbationParams {
    pub v: f64,
    pub eps: f64,
}

const XI_TOL: f64 = 1e-12;

impl PerturbationParams {
    /// Checks membership in the admissible set: `eps in (0, 1/12]` and
    /// `1/3 + eps <= v <= 1/2 - eps`.
    pub fn new(v: f64, eps: f64) -> Result<Self> {
        let ok = eps > 0.0
            && eps <= 1.0 / 12.0 + XI_TOL
            && v >= THIRD + eps - XI_TOL
            && v <= 0.5 - eps + XI_TOL;
        if !ok {
            return Err(TradeError::InvalidParameter(format!(
                "perturbation (v = {v}, eps = {eps}) is not admissible"
            )));
        }
        Ok(Self { v, eps })
    }

    /// The perturbation for spike `k` of the `K`-strip construction.
    pub fn spike(big_k: usize, k: usize) -> Result<Self> {
        if big_k == 0 || k == 0 || k > big_k {
            return Err(TradeError::InvalidParameter(format!(
                "spike index {k} outside 1..={big_k}"
            )));
        }
        Self::new(spike_center(big_k, k), spike_eps(big_k))
    }

    /// `R1..R4`: `g` is `+C` on `R1`, `R4` and `-C` on `R2`, `R3`.
    pub fn rectangles(&self) -> [AxisAlignedBox; 4] {
        let (v, e) = (self.v, self.eps);
        [
            AxisAlignedBox::raw(v - e, v, 0.75, FIVE_SIXTHS),
            AxisAlignedBox::raw(v - e, v, TWO_THIRDS, 0.75),
            AxisAlignedBox::raw(v, v + e, 0.75, FIVE_SIXTHS),
            AxisAlignedBox::raw(v, v + e, TWO_THIRDS, 0.75),
        ]
    }

    /// The signed perturbation as `(box, value)` pairs.
    pub fn signed_pieces(&self) -> [(AxisAlignedBox, f64); 4] {
        let [r1, r2, r3, r4] = self.rectangles();
        [
            (r1, BASE_SCALE),
            (r2, -BASE_SCALE),
            (r3, -BASE_SCALE),
            (r4, BASE_SCALE),
        ]
    }

    /// Pointwise value of `g_{v, eps}`.
    pub fn perturbation_density(&self, x: f64, y: f64) -> f64 {
        self.signed_pieces()
            .iter()
            .filter(|(b, _)| b.contains(x, y))
            .map(|(_, c)| c)
            .sum()
    }
}

/// `eps = 1/(12K)`.
pub fn spike_eps(big_k: usize) -> f64 {
    1.0 / (12.0 * big_k as f64)
}

/// `v_k = 1/3 + (2k - 1) eps`.
pub fn spike_center(big_k: usize, k: usize) -> f64 {
    (4 * big_k + 2 * k - 1) as f64 / (12 * big_k) as f64
}

/// `[v_k - eps, v_k + eps]` computed as exact ratios, so strip 1 starts at
/// `1/3` and strip `K` ends at `1/2` without rounding.
pub fn strip_bounds(big_k: usize, k: usize) -> (f64, f64) {
    let lo = (2 * big_k + k - 1) as f64 / (6 * big_k) as f64;
    let hi = (2 * big_k + k) as f64 / (6 * big_k) as f64;
    (lo, hi)
}

/// Tent map `max(0, 1 - |x - u| / r)`.
pub fn tent(x: f64, u: f64, r: f64) -> f64 {
    (1.0 - (x - u).abs() / r).max(0.0)
}

pub fn base_pieces() -> Vec<Piece> {
    vec![
        Piece::q1_analytic(LB_Q1),
        Piece::constant(LB_Q2, A * BASE_SCALE),
        Piece::constant(LB_Q3, 2.0 * A * BASE_SCALE),
        Piece::constant(LB_Q4, 2.0 * A * BASE_SCALE),
        Piece::constant(LB_Q5, 2.0 * A * BASE_SCALE),
        Piece::constant(LB_Q6, BASE_SCALE),
    ]
}

/// The base density `f`.
pub fn base_density() -> PiecewiseDensity {
    PiecewiseDensity::new(base_pieces(), LB_SIGMA).expect("base density is well formed")
}

/// `f + g_{v, eps}`, with `LB_Q6` split so that pieces stay disjoint.
pub fn perturbed_density(pert: &PerturbationParams) -> PiecewiseDensity {
    let mut pieces = base_pieces();
    pieces.pop();
    let (lo, hi) = (pert.v - pert.eps, pert.v + pert.eps);
    if lo > LB_Q6.x0 {
        pieces.push(Piece::constant(
            AxisAlignedBox::raw(LB_Q6.x0, lo, LB_Q6.y0, LB_Q6.y1),
            BASE_SCALE,
        ));
    }
    if hi < LB_Q6.x1 {
        pieces.push(Piece::constant(
            AxisAlignedBox::raw(hi, LB_Q6.x1, LB_Q6.y0, LB_Q6.y1),
            BASE_SCALE,
        ));
    }
    for (rect, sign) in pert.signed_pieces() {
        pieces.push(Piece::constant(rect, BASE_SCALE + sign));
    }
    PiecewiseDensity::new(pieces, LB_SIGMA).expect("perturbed density is well formed")
}

/// Closed-form expected gain from trade of a single price under `f`.
pub fn expected_gft_base(p: f64) -> f64 {
    let a = A;
    let num = if p <= SIXTH {
        3.0 * p * (5.0 + 29.0 * a - 6.0 * (1.0 + 3.0 * a) * p)
    } else if p <= 0.5 {
        2.0 + 13.0 * a
    } else if p <= TWO_THIRDS {
        -18.0 * a * p * p + 3.0 * a * p + 2.0 * (1.0 + 8.0 * a)
    } else if p <= FIVE_SIXTHS {
        -18.0 * p * p + 15.0 * p + 10.0 * a
    } else {
        72.0 * a * p * (1.0 - p)
    };
    num / (6.0 * (1.0 + 8.0 * a))
}

/// Value of the plateau `[1/6, 1/2]`.
pub fn plateau_value() -> f64 {
    (2.0 + 13.0 * A) / (6.0 * (1.0 + 8.0 * A))
}

/// Closed-form expected gain from trade of a single price under `f_{v, eps}`.
pub fn expected_gft_perturbed(p: f64, pert: &PerturbationParams) -> f64 {
    let e = pert.eps;
    expected_gft_base(p)
        + e * SPIKE_SLOPE * tent(p, pert.v, e)
        + e * e * BUMP_SLOPE * tent(p, 0.75, 1.0 / 12.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trade::GftDefinition;
    use approx::assert_abs_diff_eq;

    #[test]
    fn constants() {
        assert_abs_diff_eq!(A, 2.0 * (27.0f64 / 16.0).ln(), epsilon = 1e-15);
        assert_abs_diff_eq!(C_PROB, 0.716677, epsilon = 1e-6);
        assert_abs_diff_eq!(C_PLAT, 0.0558312, epsilon = 1e-7);
        assert_abs_diff_eq!(C_SPIKE * 864.0 * (1.0 + 8.0 * A), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(SPIKE_SLOPE, 216.0 * C_SPIKE, epsilon = 1e-15);
    }

    #[test]
    fn base_masses() {
        let f = base_density();
        let unit = 1.0 + 8.0 * A;
        assert_abs_diff_eq!(f.mass_in(0.0, SIXTH, THIRD, 0.5), A / unit, epsilon = 1e-13);
        assert_abs_diff_eq!(
            f.mass_in(0.0, SIXTH, 0.5, TWO_THIRDS),
            A / unit,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            f.mass_in(5.0 / 6.0, 1.0, 0.0, SIXTH),
            2.0 * A / unit,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(f.total_mass(), 1.0, epsilon = 1e-13);
        assert_abs_diff_eq!(f.sup(), 72.0 * A / unit, epsilon = 1e-12);
    }

    #[test]
    fn closed_form_matches_integrator() {
        let f = base_density();
        for i in 0..=600 {
            let p = i as f64 / 600.0;
            let exact = f.expected_gft(p, p, GftDefinition::SurplusSplit);
            assert_abs_diff_eq!(expected_gft_base(p), exact, epsilon = 1e-13);
        }
    }

    #[test]
    fn closed_form_examples_and_continuity() {
        assert_abs_diff_eq!(expected_gft_base(0.3), 0.277502, epsilon = 1e-6);
        assert_eq!(expected_gft_base(1.0), 0.0);
        assert_abs_diff_eq!(expected_gft_base(TWO_THIRDS), 0.221671, epsilon = 1e-6);
        for bp in [SIXTH, 0.5, TWO_THIRDS, FIVE_SIXTHS] {
            let l = expected_gft_base(bp - 1e-12);
            let r = expected_gft_base(bp + 1e-12);
            assert!((l - r).abs() < 1e-9, "jump at {bp}");
        }
    }

    #[test]
    fn perturbed_closed_form_matches_integrator() {
        let pert = PerturbationParams::new(17.0 / 48.0, 1.0 / 48.0).unwrap();
        let f = perturbed_density(&pert);
        assert_abs_diff_eq!(f.total_mass(), 1.0, epsilon = 1e-13);
        for i in 0..=960 {
            let p = i as f64 / 960.0;
            let exact = f.expected_gft(p, p, GftDefinition::SurplusSplit);
            assert_abs_diff_eq!(expected_gft_perturbed(p, &pert), exact, epsilon = 1e-13);
        }
        let apex = expected_gft_perturbed(pert.v, &pert);
        assert_abs_diff_eq!(
            apex,
            plateau_value() + pert.eps * SPIKE_SLOPE,
            epsilon = 1e-15
        );
        let bump = expected_gft_perturbed(0.75, &pert) - expected_gft_base(0.75);
        assert_abs_diff_eq!(bump, pert.eps * pert.eps * BUMP_SLOPE, epsilon = 1e-15);
        assert!(apex - plateau_value() >= pert.eps * C_SPIKE);
        let edge = pert.v + pert.eps;
        assert_eq!(expected_gft_perturbed(edge, &pert), expected_gft_base(edge));
    }

    #[test]
    fn perturbation_values() {
        let pert = PerturbationParams::new(0.4, 0.05).unwrap();
        let f = perturbed_density(&pert);
        let [r1, r2, r3, r4] = pert.rectangles();
        let mid = |b: AxisAlignedBox| (0.5 * (b.x0 + b.x1), 0.5 * (b.y0 + b.y1));
        for (rect, expect) in [(r1, 2.0), (r2, 0.0), (r3, 0.0), (r4, 2.0)] {
            let (x, y) = mid(rect);
            assert_abs_diff_eq!(f.value(x, y), expect * BASE_SCALE, epsilon = 1e-12);
        }
        let total: f64 = pert.signed_pieces().iter().map(|(b, c)| b.area() * c).sum();
        assert_abs_diff_eq!(total, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn admissible_set() {
        assert!(PerturbationParams::new(0.4, 0.05).is_ok());
        assert!(PerturbationParams::new(0.4, 0.1).is_err());
        assert!(PerturbationParams::new(0.34, 0.05).is_err());
        assert!(PerturbationParams::new(0.4, 0.0).is_err());
        for big_k in 1..40 {
            for k in 1..=big_k {
                assert!(PerturbationParams::spike(big_k, k).is_ok());
            }
            assert_eq!(strip_bounds(big_k, 1).0, THIRD);
            assert_eq!(strip_bounds(big_k, big_k).1, 0.5);
        }
    }
}
