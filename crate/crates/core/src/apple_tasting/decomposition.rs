use serde::{Deserialize, Serialize};

use crate::error::{Result, TradeError};

/// Entries of `mu0`/`mu1` down to `-REPRESENTABILITY_TOL` count as rounding
/// noise and are set to zero; anything more negative is an error.
pub const REPRESENTABILITY_TOL: f64 = 1e-12;

/// Two laws on four outcomes such that mixing them with weight `p` on `mu1`
/// reproduces the feedback law of a scenario whose bit has mean `p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FourOutcomeDecomposition {
    pub mu0: [f64; 4],
    pub mu1: [f64; 4],
}

impl FourOutcomeDecomposition {
    /// `(1 - p) mu0 + p mu1`.
    pub fn mix(&self, p: f64) -> [f64; 4] {
        std::array::from_fn(|j| (1.0 - p) * self.mu0[j] + p * self.mu1[j])
    }

    /// Outcome index drawn from `mu_y` by inverse CDF at `u` in `[0, 1)`.
    pub fn simulate(&self, y: bool, u: f64) -> usize {
        inverse_cdf(if y { &self.mu1 } else { &self.mu0 }, u)
    }
}

pub(crate) fn inverse_cdf(weights: &[f64; 4], u: f64) -> usize {
    let mut acc = 0.0;
    for (j, &w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            return j;
        }
    }
    weights.iter().rposition(|&w| w > 0.0).unwrap_or(3)
}

/// Solves `(1 - p0) mu0 + p0 mu1 = p0_fb` and `(1 - pk) mu0 + pk mu1 = pk_fb`.
pub fn decompose_feedback(
    p0_fb: [f64; 4],
    pk_fb: [f64; 4],
    p0: f64,
    pk: f64,
) -> Result<FourOutcomeDecomposition> {
    if !(p0 > 0.0 && p0 < 1.0) || !(0.0..=1.0).contains(&pk) {
        return Err(TradeError::InvalidParameter(format!(
            "need p0 in (0, 1) and pk in [0, 1], got p0 = {p0}, pk = {pk}"
        )));
    }
    for fb in [&p0_fb, &pk_fb] {
        let total: f64 = fb.iter().sum();
        if fb.iter().any(|x| x.is_nan() || *x < 0.0) || (total - 1.0).abs() > 1e-9 {
            return Err(TradeError::InvalidParameter(format!(
                "feedback law {fb:?} is not a probability vector"
            )));
        }
    }
    if p0 == pk {
        if p0_fb
            .iter()
            .zip(&pk_fb)
            .any(|(a, b)| (a - b).abs() > REPRESENTABILITY_TOL)
        {
            return Err(TradeError::NotRepresentable(
                "equal bit means but different feedback laws".into(),
            ));
        }
        return Ok(FourOutcomeDecomposition {
            mu0: p0_fb,
            mu1: p0_fb,
        });
    }
    let (p, q) = (p0, pk);
    let mut mu0: [f64; 4] = std::array::from_fn(|j| (q * p0_fb[j] - p * pk_fb[j]) / (q - p));
    let mut mu1: [f64; 4] =
        std::array::from_fn(|j| ((1.0 - p) * pk_fb[j] - (1.0 - q) * p0_fb[j]) / (q - p));
    for (name, mu) in [("mu0", &mut mu0), ("mu1", &mut mu1)] {
        for x in mu.iter_mut() {
            if *x < -REPRESENTABILITY_TOL {
                return Err(TradeError::NotRepresentable(format!(
                    "{name} has a negative entry {x:e}"
                )));
            }
            *x = x.max(0.0);
        }
    }
    Ok(FourOutcomeDecomposition { mu0, mu1 })
}
