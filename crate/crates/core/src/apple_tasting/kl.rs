use crate::adversary::lower_bound::{spike_eps, C_PROB};
use crate::error::{check_unit, Result, TradeError};
use crate::trade::ceil_root;

/// `KL(Ber(p) || Ber(q))` in nats; infinite when `p` puts mass where `q` has none.
pub fn bernoulli_kl(p: f64, q: f64) -> Result<f64> {
    check_unit("p", p)?;
    check_unit("q", q)?;
    let term = |a: f64, b: f64| {
        if a == 0.0 {
            0.0
        } else if b == 0.0 {
            f64::INFINITY
        } else {
            a * (a / b).ln()
        }
    };
    Ok(term(p, q) + term(1.0 - p, 1.0 - q))
}

/// Both sides of the per-observation KL bound at horizon `t`:
/// `(1/2)(ln(1/2 / (1/2 - c)) + ln(1/2 / (1/2 + c)))` and `4 c^2`, with
/// `c = c_prob / (12 ceil(t^(1/4)))`.
pub fn useful_inequality_terms(t: u64) -> Result<(f64, f64)> {
    if t < 8008 {
        return Err(TradeError::InvalidParameter(format!(
            "the KL bound is stated for T >= 8008, got {t}"
        )));
    }
    let c = C_PROB * spike_eps(ceil_root(t, 4) as usize);
    let lhs = 0.5 * ((0.5 / (0.5 - c)).ln() + (0.5 / (0.5 + c)).ln());
    Ok((lhs, 4.0 * c * c))
}

pub fn check_useful_inequality(t: u64) -> Result<bool> {
    let (lhs, rhs) = useful_inequality_terms(t)?;
    Ok(lhs <= rhs)
}
