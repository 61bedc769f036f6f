use thiserror::Error;

/// Errors raised by the simulation library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum TradeError {
    #[error("{name} = {value} is outside [0, 1]")]
    OutOfUnitInterval { name: &'static str, value: f64 },

    #[error("price pair ({p}, {q}) violates budget balance (p > q)")]
    NotBudgetBalanced { p: f64, q: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("incompatible configuration: {0}")]
    Incompatible(String),

    #[error("rejection sampler exhausted {0} proposals; the density is malformed")]
    RejectionExhausted(usize),

    #[error("four-outcome decomposition infeasible: {0}")]
    NotRepresentable(String),

    #[error("unknown {kind} '{name}'")]
    UnknownName { kind: &'static str, name: String },

    #[error("i/o: {0}")]
    Io(String),

    #[error("serialization: {0}")]
    Serde(String),
}

impl From<std::io::Error> for TradeError {
    fn from(e: std::io::Error) -> Self {
        TradeError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for TradeError {
    fn from(e: serde_json::Error) -> Self {
        TradeError::Serde(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, TradeError>;

pub(crate) fn check_unit(name: &'static str, value: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(TradeError::OutOfUnitInterval { name, value })
    }
}
