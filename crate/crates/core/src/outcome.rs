use serde::Serialize;
use thiserror::Error;

/// A closed non-value with no applicable rule. Unreachable for well-typed terms.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("stuck term: {0}")]
pub struct Stuck(pub String);

/// Result of running a closed program under a step budget.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Outcome<T> {
    Value(T),
    TypeError,
    /// The budget ran out; carries the term reached so far.
    FuelExhausted(T),
}

impl<T> Outcome<T> {
    pub fn is_value(&self) -> bool {
        matches!(self, Outcome::Value(_))
    }

    pub fn is_error(&self) -> bool {
        matches!(self, Outcome::TypeError)
    }

    pub fn is_exhausted(&self) -> bool {
        matches!(self, Outcome::FuelExhausted(_))
    }

    pub fn value(&self) -> Option<&T> {
        match self {
            Outcome::Value(v) => Some(v),
            _ => None,
        }
    }

    /// Short label: `value`, `error` or `fuel`.
    pub fn kind(&self) -> &'static str {
        match self {
            Outcome::Value(_) => "value",
            Outcome::TypeError => "error",
            Outcome::FuelExhausted(_) => "fuel",
        }
    }
}

/// Typed-language outcome together with the accumulated unroll weight.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WeightedOutcome<T> {
    pub outcome: Outcome<T>,
    pub unrolls: u64,
    pub steps: u64,
}
