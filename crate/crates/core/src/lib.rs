//! Gradual cast calculus, its typed target, and the ep-pair machinery relating them.

pub mod approx;
pub mod dynamism;
pub mod elaborate;
pub mod env;
pub mod gradual;
pub mod outcome;
pub mod propgen;
pub mod suites;
pub mod text;
pub mod typed;

pub use env::Env;
pub use outcome::{Outcome, Stuck, WeightedOutcome};
pub use text::{ParseError, Pos};
