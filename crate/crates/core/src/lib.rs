//! Exact coarse dynamics of weighted shift operators on sequence spaces.

pub mod certificates;
pub mod error;
pub mod limit_sets;
pub mod operators;
pub mod orbits;
pub mod scalar;
pub mod spaces;

pub use error::{Error, Result};
pub use scalar::{Exact, Float, NumericMode};
