//! Truncated C-vine copula synthesizer for tabular data with a binary
//! response, plus the privacy and utility harness used to pick a
//! truncation level.

pub mod cvine;
pub mod datagen;
pub mod dataset;
pub mod error;
pub mod evaluation;
pub mod numerics;
pub mod ordering;
pub mod paircopula;
pub mod privacy;
pub mod synth;

pub use dataset::Dataset;
pub use error::{Error, Result};
