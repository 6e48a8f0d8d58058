//! Weighted weak convergence, plank and cylinder coverings, and sign-pattern
//! cotype estimates in finite-dimensional Hilbert and `ℓ_p` models.

// Negated comparisons reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod constructions;
pub mod cotype;
pub mod error;
pub mod plank;
pub mod report;
pub mod seed;
pub mod space;
pub mod summability;

pub use error::{Error, Result};

pub const VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));
