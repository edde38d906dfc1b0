//! Coprime matchings between the divisors of `n` and integer intervals or
//! progressions, with certificates, census tables and proof replay.

pub mod apcomb;
pub mod arith;
pub mod census;
pub mod certificate;
mod error;
pub mod json;
pub mod matcher;
pub mod partition;
pub mod replay;

pub use error::{Error, Result};
