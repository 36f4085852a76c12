//! Performance analysis of multi-layer underwater optical links.

pub mod cascade;
pub mod error;
pub mod metrics;
pub mod mixed;
pub mod montecarlo;
pub mod reference;
pub mod special;
pub mod turbulence;

pub use error::{Error, Result};
