//! Dantzig-selector learners for online sparse linear regression when only a
//! few attributes of each instance may be observed.

pub mod dantzig;
pub mod error;
pub mod estimation;
pub mod harness;
pub mod ons;
pub mod orchestration;
pub mod sampling;
pub mod schedule;
pub mod simplex;
pub mod synth;

pub use error::{Error, Result};
