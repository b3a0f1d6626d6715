//! Performance test generation with an online GAN.
//!
//! The crate searches a discrete configuration space for inputs whose
//! measured power reaches a threshold, under a fixed execution budget. Three
//! generators are provided: uniform random search, a discriminator-filtered
//! sampler (DN) and an online GAN (OGAN) whose generator and discriminator
//! are trained only from the tests executed so far.

pub mod error;
pub mod gan;
pub mod generators;
pub mod harness;
pub mod nn;
pub mod rng;
pub mod space;
pub mod sut;

pub use error::{Error, Result};
