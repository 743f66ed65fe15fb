//! Spectral identification for dynamical sampling.
//!
//! Given samples `y_l = A B^l x` of an unknown state `x` driven by an
//! unknown operator `B`, this crate recovers the part of the spectrum of
//! `B` visible through the sampler `A`. For convolution operators observed
//! through a uniform subsampler it also recovers the filter and the state.

pub mod annihilator;
pub mod cli;
pub mod config;
pub mod error;
pub mod invariant;
pub mod model;
pub mod numerics;
pub mod prony;
pub mod spectral;

pub use config::Tolerances;
pub use error::{Error, Result};
