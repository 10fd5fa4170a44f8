//! Desk-scale numerical laboratory for the fractional diffusion equation with
//! time-weighted absorption, d_t u + (-Lap)^s u + t^beta u^p = 0 on R^N.
//!
//! The crate provides the fractional heat kernel, two realizations of the
//! fractional Laplacian, an exact-substep splitting solver, self-similar
//! rescaling diagnostics, and the barrier construction behind the uniqueness
//! argument, each validated against closed forms where they exist.

pub mod error;
pub mod quad;
pub mod model;
pub mod grid;
pub mod datum;
pub mod kernel;
pub mod fraclap;
pub mod evolve;
pub mod analysis;
pub mod barrier;
pub mod report;
pub mod suite;

pub use error::{FracError, Result};
