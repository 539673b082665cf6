//! Spectral toolkit for perturbations of rotating plane Couette flow.
//!
//! Everything is expressed in the sheared frame `X = x - t y`. Per-mode
//! closed forms live in [`linear`], the multipliers `m` and `M` in
//! [`multipliers`], the pseudospectral solver in [`sim`], weighted norms in
//! [`diagnostics`] and amplitude sweeps in [`harness`].

pub mod diagnostics;
pub mod error;
pub mod fft;
pub mod harness;
pub mod linear;
pub mod multipliers;
pub mod quadrature;
pub mod sim;
pub mod snapshot;
pub mod spectral;

pub use error::{Error, Result};
pub use sim::{SimConfig, VelocityField};
pub use spectral::{GridSpec, SpectralField, WaveVector};
