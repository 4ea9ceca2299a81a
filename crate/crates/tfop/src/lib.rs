//! Time-frequency numerics: sampled short-time Fourier transforms, weighted
//! modulation and mixed norms, pseudo-differential and Fourier integral
//! operators on periodic grids, Schatten spectra, and a verification harness.

pub mod error;
pub mod grid;
pub mod harness;
pub mod norms;
pub mod operators;
pub mod schatten;
pub mod stft;
pub mod weights;
pub mod window;

pub use error::{Error, Result};
pub use grid::{GridSpec, SampledFunction};
