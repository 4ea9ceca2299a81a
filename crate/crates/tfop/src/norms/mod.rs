//! Norm functionals on sampled data: nested mixed Lebesgue reductions of
//! short-time transforms (modulation, coorbit, amplitude norms), patch norms
//! built from a partition of unity, and `C^{N,p}` norms of smooth amplitudes.

mod amplitude;
mod modulation;
mod reduce;
mod smooth;

pub use amplitude::{amplitude_norm, AmplitudeLayout, AmplitudeParams, AmplitudeVariant};
pub use modulation::{
    coorbit_norm, embedding_ratio, modulation_norm, modulation_norm_streaming, patch_norm, EmbeddingReport, NormSpec,
};
pub use reduce::{check_exponent, nested_norm, ExponentSpec, Level, SubspacePartition};
pub use smooth::{cnp_norm, DerivativeOracle, GaussianAmplitude};
