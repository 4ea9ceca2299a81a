//! Discretized operators on periodic grids: pseudo-differential operators in
//! every `t`-quantization, Fourier integral operators with tempered phases,
//! the phase-space reformulation of their pairings, and the kernel/symbol
//! short-time-transform identities.

mod fio;
mod identities;
mod matrix;
mod phase;
mod pseudo;
mod reformulation;

pub use fio::{
    axes_edge_ratio, fio_kernel, op_fio, op_fio_rotated, op_fio_torus, AMPLITUDE_EDGE_TOLERANCE, NYQUIST_TOLERANCE,
    ROTATION_TOLERANCE,
};
pub use identities::{
    gaussian_closed_form, gaussian_identity_check, kernel_operator, kernel_stft_identity, kernel_symbol_norm_ratio,
    symbol_kernel_stft_check, GaussianIdentityReport, InducedWindow, KernelIdentityReport, LatticeSample,
};
pub use matrix::{apply_kernel, OperatorMatrix};
pub use phase::{
    determinant, nondegeneracy, HessianBlock, Nondegeneracy, NondegeneracyVariant, PhaseEval, PhaseFamily, PhaseSpec,
    DEGENERACY_TOLERANCE,
};
pub use pseudo::{is_matched, op_pseudo, pseudo_kernel, quantization_transfer};
pub use reformulation::{
    averaging_constant, direct_pairing, h_convolution_check, h_function, remainder_rule, stft_reformulation_pair,
    taylor_remainder, PhaseTaylorSplit, ReformulationWindows, MAX_REFORMULATION_POINTS, REMAINDER_NODES,
};
