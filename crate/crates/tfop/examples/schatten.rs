//! Singular spectra and Schatten norms: a random matrix, its norm
//! monotonicity and log-convexity, and a Fourier integral operator whose
//! Hilbert–Schmidt norm matches the `L²` norm of its kernel.
//!
//! Run with `cargo run --release --example schatten`.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tfop::operators::{op_fio, PhaseSpec};
use tfop::schatten::{
    hs_kernel_identity, interpolation_audit, matrix_singular_values, random_matrix, schatten_norm, singular_values,
};
use tfop::{GridSpec, Result, SampledFunction};

fn main() -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let sigma = matrix_singular_values(&random_matrix(8, 8, &mut rng))?;
    for p in [1.0, 2.0, 4.0, f64::INFINITY] {
        println!("‖M‖_{{I_{p}}} = {:.6}", schatten_norm(&sigma, p)?);
    }
    println!("log-convexity slack (p = 1, 4, θ = 0.3): {:.3e}", interpolation_audit(&sigma, 1.0, 4.0, 0.3)?);

    let grid = GridSpec::new(3, 8.0, 16)?;
    let a = SampledFunction::from_fn(grid, |p| Complex64::new((-(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]) / 2.0).exp(), 0.0));
    let t = op_fio(&a, &PhaseSpec::bilinear(1))?;
    let s = singular_values(&t, None, None)?;
    println!("FIO: σ₁ = {:.6}, ‖T‖_{{I_2}} = {:.12}", s.largest(), schatten_norm(&s, 2.0)?);
    println!("|‖T‖_{{I_2}} − ‖K‖_{{L²}}| = {:.3e}", hs_kernel_identity(&t)?);
    Ok(())
}
