//! A Fourier integral operator with bilinear phase `⟨x − y, ζ⟩` and a
//! `y`-independent amplitude reduces to the Kohn–Nirenberg operator of the
//! amplitude; its phase is nondegenerate with `d = 1`.
//!
//! Run with `cargo run --release --example fio`.

use num_complex::Complex64;
use tfop::norms::AmplitudeLayout;
use tfop::operators::{nondegeneracy, op_fio, op_pseudo, NondegeneracyVariant, PhaseSpec};
use tfop::{GridSpec, Result, SampledFunction};

fn main() -> Result<()> {
    let grid = GridSpec::new(3, 8.0, 24)?;
    let phi = PhaseSpec::bilinear(1);
    let b = |x: f64, zeta: f64| Complex64::from_polar((-x * x / 2.0 - zeta * zeta / 2.0).exp(), 0.25 * x);
    let a = SampledFunction::from_fn(grid, |p| b(p[0], p[2]));
    let symbol = SampledFunction::from_fn(grid.with_dim(2), |p| b(p[0], p[1]));
    let t = op_fio(&a, &phi)?;
    println!("max |Op_φ(a) − a(x,D)| entry: {:.3e}", t.max_entry_diff(&op_pseudo(&symbol, 0.0)?)?);

    for v in [NondegeneracyVariant::Full, NondegeneracyVariant::YZeta, NondegeneracyVariant::XZeta] {
        println!("{v:?}: d = {}", nondegeneracy(&phi, &grid, v)?.d);
    }
    let zero = PhaseSpec::zero(AmplitudeLayout::new(1, 1, 1));
    println!("zero phase degenerate: {}", nondegeneracy(&zero, &grid, NondegeneracyVariant::Full)?.degenerate);
    Ok(())
}
