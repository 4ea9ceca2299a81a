//! Pseudo-differential operators in the `t`-quantization: the same operator
//! written as a Kohn–Nirenberg symbol and as its Weyl symbol.
//!
//! Run with `cargo run --release --example quantization`.

use num_complex::Complex64;
use tfop::operators::{op_pseudo, quantization_transfer};
use tfop::{GridSpec, Result, SampledFunction};

fn main() -> Result<()> {
    // a matched grid makes x·ξ land on the lattice for every t
    let grid = GridSpec::matched(2, 48)?;
    let a = SampledFunction::from_fn(grid, |p| {
        let (x, xi) = (p[0], p[1]);
        Complex64::from_polar((-(x * x) / 2.0 - xi * xi / 4.0).exp(), 0.3 * x)
    });
    let kn = op_pseudo(&a, 0.0)?;
    let weyl_symbol = quantization_transfer(&a, 0.0, 0.5)?;
    let weyl = op_pseudo(&weyl_symbol, 0.5)?;
    println!("max |a(x,D) - b^w(x,D)| entry: {:.3e}", kn.max_entry_diff(&weyl)?);
    let back = quantization_transfer(&weyl_symbol, 0.5, 0.0)?;
    let err = back.axpby(Complex64::new(1.0, 0.0), &a, Complex64::new(-1.0, 0.0))?.max_abs() / a.max_abs();
    println!("round-trip symbol error: {err:.3e}");
    let diff = weyl_symbol.axpby(Complex64::new(1.0, 0.0), &a, Complex64::new(-1.0, 0.0))?.max_abs();
    println!("the two symbols differ by up to {diff:.3e}");
    Ok(())
}
