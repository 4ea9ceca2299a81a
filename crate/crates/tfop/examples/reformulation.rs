//! The phase-space reformulation of `⟨Op_φ(a) f, g⟩`: quadrature over
//! `(X, ξ, η)` against the direct double integral, at two resolutions.
//!
//! Run with `cargo run --release --example reformulation`.

use tfop::harness::suite::reformulation_discrepancy;
use tfop::operators::PhaseSpec;
use tfop::Result;

fn main() -> Result<()> {
    let phi = PhaseSpec::bilinear(1);
    for n in [8, 16] {
        println!("N = {n:>2}: relative discrepancy {:.3e}", reformulation_discrepancy(&phi, n)?);
    }
    Ok(())
}
