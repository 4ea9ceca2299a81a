//! Weighted modulation norms `M^{p,q}_{(ω)}` of a Gaussian for several exponent
//! pairs, with and without a polynomial phase-space weight.
//!
//! Run with `cargo run --release --example modulation_norms`.

use tfop::norms::modulation_norm;
use tfop::stft::stft;
use tfop::weights::WeightSpec;
use tfop::window::WindowSpec;
use tfop::{GridSpec, Result, SampledFunction};

fn main() -> Result<()> {
    let grid = GridSpec::new(1, 8.0, 64)?;
    let f = SampledFunction::from_real_fn(grid, |x| (-x[0] * x[0] / 2.0).exp());
    let chi = WindowSpec::gaussian(grid)?;
    let v = stft(&f, &chi)?;
    let trivial = WeightSpec::trivial(2);
    let weighted = WeightSpec::bracket_power(2, 1.0);
    println!("{:>6} {:>6} {:>14} {:>14}", "p", "q", "ω ≡ 1", "ω = ⟨X⟩");
    for (p, q) in [(1.0, 1.0), (2.0, 2.0), (f64::INFINITY, 1.0), (1.0, f64::INFINITY), (f64::INFINITY, f64::INFINITY)] {
        let a = modulation_norm(&v, p, q, &trivial)?;
        let b = modulation_norm(&v, p, q, &weighted)?;
        println!("{p:>6} {q:>6} {a:>14.8} {b:>14.8}");
    }
    println!("‖χ‖₂‖f‖₂ = {:.8} (equals the M² norm)", chi.norm_l2() * f.norm_l2());
    Ok(())
}
