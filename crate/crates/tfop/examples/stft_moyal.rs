//! Short-time Fourier transform of a modulated Gaussian: energy identity,
//! reconstruction, and the time-frequency peak.
//!
//! Run with `cargo run --release --example stft_moyal`.

use num_complex::Complex64;
use tfop::stft::{istft, stft};
use tfop::window::WindowSpec;
use tfop::{GridSpec, Result, SampledFunction};

fn main() -> Result<()> {
    let grid = GridSpec::new(1, 8.0, 64)?;
    let f = SampledFunction::from_fn(grid, |x| Complex64::from_polar((-(x[0] - 1.0).powi(2) / 2.0).exp(), 2.0 * x[0]));
    let chi = WindowSpec::gaussian(grid)?;
    let v = stft(&f, &chi)?;

    let energy = v.values.iter().map(|z| z.norm_sqr()).sum::<f64>() * grid.cell() * grid.freq_cell();
    let expected = chi.norm_l2() * f.norm_l2();
    println!("‖V_χ f‖₂ = {:.15}, ‖χ‖₂‖f‖₂ = {expected:.15}", energy.sqrt());

    let back = istft(&v, &chi)?;
    let err = back.axpby(Complex64::new(1.0, 0.0), &f, Complex64::new(-1.0, 0.0))?.norm_l2() / f.norm_l2();
    println!("reconstruction error: {err:.3e}");

    let (peak, _) =
        v.values.iter().enumerate().fold((0, 0.0), |best, (i, z)| if z.norm() > best.1 { (i, z.norm()) } else { best });
    let c = v.coordinates(peak);
    println!("peak at (x, ξ) = ({:.3}, {:.3}); the signal sits at (1, 2)", c[0], c[1]);
    Ok(())
}
