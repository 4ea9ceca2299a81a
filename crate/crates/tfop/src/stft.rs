//! Sampled short-time Fourier transforms on the periodic grid.
//!
//! `V_χ f(x_j, ξ_k)` is the normalized transform of `y ↦ f(y) χ(y - x_j)`,
//! where the window translate wraps around the torus. Windows are real, so
//! conjugating the window or not gives the same array.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{forward_dft, inverse_dft, Domain, GridSpec, SampledFunction};
use crate::weights::WeightSpec;
use crate::window::WindowSpec;

/// `V_χ f` on the phase-space lattice, stored as `values[x_flat * M + ξ_flat]`
/// with `M = N^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct StftArray {
    pub grid: GridSpec,
    pub values: Vec<Complex64>,
    pub window: SampledFunction,
}

impl StftArray {
    /// Number of lattice nodes in position (equally, in frequency).
    pub fn side(&self) -> usize {
        self.grid.len()
    }

    pub fn at(&self, x: usize, xi: usize) -> Complex64 {
        self.values[x * self.side() + xi]
    }

    /// The `2n`-dimensional grid whose row-major layout matches `values`:
    /// position axes first, then frequency axes.
    pub fn phase_space_grid(&self) -> GridSpec {
        self.grid.with_dim(2 * self.grid.dim)
    }

    /// Phase-space coordinates `(x, ξ)` of a flat index.
    pub fn coordinates(&self, flat: usize) -> Vec<f64> {
        let m = self.side();
        let mut p = self.grid.point(flat / m);
        p.extend(self.grid.freq_point(flat % m));
        p
    }

    /// `|V ω|` at every lattice point, same layout as `values`.
    pub fn weighted_magnitudes(&self, omega: &WeightSpec) -> Result<Vec<f64>> {
        if omega.dim != 2 * self.grid.dim {
            return Err(Error::DimensionMismatch { expected: 2 * self.grid.dim, got: omega.dim });
        }
        omega.validate()?;
        if self.values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::Numerical("non-finite short-time transform".into()));
        }
        if omega.is_trivial() {
            return Ok(self.values.iter().map(|v| v.norm()).collect());
        }
        Ok(self.values.iter().enumerate().map(|(j, v)| v.norm() * omega.eval_unchecked(&self.coordinates(j))).collect())
    }
}

/// Periodic translate `y ↦ χ(y - x_j)` of sampled window values.
pub fn window_translate(window: &SampledFunction, x: usize) -> SampledFunction {
    let g = window.grid;
    let shift: Vec<isize> = g.unravel(x).iter().map(|&i| i as isize - (g.points / 2) as isize).collect();
    window.shifted(&shift)
}

fn check_window(window: &SampledFunction, f: &SampledFunction) -> Result<()> {
    if window.grid != f.grid {
        return Err(Error::GridMismatch(format!("window grid {:?} vs signal grid {:?}", window.grid, f.grid)));
    }
    if f.domain != Domain::Space || window.domain != Domain::Space {
        return Err(Error::invalid("short-time transform expects space-domain samples"));
    }
    if window.values.iter().any(|v| v.im != 0.0) {
        return Err(Error::invalid("windows must be real-valued"));
    }
    Ok(())
}

fn stft_row(f: &SampledFunction, window: &SampledFunction, x: usize) -> Vec<Complex64> {
    let t = window_translate(window, x);
    let prod = SampledFunction {
        grid: f.grid,
        values: f.values.iter().zip(&t.values).map(|(a, b)| a * b).collect(),
        domain: Domain::Space,
    };
    // prod is finite because both factors are
    forward_dft(&prod).map(|s| s.values).unwrap_or_default()
}

/// Short-time transform with a bundled window.
pub fn stft(f: &SampledFunction, chi: &WindowSpec) -> Result<StftArray> {
    stft_with(f, &chi.values)
}

/// Short-time transform with an arbitrary real sampled window.
pub fn stft_with(f: &SampledFunction, window: &SampledFunction) -> Result<StftArray> {
    check_window(window, f)?;
    let rows: Vec<Vec<Complex64>> = (0..f.grid.len()).into_par_iter().map(|x| stft_row(f, window, x)).collect();
    Ok(StftArray { grid: f.grid, values: rows.concat(), window: window.clone() })
}

/// Visit the rows `x_j ↦ V_χ f(x_j, ·)` in lexicographic order without
/// materializing the whole array. Rows are computed in parallel batches.
pub fn stft_rows(f: &SampledFunction, window: &SampledFunction, mut visit: impl FnMut(usize, &[Complex64])) -> Result<()> {
    check_window(window, f)?;
    const BATCH: usize = 256;
    let total = f.grid.len();
    let mut start = 0;
    while start < total {
        let end = (start + BATCH).min(total);
        let rows: Vec<Vec<Complex64>> = (start..end).into_par_iter().map(|x| stft_row(f, window, x)).collect();
        for (k, row) in rows.iter().enumerate() {
            visit(start + k, row);
        }
        start = end;
    }
    Ok(())
}

/// Reconstruction `f = (2π)^{-n/2} ‖χ‖₂^{-2} ∬ V(x,ξ) e^{i<·,ξ>} χ(· - x) dx dξ`.
/// On the lattice this inverts [`stft`] exactly.
pub fn istft(v: &StftArray, chi: &WindowSpec) -> Result<SampledFunction> {
    if chi.grid() != v.grid {
        return Err(Error::GridMismatch("window and transform grids differ".into()));
    }
    let norm2 = chi.norm_l2().powi(2);
    if norm2 == 0.0 {
        return Err(Error::invalid("zero window"));
    }
    let g = v.grid;
    let m = g.len();
    let parts: Vec<Vec<Complex64>> = (0..m)
        .into_par_iter()
        .map(|x| {
            let row = SampledFunction { grid: g, values: v.values[x * m..(x + 1) * m].to_vec(), domain: Domain::Frequency };
            let local = inverse_dft(&row).map(|s| s.values).unwrap_or_else(|_| vec![Complex64::new(f64::NAN, 0.0); m]);
            let t = window_translate(&chi.values, x);
            local.iter().zip(&t.values).map(|(a, b)| a * b).collect()
        })
        .collect();
    let mut out = vec![Complex64::new(0.0, 0.0); m];
    for p in &parts {
        for (o, v) in out.iter_mut().zip(p) {
            *o += v;
        }
    }
    let scale = g.cell() / norm2;
    SampledFunction::new(g, out.into_iter().map(|v| v * scale).collect(), Domain::Space)
}

fn lattice_offsets(values: &[f64], step: f64, what: &str) -> Result<Vec<isize>> {
    values
        .iter()
        .map(|&v| {
            let k = (v / step).round();
            if (v / step - k).abs() > 1e-9 {
                Err(Error::invalid(format!("{what} {v} is not on the lattice (step {step})")))
            } else {
                Ok(k as isize)
            }
        })
        .collect()
}

/// `max | |V_χ(M_{ξ₀} T_{x₀} f)(x, ξ)| - |V_χ f(x - x₀, ξ - ξ₀)| |` over the
/// lattice, with periodic index wrap.
pub fn covariance_check(f: &SampledFunction, chi: &WindowSpec, x0: &[f64], xi0: &[f64]) -> Result<f64> {
    let g = f.grid;
    if x0.len() != g.dim || xi0.len() != g.dim {
        return Err(Error::DimensionMismatch { expected: g.dim, got: x0.len().max(xi0.len()) });
    }
    let s = lattice_offsets(x0, g.spacing(), "shift")?;
    let k = lattice_offsets(xi0, g.freq_step(), "modulation")?;
    let moved = f.shifted(&s);
    let modulated = SampledFunction {
        grid: g,
        values: moved
            .values
            .iter()
            .enumerate()
            .map(|(j, v)| {
                let phase: f64 = g.point(j).iter().zip(xi0).map(|(a, b)| a * b).sum();
                v * Complex64::from_polar(1.0, phase)
            })
            .collect(),
        domain: Domain::Space,
    };
    let a = stft(&modulated, chi)?;
    let b = stft(f, chi)?;
    let m = g.len();
    let mut worst: f64 = 0.0;
    for x in 0..m {
        let xs: Vec<usize> = g.unravel(x).iter().zip(&s).map(|(&i, &d)| g.wrap(i, -d)).collect();
        let xb = g.ravel(&xs);
        for xi in 0..m {
            let ks: Vec<usize> = g.unravel(xi).iter().zip(&k).map(|(&i, &d)| g.wrap(i, -d)).collect();
            let d = (a.at(x, xi).norm() - b.at(xb, g.ravel(&ks)).norm()).abs();
            worst = worst.max(d);
        }
    }
    Ok(worst)
}

/// `max | |V_χ f̄(x, ξ)| - |V_χ f(x, -ξ)| |`; the frequency reflection is an
/// index reflection on the centered lattice.
pub fn conjugation_check(f: &SampledFunction, chi: &WindowSpec) -> Result<f64> {
    let g = f.grid;
    let a = stft(&f.conj(), chi)?;
    let b = stft(f, chi)?;
    let m = g.len();
    let mut worst: f64 = 0.0;
    for x in 0..m {
        for xi in 0..m {
            let r: Vec<usize> = g.unravel(xi).iter().map(|&i| (g.points - i) % g.points).collect();
            worst = worst.max((a.at(x, xi).norm() - b.at(x, g.ravel(&r)).norm()).abs());
        }
    }
    Ok(worst)
}

/// Radial profile `H(ξ) = ‖V_χ f(·, ξ) ω(·, ξ)‖_{L^p}` as frequency samples.
#[allow(clippy::neg_cmp_op_on_partial_ord)] // also rejects NaN
pub fn h_profile(v: &StftArray, omega: &WeightSpec, p: f64) -> Result<SampledFunction> {
    if !(p >= 1.0) {
        return Err(Error::invalid(format!("exponent must lie in [1, ∞], got {p}")));
    }
    let mags = v.weighted_magnitudes(omega)?;
    let g = v.grid;
    let m = g.len();
    let values = (0..m)
        .map(|xi| {
            let col = (0..m).map(|x| mags[x * m + xi]);
            let h = if p.is_infinite() {
                col.fold(0.0, f64::max)
            } else {
                (col.map(|a| a.powf(p)).sum::<f64>() * g.cell()).powf(1.0 / p)
            };
            Complex64::new(h, 0.0)
        })
        .collect();
    SampledFunction::new(g, values, Domain::Frequency)
}

/// Outer product `(a ⊗ b)(x, y) = a(x) b(y)` on the concatenated grid.
pub fn tensor_product(a: &SampledFunction, b: &SampledFunction) -> Result<SampledFunction> {
    if a.grid.half_width != b.grid.half_width || a.grid.points != b.grid.points {
        return Err(Error::GridMismatch("tensor factors need the same box and resolution".into()));
    }
    let g = a.grid.with_dim(a.grid.dim + b.grid.dim);
    let values = a.values.iter().flat_map(|x| b.values.iter().map(move |y| x * y)).collect();
    SampledFunction::new(g, values, Domain::Space)
}

/// Lift `f` on `R^n` to `f₀(x, y) = f(y)` on `R^{2n}` and compare
/// `|V_{χ₁⊗χ} f₀ · ω₀|` with `|V_χ f · ω| · |χ̂₁(ξ) <ξ>^t|`, where `ω` is the
/// trivial weight and `ω₀(x, y, ξ, η) = <ξ>^t`. Returns the largest
/// discrepancy over the product lattice.
pub fn tensor_lift_check(f: &SampledFunction, chi: &WindowSpec, chi1: &WindowSpec, t: f64) -> Result<f64> {
    tensor_lift_check_weighted(f, chi, chi1, t, &WeightSpec::trivial(2 * f.grid.dim))
}

/// As [`tensor_lift_check`] with a weight `ω(y, η)` on the original block.
pub fn tensor_lift_check_weighted(
    f: &SampledFunction,
    chi: &WindowSpec,
    chi1: &WindowSpec,
    t: f64,
    omega: &WeightSpec,
) -> Result<f64> {
    let g = f.grid;
    let n = g.dim;
    if chi.grid() != g || chi1.grid() != g {
        return Err(Error::GridMismatch("windows must live on the signal grid".into()));
    }
    if omega.dim != 2 * n {
        return Err(Error::DimensionMismatch { expected: 2 * n, got: omega.dim });
    }
    let ones = SampledFunction::from_real_fn(g, |_| 1.0);
    let f0 = tensor_product(&ones, f)?;
    let w = tensor_product(&chi1.values, &chi.values)?;
    let lifted = stft_with(&f0, &w)?;
    let base = stft(f, chi)?;
    let chi1_hat = forward_dft(&chi1.values)?;
    let m = g.len();
    let mm = m * m;
    let worst = (0..mm)
        .into_par_iter()
        .map(|pos| {
            let y = pos % m;
            let ypt = g.point(y);
            let mut worst: f64 = 0.0;
            for freq in 0..mm {
                let (xi, eta) = (freq / m, freq % m);
                let xi_pt = g.freq_point(xi);
                let bracket_t = crate::weights::bracket(&xi_pt).powf(t);
                let mut ye = ypt.clone();
                ye.extend(g.freq_point(eta));
                let om = omega.eval_unchecked(&ye);
                let lhs = lifted.at(pos, freq).norm() * om * bracket_t;
                let rhs = base.at(y, eta).norm() * om * chi1_hat.values[xi].norm() * bracket_t;
                worst = worst.max((lhs - rhs).abs());
            }
            worst
        })
        .reduce(|| 0.0, f64::max);
    Ok(worst)
}

/// `(2π)^{-n/2} ∫ e^{-|y|²}` — the value of `V_χ χ(0, 0)` for the unit
/// Gaussian `χ = e^{-|y|²/2}` in one dimension.
pub fn gaussian_self_stft_origin() -> f64 {
    PI.sqrt() / (2.0 * PI).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::window::{Normalization, WindowFamily};

    fn grid() -> GridSpec {
        GridSpec::new(1, 8.0, 64).unwrap()
    }

    fn gauss(g: GridSpec, c: f64, s: f64) -> SampledFunction {
        SampledFunction::from_real_fn(g, |x| (-(x[0] - c).powi(2) / (2.0 * s * s)).exp())
    }

    fn raw_gaussian_window(g: GridSpec) -> WindowSpec {
        WindowSpec::new(WindowFamily::Gaussian { spread: 1.0 }, g, Normalization::None).unwrap()
    }

    #[test]
    fn zero_signal_has_zero_transform() {
        let g = grid();
        let v = stft(&SampledFunction::zeros(g), &WindowSpec::gaussian(g).unwrap()).unwrap();
        assert!(v.values.iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn gaussian_against_itself_at_origin() {
        let g = grid();
        let chi = raw_gaussian_window(g);
        let v = stft(&chi.values, &chi).unwrap();
        let origin = g.origin_index();
        let val = v.at(origin, origin);
        assert!((val.re - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-9, "{val}");
        assert!((val.re - gaussian_self_stft_origin()).abs() < 1e-12);
    }

    #[test]
    fn moyal_energy() {
        let g = grid();
        let chi = WindowSpec::gaussian(g).unwrap();
        let f = gauss(g, 0.7, 1.3);
        let v = stft(&f, &chi).unwrap();
        let e: f64 = v.values.iter().map(|z| z.norm_sqr()).sum::<f64>() * g.cell() * g.freq_cell();
        let expect = chi.norm_l2().powi(2) * f.norm_l2().powi(2);
        assert!((e - expect).abs() / expect < 1e-12);
    }

    #[test]
    fn inversion_round_trip() {
        let g = grid();
        let chi = WindowSpec::gaussian(g).unwrap();
        let f = gauss(g, 1.0, 1.0);
        let back = istft(&stft(&f, &chi).unwrap(), &chi).unwrap();
        let err = back.axpby(Complex64::new(1.0, 0.0), &f, Complex64::new(-1.0, 0.0)).unwrap().norm_l2();
        assert!(err / f.norm_l2() < 1e-12);
        let zero = istft(&stft(&SampledFunction::zeros(g), &chi).unwrap(), &chi).unwrap();
        assert_eq!(zero.max_abs(), 0.0);
    }

    #[test]
    fn covariance_and_conjugation() {
        let g = grid();
        let chi = WindowSpec::gaussian(g).unwrap();
        let f = SampledFunction::from_fn(g, |x| Complex64::from_polar((-(x[0] - 0.4).powi(2) / 2.0).exp(), 0.3 * x[0] * x[0]));
        assert_eq!(covariance_check(&f, &chi, &[0.0], &[0.0]).unwrap(), 0.0);
        let h = g.spacing();
        let k = g.freq_step();
        assert!(covariance_check(&f, &chi, &[h], &[0.0]).unwrap() < 1e-10);
        assert!(covariance_check(&f, &chi, &[-3.0 * h], &[5.0 * k]).unwrap() < 1e-10);
        assert!(covariance_check(&f, &chi, &[0.3 * h], &[0.0]).is_err());
        assert!(conjugation_check(&f, &chi).unwrap() < 1e-12);
    }

    #[test]
    fn h_profile_moyal_and_homogeneity() {
        let g = grid();
        let chi = raw_gaussian_window(g);
        let v = stft(&chi.values, &chi).unwrap();
        let h = h_profile(&v, &WeightSpec::trivial(2), 2.0).unwrap();
        let lhs = h.norm_l2().powi(2);
        let rhs = chi.norm_l2().powi(4);
        assert!((lhs - rhs).abs() / rhs < 1e-8);
        // scaling by a power of two commutes exactly with every step
        let v2 = stft(&chi.values.scale(Complex64::new(-2.0, 0.0)), &chi).unwrap();
        let h2 = h_profile(&v2, &WeightSpec::trivial(2), 2.0).unwrap();
        for (a, b) in h2.values.iter().zip(&h.values) {
            assert_eq!(a.re, 2.0 * b.re);
        }
        let v3 = stft(&chi.values.scale(Complex64::new(0.0, -2.5)), &chi).unwrap();
        let h3 = h_profile(&v3, &WeightSpec::trivial(2), 3.0).unwrap();
        let h1 = h_profile(&v, &WeightSpec::trivial(2), 3.0).unwrap();
        let top = h1.max_abs();
        for (a, b) in h3.values.iter().zip(&h1.values) {
            assert!((a.re - 2.5 * b.re).abs() <= 1e-13 * top);
        }
    }

    #[test]
    fn tensor_lift_identity() {
        let g = GridSpec::new(1, 8.0, 32).unwrap();
        let chi = WindowSpec::gaussian(g).unwrap();
        let chi1 = WindowSpec::gaussian_spread(g, 0.8).unwrap();
        let f = gauss(g, 0.5, 1.1);
        assert!(tensor_lift_check(&f, &chi, &chi1, 0.0).unwrap() < 1e-8);
        assert!(tensor_lift_check(&f, &chi, &chi1, 2.0).unwrap() < 1e-8);
        assert_eq!(tensor_lift_check(&SampledFunction::zeros(g), &chi, &chi1, 1.0).unwrap(), 0.0);
    }
}
