//! Short-time-transform identities for operator kernels and symbols, and
//! the Gaussian closed form used in the amplitude estimates.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::fio::{fio_kernel, op_fio};
use super::matrix::OperatorMatrix;
use super::phase::PhaseSpec;
use super::pseudo::op_pseudo;
use crate::error::{Error, Result};
use crate::grid::{forward_dft, Domain, GridSpec, SampledFunction};
use crate::norms::modulation_norm_streaming;
use crate::stft::{stft, stft_with, tensor_product, window_translate};
use crate::weights::WeightSpec;
use crate::window::WindowSpec;

/// A lattice sample `(x, y, ξ, η)` given by node indices: `x`, `y` on the
/// spatial lattice, `ξ`, `η` on the frequency lattice.
pub type LatticeSample = [usize; 4];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelIdentityReport {
    /// `max |V_{χ₂⊗χ₁}K(x, y, ξ, η) - (2π)^{-(n_x+n_y)/2} (T f_{y,η}, g_{x,ξ})|`.
    pub identity: f64,
    /// `max | |V_{χ₁}f(y₁, η₁)| - |V_{χ₁}χ₁(y₁ - y, η₁ + η)| |`.
    pub source_covariance: f64,
    /// `max | |V_{χ₂}g(x₁, ξ₁)| - |V_{χ₂}χ₂(x₁ - x, ξ₁ - ξ)| |`.
    pub target_covariance: f64,
}

impl KernelIdentityReport {
    pub fn max(&self) -> f64 {
        self.identity.max(self.source_covariance).max(self.target_covariance)
    }
}

/// `χ(· - x_j) e^{s i<·, ξ_k>}` for `s = ±1`.
fn modulated_translate(chi: &WindowSpec, x: usize, xi: usize, sign: f64) -> SampledFunction {
    let g = chi.grid();
    let t = window_translate(&chi.values, x);
    let w = g.freq(xi);
    SampledFunction {
        grid: g,
        values: t.values.iter().enumerate().map(|(j, v)| v * Complex64::from_polar(1.0, sign * g.coord(j) * w)).collect(),
        domain: Domain::Space,
    }
}

/// `max | |V f(p, ν)| - |V χ(p - p₀, ν + s ν₀)| |` over the whole lattice,
/// where `f = χ(· - p₀) e^{s i<·, ν₀>}`.
fn covariance_audit(chi: &WindowSpec, p0: usize, nu0: usize, sign: isize) -> Result<f64> {
    let g = chi.grid();
    let f = modulated_translate(chi, p0, nu0, sign as f64);
    let vf = stft(&f, chi)?;
    let vc = stft(&chi.values, chi)?;
    let half = (g.points / 2) as isize;
    let mut worst: f64 = 0.0;
    for p in 0..g.points {
        let ps = g.wrap(p, half - p0 as isize);
        for nu in 0..g.points {
            let ns = g.wrap(nu, -sign * (nu0 as isize - half));
            worst = worst.max((vf.at(p, nu).norm() - vc.at(ps, ns).norm()).abs());
        }
    }
    Ok(worst)
}

/// The kernel identity `V_{χ₂⊗χ₁}K(x, y, ξ, η) = (2π)^{-1} (T f, g)` with
/// `f = χ₁(· - y) e^{-i<·, η>}`, `g = χ₂(· - x) e^{i<·, ξ>}`, at lattice
/// samples, together with the magnitude covariances of `f` and `g`.
/// `n_x = n_y = 1`; `χ₂` acts on the target variable, `χ₁` on the source.
pub fn kernel_stft_identity(
    a: &SampledFunction,
    phi: &PhaseSpec,
    chi1: &WindowSpec,
    chi2: &WindowSpec,
    samples: &[LatticeSample],
) -> Result<KernelIdentityReport> {
    let lay = phi.layout;
    if lay.n_x != 1 || lay.n_y != 1 {
        return Err(Error::invalid("the kernel identity is implemented for n_x = n_y = 1"));
    }
    let g1 = a.grid.with_dim(1);
    if chi1.grid() != g1 || chi2.grid() != g1 {
        return Err(Error::GridMismatch("windows must live on the signal grid".into()));
    }
    if samples.iter().any(|s| s.iter().any(|&i| i >= g1.points)) {
        return Err(Error::invalid("sample index outside the lattice"));
    }
    let k = fio_kernel(a, phi)?;
    let t = op_fio(a, phi)?;
    let w = tensor_product(&chi2.values, &chi1.values)?;
    let vk = stft_with(&k, &w)?;
    let kg = k.grid;
    let c = (2.0 * PI).powi(-1);
    let mut report = KernelIdentityReport { identity: 0.0, source_covariance: 0.0, target_covariance: 0.0 };
    for &[x, y, xi, eta] in samples {
        let lhs = vk.at(kg.ravel(&[x, y]), kg.ravel(&[xi, eta]));
        let f = modulated_translate(chi1, y, eta, -1.0);
        let g = modulated_translate(chi2, x, xi, 1.0);
        let rhs = t.apply(&f)?.inner(&g)?;
        report.identity = report.identity.max((lhs - rhs * c).norm());
        report.source_covariance = report.source_covariance.max(covariance_audit(chi1, y, eta, -1)?);
        report.target_covariance = report.target_covariance.max(covariance_audit(chi2, x, xi, 1)?);
    }
    Ok(report)
}

/// The window induced on kernels by a symbol window `χ`:
/// `ψ(s₁, s₂) = ∫ χ((1-t)s₁ + t s₂, θ) e^{i(s₂ - s₁)θ} dθ`, by a Riemann sum
/// four times finer than the grid over `[-L, L)`.
pub struct InducedWindow<'a> {
    chi: &'a WindowSpec,
    t: f64,
    nodes: Vec<f64>,
    step: f64,
}

impl<'a> InducedWindow<'a> {
    pub fn new(chi: &'a WindowSpec, t: f64) -> Self {
        let g = chi.grid();
        let step = g.spacing() / 4.0;
        let nodes = (0..4 * g.points).map(|j| -g.half_width + j as f64 * step).collect();
        InducedWindow { chi, t, nodes, step }
    }

    pub fn eval(&self, s1: f64, s2: f64) -> Complex64 {
        let u = (1.0 - self.t) * s1 + self.t * s2;
        let d = s2 - s1;
        self.nodes.iter().map(|&th| Complex64::from_polar(self.chi.eval(&[u, th]), d * th)).sum::<Complex64>() * self.step
    }

    /// Samples on the kernel grid (the symbol's grid read as `(x, y)`).
    pub fn sample(&self) -> SampledFunction {
        let g = self.chi.grid();
        let values = (0..g.len())
            .into_par_iter()
            .map(|j| {
                let p = g.point(j);
                self.eval(p[0], p[1])
            })
            .collect();
        SampledFunction { grid: g, values, domain: Domain::Space }
    }
}

fn check_symbol_setup(a: &SampledFunction, chi: &WindowSpec, t: f64) -> Result<()> {
    if a.grid.dim != 2 {
        return Err(Error::invalid("symbol identities are implemented for n = 1"));
    }
    if chi.grid() != a.grid {
        return Err(Error::GridMismatch("symbol window must live on the symbol grid".into()));
    }
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::invalid(format!("quantization parameter must lie in [0, 1], got {t}")));
    }
    Ok(())
}

/// Symbol-to-kernel magnitude identity
/// `|V_ψ K(x - ty, x + (1-t)y, ξ + (1-t)η, -ξ + tη)| = |V_χ a(x, ξ, η, y)|`
/// at the given phase-space points `[x, ξ, y, η]`. `K` is the kernel of
/// `op_pseudo(a, t)`; both sides are direct sums. Returns the largest
/// absolute difference.
pub fn symbol_kernel_stft_check(a: &SampledFunction, t: f64, chi: &WindowSpec, samples: &[[f64; 4]]) -> Result<f64> {
    check_symbol_setup(a, chi, t)?;
    let g = a.grid;
    let k = op_pseudo(a, t)?.kernel()?;
    let psi = InducedWindow::new(chi, t);
    let pts: Vec<Vec<f64>> = (0..g.len()).map(|j| g.point(j)).collect();
    let c = g.cell() / (2.0 * PI);
    let worst = samples
        .par_iter()
        .map(|&[x, xi, y, eta]| {
            let (p1, p2) = (x - t * y, x + (1.0 - t) * y);
            let (q1, q2) = (xi + (1.0 - t) * eta, -xi + t * eta);
            let lhs: Complex64 = k
                .values
                .iter()
                .zip(&pts)
                .map(|(kv, p)| kv * psi.eval(p[0] - p1, p[1] - p2) * Complex64::from_polar(1.0, -(p[0] * q1 + p[1] * q2)))
                .sum::<Complex64>()
                * c;
            let rhs: Complex64 = a
                .values
                .iter()
                .zip(&pts)
                .map(|(av, p)| av * chi.eval(&[p[0] - x, p[1] - xi]) * Complex64::from_polar(1.0, -(p[0] * eta + p[1] * y)))
                .sum::<Complex64>()
                * c;
            (lhs.norm() - rhs.norm()).abs()
        })
        .reduce(|| 0.0, f64::max);
    Ok(worst)
}

/// `‖K‖_{M^p} / ‖a‖_{M^p}` for the Kohn–Nirenberg kernel (`t = 0`), with
/// the induced window `ψ` on the kernel side and `χ` on the symbol side.
/// For a Gaussian `χ` the induced window is real.
pub fn kernel_symbol_norm_ratio(a: &SampledFunction, chi: &WindowSpec, p: f64) -> Result<f64> {
    check_symbol_setup(a, chi, 0.0)?;
    let k = op_pseudo(a, 0.0)?.kernel()?;
    let psi = InducedWindow::new(chi, 0.0).sample();
    let imag = psi.values.iter().fold(0.0f64, |m, v| m.max(v.im.abs()));
    if imag > 1e-12 * psi.max_abs() {
        return Err(Error::invalid("induced window is not real; use a window symmetric in its frequency variable"));
    }
    let psi = psi.map(|v| Complex64::new(v.re, 0.0));
    let w = WeightSpec::trivial(4);
    let nk = modulation_norm_streaming(&k, &psi, p, p, &w)?;
    let na = modulation_norm_streaming(a, &chi.values, p, p, &w)?;
    if na == 0.0 {
        return Err(Error::invalid("symbol has zero norm"));
    }
    Ok(nk / na)
}

/// `π^{n/2} t^n (2 - t²)^{-n/2} e^{-t²|ξ|² / (4(2 - t²))}`: the unnormalized
/// transform `∫ e^{-2|y/t|²} e^{|y|²} e^{-i<y, ξ>} dy`.
pub fn gaussian_closed_form(t: f64, xi_sq: f64, n: usize) -> f64 {
    let n = n as f64;
    PI.powf(n / 2.0) * t.powf(n) * (2.0 - t * t).powf(-n / 2.0) * (-t * t * xi_sq / (4.0 * (2.0 - t * t))).exp()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GaussianIdentityReport {
    /// `(t, max_ξ |DFT - (2π)^{-n/2} closed form|)`.
    pub per_t: Vec<(f64, f64)>,
    pub max_error: f64,
}

/// Compare the normalized DFT of `e^{-2|y/t|²} e^{|y|²}` with the closed form
/// scaled by the transform normalization `(2π)^{-n/2}`.
pub fn gaussian_identity_check(t_values: &[f64], grid: &GridSpec) -> Result<GaussianIdentityReport> {
    let n = grid.dim;
    let norm = (2.0 * PI).powf(-(n as f64) / 2.0);
    let mut per_t = Vec::with_capacity(t_values.len());
    for &t in t_values {
        if !(t > 0.0 && t <= 1.0) {
            return Err(Error::invalid(format!("t must lie in (0, 1], got {t}")));
        }
        let f = SampledFunction::from_real_fn(*grid, |y| {
            let r2: f64 = y.iter().map(|v| v * v).sum();
            (-(2.0 / (t * t) - 1.0) * r2).exp()
        });
        let hat = forward_dft(&f)?;
        let err = hat
            .values
            .iter()
            .enumerate()
            .map(|(k, v)| {
                let xi2: f64 = grid.freq_point(k).iter().map(|v| v * v).sum();
                (v - norm * gaussian_closed_form(t, xi2, n)).norm()
            })
            .fold(0.0, f64::max);
        per_t.push((t, err));
    }
    let max_error = per_t.iter().map(|p| p.1).fold(0.0, f64::max);
    Ok(GaussianIdentityReport { per_t, max_error })
}

/// Operator with kernel `K` as a convenience for identity checks.
pub fn kernel_operator(k: &SampledFunction) -> Result<OperatorMatrix> {
    OperatorMatrix::from_kernel(k, k.grid.dim / 2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::window::{Normalization, WindowFamily};

    #[test]
    fn closed_form_value_at_the_origin() {
        assert!((gaussian_closed_form(1.0, 0.0, 1) - PI.sqrt()).abs() < 1e-15);
        assert!((gaussian_closed_form(1.0, 0.0, 1) - 1.7724539).abs() < 1e-7);
    }

    #[test]
    fn gaussian_identity_where_resolved() {
        let g = GridSpec::new(1, 8.0, 128).unwrap();
        let r = gaussian_identity_check(&[0.6, 0.8, 1.0], &g).unwrap();
        assert!(r.max_error < 1e-14, "{r:?}");
        assert!(gaussian_identity_check(&[0.0], &g).is_err());
    }

    #[test]
    fn kernel_identity_on_small_grid() {
        let g = GridSpec::new(3, 8.0, 16).unwrap();
        let a = SampledFunction::from_fn(g, |x| {
            Complex64::from_polar(
                (-(x[0] - 0.5).powi(2) / 2.0 - x[1].powi(2) / 3.0 - (x[2] + 0.3).powi(2) / 1.5).exp(),
                0.2 * x[0],
            )
        });
        let g1 = g.with_dim(1);
        let chi1 = WindowSpec::new(WindowFamily::Gaussian { spread: 1.0 }, g1, Normalization::L2).unwrap();
        let chi2 = WindowSpec::new(WindowFamily::Gaussian { spread: 0.8 }, g1, Normalization::L2).unwrap();
        let samples = [[8, 8, 8, 8], [5, 10, 3, 12], [11, 6, 9, 2]];
        let r = kernel_stft_identity(&a, &PhaseSpec::bilinear(1), &chi1, &chi2, &samples).unwrap();
        assert!(r.max() < 1e-10, "{r:?}");
        let z = kernel_stft_identity(&SampledFunction::zeros(g), &PhaseSpec::bilinear(1), &chi1, &chi2, &samples).unwrap();
        assert_eq!(z.identity, 0.0);
    }

    #[test]
    fn symbol_identity_uses_swapped_frequencies() {
        let g = GridSpec::matched(2, 32).unwrap();
        let chi = WindowSpec::new(WindowFamily::Gaussian { spread: 0.9 }, g, Normalization::L2).unwrap();
        let a = SampledFunction::from_fn(g, |x| {
            Complex64::from_polar((-((x[0] - 0.4).powi(2) + (x[1] + 0.3).powi(2)) / 2.88).exp() * (1.0 + 0.1 * x[0]), 0.5 * x[1])
        });
        let h = g.spacing();
        let samples = [[0.0, h, -2.0 * h, h], [2.0 * h, -h, h, 3.0 * h]];
        for t in [0.0, 1.0] {
            assert!(symbol_kernel_stft_check(&a, t, &chi, &samples).unwrap() < 1e-6);
        }
        assert_eq!(symbol_kernel_stft_check(&SampledFunction::zeros(g), 0.0, &chi, &samples).unwrap(), 0.0);
    }
}
