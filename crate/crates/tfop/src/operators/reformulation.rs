//! The short-time-transform reformulation of the FIO pairing.
//!
//! Around each base point `X` the phase is split into its tangent plane and
//! a remainder, `φ(X + X₁) = φ(X) + <φ'(X), X₁> + ψ₂(X₁)`. Averaging the
//! pairing over translates of the window `W(X₁) = χ(X₁)² χ₁(y₁) χ₂(x₁)` and
//! expanding `f` and `g` by their inverse short-time transforms gives
//!
//! ```text
//! (Tf, g) = c⁻¹ ∭∬ H_X(ξ, η) V_{χ₁}f(y, -η) conj(V_{χ₂}g(x, ξ)) e^{-i(xξ + yη)} dξ dη dX
//! H_X(ξ, η) = (2π)^{-(N-m)/2} e^{iφ(X)} F(e^{iψ₂} χ² a(X + ·))(ξ - φ'_x, η - φ'_y, -φ'_ζ)
//! ```
//!
//! with `N = n_x + n_y` and `c = ∫ W`. The averaging constant `c` is kept
//! explicitly. `H_X` is also the convolution `h_X * F(a(X + ·) χ)` with
//! `h_X = (2π)^{-N} e^{iφ(X)} F(e^{iψ₂} χ)`.
//!
//! On the lattice every step is exact except that `a` wraps periodically
//! while `φ` is evaluated at true coordinates, so the discrepancy measures
//! the mass of `χ² a` that crosses the box edge.

use std::f64::consts::PI;
use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use num_complex::Complex64;
use rayon::prelude::*;

use super::fio::op_fio;
use super::phase::PhaseSpec;
use crate::error::{Error, Result};
use crate::grid::{dft_at, forward_dft, Domain, GridSpec, SampledFunction};
use crate::stft::stft;
use crate::window::WindowSpec;

/// Gauss–Legendre nodes used for the Taylor remainder integral.
pub const REMAINDER_NODES: usize = 32;

/// Largest grid (points per axis) the reformulation accepts; cost is `O(N⁶)`.
pub const MAX_REFORMULATION_POINTS: usize = 16;

pub fn remainder_rule() -> GaussLegendre {
    GaussLegendre::new(NonZeroUsize::new(REMAINDER_NODES).expect("nonzero"))
}

/// `ψ₂(X₁) = ∫₀¹ (1-s) <φ''(X + sX₁) X₁, X₁> ds`, the integral form of the
/// Taylor remainder.
pub fn taylor_remainder(phi: &PhaseSpec, base: &[f64], x1: &[f64], rule: &GaussLegendre) -> f64 {
    let mut p = base.to_vec();
    rule.integrate(0.0, 1.0, |s| {
        for ((pi, b), d) in p.iter_mut().zip(base).zip(x1) {
            *pi = b + s * d;
        }
        (1.0 - s) * phi.hessian_form(&p, x1)
    })
}

/// First-order Taylor split of `φ` around a base point, with the remainder
/// sampled on the lattice of offsets `X₁` (the grid's own nodes). The
/// cut-off is `1` on the whole box, so `ψ₂` is the bare remainder.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseTaylorSplit {
    pub base: Vec<f64>,
    pub value: f64,
    pub gradient: Vec<f64>,
    pub remainder: SampledFunction,
}

impl PhaseTaylorSplit {
    pub fn new(phi: &PhaseSpec, base: &[f64], grid: GridSpec, rule: &GaussLegendre) -> Result<Self> {
        if grid.dim != phi.dim() || base.len() != phi.dim() {
            return Err(Error::DimensionMismatch { expected: phi.dim(), got: grid.dim.min(base.len()) });
        }
        let e = phi.eval(base);
        let remainder = SampledFunction::from_real_fn(grid, |x1| taylor_remainder(phi, base, x1, rule));
        Ok(PhaseTaylorSplit { base: base.to_vec(), value: e.value, gradient: e.gradient, remainder })
    }

    /// `ψ₁(X₁) = φ(X) + <φ'(X), X₁>`.
    pub fn linear_part(&self, x1: &[f64]) -> f64 {
        self.value + self.gradient.iter().zip(x1).map(|(g, d)| g * d).sum::<f64>()
    }

    /// `max |φ(X + X₁) - ψ₁(X₁) - ψ₂(X₁)|` over the offset lattice.
    pub fn check(&self, phi: &PhaseSpec) -> f64 {
        let g = self.remainder.grid;
        (0..g.len())
            .map(|j| {
                let x1 = g.point(j);
                let shifted: Vec<f64> = self.base.iter().zip(&x1).map(|(b, d)| b + d).collect();
                (phi.value(&shifted) - self.linear_part(&x1) - self.remainder.values[j].re).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// Windows of the reformulation: `χ` on the amplitude grid (`‖χ‖₂ = 1`),
/// `χ₁`, `χ₂` on the signal grid (`‖χ_j‖₁ = 1`).
#[derive(Debug, Clone)]
pub struct ReformulationWindows {
    pub chi: WindowSpec,
    pub chi1: WindowSpec,
    pub chi2: WindowSpec,
}

fn check_desk_scale(a: &SampledFunction, phi: &PhaseSpec) -> Result<()> {
    let l = phi.layout;
    if (l.n_x, l.n_y, l.m) != (1, 1, 1) {
        return Err(Error::invalid("the reformulation is implemented for n_x = n_y = m = 1"));
    }
    if a.grid.dim != 3 {
        return Err(Error::DimensionMismatch { expected: 3, got: a.grid.dim });
    }
    if a.grid.points > MAX_REFORMULATION_POINTS {
        return Err(Error::invalid(format!(
            "reformulation limited to {MAX_REFORMULATION_POINTS} points per axis, got {}",
            a.grid.points
        )));
    }
    Ok(())
}

/// Index of `X + X₁` (wrapped) from the index of `X` and of the offset `X₁`.
fn shifted_index(g: &GridSpec, x: &[usize], x1: &[usize]) -> usize {
    let half = (g.points / 2) as isize;
    let idx: Vec<usize> = x.iter().zip(x1).map(|(&i, &d)| g.wrap(i, d as isize - half)).collect();
    g.ravel(&idx)
}

/// `(Tf, g) = h Σ_x (Tf)(x) conj(g(x))` with `T = op_fio(a, φ)`.
pub fn direct_pairing(a: &SampledFunction, phi: &PhaseSpec, f: &SampledFunction, g: &SampledFunction) -> Result<Complex64> {
    let t = op_fio(a, phi)?;
    let tf = t.apply(f)?;
    tf.inner(g)
}

/// `c = h³ Σ χ(X₁)² χ₁(y₁) χ₂(x₁)`.
pub fn averaging_constant(w: &ReformulationWindows) -> f64 {
    let g = w.chi.grid();
    let (c, c1, c2) = (w.chi.real_values(), w.chi1.real_values(), w.chi2.real_values());
    let n = g.points;
    (0..g.len()).map(|j| c[j] * c[j] * c1[(j / n) % n] * c2[j / (n * n)]).sum::<f64>() * g.cell()
}

/// `H_X` on the lattice `(ξ, η)` at base node `X` (flat index), by direct
/// summation at the shifted frequencies. Row-major `[ξ][η]`.
pub fn h_function(a: &SampledFunction, phi: &PhaseSpec, chi: &[f64], base: usize, rule: &GaussLegendre) -> Vec<Complex64> {
    let g = a.grid;
    let n = g.points;
    let h = g.spacing();
    let x = g.point(base);
    let xi_idx = g.unravel(base);
    let e = phi.eval(&x);
    let grad = &e.gradient;
    let coords: Vec<f64> = (0..n).map(|i| g.coord(i)).collect();
    // u(X₁) = a(X + X₁) χ(X₁)² e^{iψ₂(X₁)}
    let mut u = vec![Complex64::new(0.0, 0.0); g.len()];
    for (j, uj) in u.iter_mut().enumerate() {
        let c2 = chi[j] * chi[j];
        if c2 == 0.0 {
            continue;
        }
        let off = g.unravel(j);
        let x1 = [coords[off[0]], coords[off[1]], coords[off[2]]];
        let r = taylor_remainder(phi, &x, &x1, rule);
        *uj = a.values[shifted_index(&g, &xi_idx, &off)] * c2 * Complex64::from_polar(1.0, r);
    }
    // separable transform: ζ₁ at -φ'_ζ, then x₁ at ξ - φ'_x, then y₁ at η - φ'_y
    let ez: Vec<Complex64> = coords.iter().map(|z| Complex64::from_polar(1.0, z * grad[2])).collect();
    let mut s1 = vec![Complex64::new(0.0, 0.0); n * n];
    for (xy, s) in s1.iter_mut().enumerate() {
        *s = u[xy * n..(xy + 1) * n].iter().zip(&ez).map(|(a, b)| a * b).sum();
    }
    let mut s2 = vec![Complex64::new(0.0, 0.0); n * n];
    for k in 0..n {
        let w = g.freq(k) - grad[0];
        for (x1, c) in coords.iter().enumerate() {
            let ex = Complex64::from_polar(1.0, -c * w);
            for y1 in 0..n {
                s2[k * n + y1] += ex * s1[x1 * n + y1];
            }
        }
    }
    let pref = (2.0 * PI).powf(-0.5) * (2.0 * PI).powf(-1.5) * h.powi(3) * Complex64::from_polar(1.0, e.value);
    let mut out = vec![Complex64::new(0.0, 0.0); n * n];
    for l in 0..n {
        let w = g.freq(l) - grad[1];
        let ey: Vec<Complex64> = coords.iter().map(|c| Complex64::from_polar(1.0, -c * w)).collect();
        for k in 0..n {
            out[k * n + l] = s2[k * n..(k + 1) * n].iter().zip(&ey).map(|(a, b)| a * b).sum::<Complex64>() * pref;
        }
    }
    out
}

/// The reformulated pairing, evaluated by quadrature over `(X, ξ, η)`.
pub fn stft_reformulation_pair(
    a: &SampledFunction,
    phi: &PhaseSpec,
    f: &SampledFunction,
    g: &SampledFunction,
    windows: &ReformulationWindows,
) -> Result<Complex64> {
    phi.validate()?;
    check_desk_scale(a, phi)?;
    let grid = a.grid;
    let g1 = grid.with_dim(1);
    if windows.chi.grid() != grid || windows.chi1.grid() != g1 || windows.chi2.grid() != g1 {
        return Err(Error::GridMismatch("reformulation windows must live on the amplitude and signal grids".into()));
    }
    if f.grid != g1 || g.grid != g1 {
        return Err(Error::GridMismatch("signals must live on the one-dimensional slice of the amplitude grid".into()));
    }
    let c = averaging_constant(windows);
    if c <= 0.0 {
        return Err(Error::Numerical("window averaging constant vanishes".into()));
    }
    let vf = stft(f, &windows.chi1)?;
    let vg = stft(g, &windows.chi2)?;
    let chi = windows.chi.real_values();
    let rule = remainder_rule();
    let n = grid.points;
    let freqs: Vec<f64> = (0..n).map(|k| grid.freq(k)).collect();
    let parts: Vec<Complex64> = (0..grid.len())
        .into_par_iter()
        .map(|base| {
            let hx = h_function(a, phi, &chi, base, &rule);
            let idx = grid.unravel(base);
            let (x, y) = (grid.coord(idx[0]), grid.coord(idx[1]));
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..n {
                let gk = vg.at(idx[0], k).conj();
                for l in 0..n {
                    let fl = vf.at(idx[1], (n - l) % n);
                    acc += hx[k * n + l] * fl * gk * Complex64::from_polar(1.0, -(x * freqs[k] + y * freqs[l]));
                }
            }
            acc
        })
        .collect();
    let total: Complex64 = parts.iter().sum();
    let dxi = grid.freq_step();
    Ok(total * grid.cell() * dxi * dxi / c)
}

/// Same `H_X(ω)` two ways at one base node and a list of frequencies
/// `ω = (ξ, η)` on the lattice: the direct transform of the product, and the
/// lattice convolution `(2π)^{-N} e^{iφ(X)} Σ_κ F(e^{iψ₂}χ)(ω' - κ) F(a(X+·)χ)(κ) (π/L)³`
/// with `ω' = (ξ - φ'_x, η - φ'_y, -φ'_ζ)`. Returns the largest difference
/// relative to the largest value.
pub fn h_convolution_check(
    a: &SampledFunction,
    phi: &PhaseSpec,
    chi: &WindowSpec,
    base: usize,
    freqs: &[(usize, usize)],
) -> Result<f64> {
    phi.validate()?;
    check_desk_scale(a, phi)?;
    let g = a.grid;
    if chi.grid() != g {
        return Err(Error::GridMismatch("window must live on the amplitude grid".into()));
    }
    let rule = remainder_rule();
    let n = g.points;
    let cv = chi.real_values();
    let direct = h_function(a, phi, &cv, base, &rule);
    let x = g.point(base);
    let idx = g.unravel(base);
    let e = phi.eval(&x);
    let split = PhaseTaylorSplit::new(phi, &x, g, &rule)?;
    let u = SampledFunction {
        grid: g,
        values: split.remainder.values.iter().zip(&cv).map(|(r, c)| Complex64::from_polar(*c, r.re)).collect(),
        domain: Domain::Space,
    };
    let v = SampledFunction {
        grid: g,
        values: (0..g.len()).map(|j| a.values[shifted_index(&g, &idx, &g.unravel(j))] * cv[j]).collect(),
        domain: Domain::Space,
    };
    let fv = forward_dft(&v)?;
    let pref = (2.0 * PI).powi(-2) * g.freq_cell() * Complex64::from_polar(1.0, e.value);
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for &(k, l) in freqs {
        if k >= n || l >= n {
            return Err(Error::invalid("frequency index out of range"));
        }
        let w = [g.freq(k) - e.gradient[0], g.freq(l) - e.gradient[1], -e.gradient[2]];
        let conv: Complex64 = (0..g.len())
            .into_par_iter()
            .map(|j| {
                let kappa = g.freq_point(j);
                let shifted = [w[0] - kappa[0], w[1] - kappa[1], w[2] - kappa[2]];
                dft_at(&u, &shifted) * fv.values[j]
            })
            .collect::<Vec<_>>()
            .iter()
            .sum();
        let d = direct[k * n + l];
        worst = worst.max((conv * pref - d).norm());
        scale = scale.max(d.norm());
    }
    Ok(if scale == 0.0 { worst } else { worst / scale })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::norms::AmplitudeLayout;
    use crate::operators::phase::PhaseFamily;
    use crate::window::{Normalization, WindowFamily};

    fn setup(n: usize) -> (SampledFunction, SampledFunction, SampledFunction, ReformulationWindows) {
        let grid = GridSpec::new(3, n as f64 / 2.0, n).unwrap();
        let g1 = grid.with_dim(1);
        let gauss = |u: f64, s: f64, c: f64| (-(u - c).powi(2) / (2.0 * s * s)).exp();
        let a = SampledFunction::from_fn(grid, |x| {
            Complex64::from_polar(gauss(x[0], 0.55, 0.3) * gauss(x[1], 0.55, -0.2) * gauss(x[2], 0.6, 0.1), 0.4 * x[0])
        });
        let f = SampledFunction::from_fn(g1, |x| Complex64::from_polar(gauss(x[0], 0.6, 0.2), 0.5 * x[0]));
        let g = SampledFunction::from_fn(g1, |x| Complex64::from_polar(gauss(x[0], 0.6, -0.3), -0.3 * x[0]));
        let fam = WindowFamily::Gaussian { spread: 0.5 };
        let w = ReformulationWindows {
            chi: WindowSpec::new(fam, grid, Normalization::L2).unwrap(),
            chi1: WindowSpec::new(fam, g1, Normalization::L1).unwrap(),
            chi2: WindowSpec::new(fam, g1, Normalization::L1).unwrap(),
        };
        (a, f, g, w)
    }

    fn perturbed() -> PhaseSpec {
        PhaseSpec {
            family: PhaseFamily::Perturbed {
                matrix: vec![vec![0.1, 0.0, 1.0], vec![0.0, 0.0, -1.0], vec![1.0, -1.0, 0.2]],
                linear: vec![0.0, 0.1, 0.0],
                epsilon: 0.05,
                frequencies: vec![vec![0.7, -0.4, 0.3]],
            },
            layout: AmplitudeLayout::new(1, 1, 1),
        }
    }

    #[test]
    fn taylor_split_reassembles_the_phase() {
        let g = GridSpec::new(3, 4.0, 8).unwrap();
        let rule = remainder_rule();
        for phi in [PhaseSpec::bilinear(1), perturbed()] {
            let s = PhaseTaylorSplit::new(&phi, &[0.5, -1.0, 2.0], g, &rule).unwrap();
            assert!(s.check(&phi) < 1e-10);
        }
    }

    #[test]
    fn matches_the_direct_pairing() {
        let (a, f, g, w) = setup(8);
        let phi = PhaseSpec::bilinear(1);
        let t = stft_reformulation_pair(&a, &phi, &f, &g, &w).unwrap();
        let d = direct_pairing(&a, &phi, &f, &g).unwrap();
        assert!((t - d).norm() / d.norm() < 1e-3);
        let tp = stft_reformulation_pair(&a, &perturbed(), &f, &g, &w).unwrap();
        let dp = direct_pairing(&a, &perturbed(), &f, &g).unwrap();
        assert!((tp - dp).norm() / dp.norm() < 1e-3);
    }

    #[test]
    fn linearity_and_zero() {
        let (a, f, g, w) = setup(8);
        let phi = PhaseSpec::bilinear(1);
        let zero = SampledFunction::zeros(a.grid);
        assert_eq!(stft_reformulation_pair(&zero, &phi, &f, &g, &w).unwrap(), Complex64::new(0.0, 0.0));
        let base = stft_reformulation_pair(&a, &phi, &f, &g, &w).unwrap();
        let two = Complex64::new(2.0, 0.0);
        assert_eq!(stft_reformulation_pair(&a.scale(two), &phi, &f, &g, &w).unwrap(), base * 2.0);
        assert_eq!(stft_reformulation_pair(&a, &phi, &f.scale(two), &g, &w).unwrap(), base * 2.0);
        let i = Complex64::new(0.0, 1.0);
        let gi = stft_reformulation_pair(&a, &phi, &f, &g.scale(i), &w).unwrap();
        assert!((gi - base * i.conj()).norm() <= 1e-15 * base.norm());
    }

    #[test]
    fn convolution_route_fixes_the_constant() {
        let (a, _, _, w) = setup(8);
        for phi in [PhaseSpec::bilinear(1), perturbed()] {
            let r = h_convolution_check(&a, &phi, &w.chi, a.grid.ravel(&[4, 3, 5]), &[(4, 4), (2, 5), (6, 1)]).unwrap();
            assert!(r < 1e-12, "{r:e}");
        }
    }

    #[test]
    fn rejects_large_grids() {
        let grid = GridSpec::new(3, 8.0, 32).unwrap();
        let (_, f, g, w) = setup(8);
        assert!(stft_reformulation_pair(&SampledFunction::zeros(grid), &PhaseSpec::bilinear(1), &f, &g, &w).is_err());
    }
}
