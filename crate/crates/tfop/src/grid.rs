//! Periodic grids on centered boxes, the normalized discrete Fourier
//! transform, and Riemann-sum quadrature.
//!
//! A grid with `N` points per axis on `[-L, L)^n` has nodes
//! `x_j = -L + j h` (`h = 2L/N`) and frequency nodes `ξ_k = π k / L` for
//! `k = -N/2 .. N/2-1`, stored at index `k + N/2`. The forward transform is
//!
//! ```text
//! Ff(ξ_k) = (2π)^{-n/2} h^n Σ_j f(x_j) e^{-i<x_j, ξ_k>}
//! ```
//!
//! which is the Riemann sum of the unitary continuous transform, so
//! `F e^{-x²/2} = e^{-ξ²/2}` up to aliasing.

use std::cell::RefCell;
use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform periodic grid on `[-L, L)^dim` with `points` nodes per axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub dim: usize,
    pub half_width: f64,
    pub points: usize,
}

impl GridSpec {
    pub fn new(dim: usize, half_width: f64, points: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("grid dimension must be positive"));
        }
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::invalid(format!("half width must be positive, got {half_width}")));
        }
        if points == 0 || !points.is_multiple_of(2) {
            return Err(Error::invalid(format!("points per axis must be even and positive, got {points}")));
        }
        Ok(GridSpec { dim, half_width, points })
    }

    /// The grid whose spatial and frequency lattices coincide: `h = π/L`,
    /// i.e. `L = sqrt(π N / 2)`. On this grid `∫ e^{i(x-y)ζ} dζ` is an exact
    /// discrete delta, which the operator constructions rely on.
    pub fn matched(dim: usize, points: usize) -> Result<Self> {
        Self::new(dim, (PI * points as f64 / 2.0).sqrt(), points)
    }

    /// Same box and resolution in another dimension.
    pub fn with_dim(&self, dim: usize) -> Self {
        GridSpec { dim, ..*self }
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.points as f64
    }

    pub fn freq_step(&self) -> f64 {
        PI / self.half_width
    }

    /// Number of nodes, `N^dim`.
    pub fn len(&self) -> usize {
        self.points.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Spatial cell volume `h^n`.
    pub fn cell(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// Frequency cell volume `(π/L)^n`.
    pub fn freq_cell(&self) -> f64 {
        self.freq_step().powi(self.dim as i32)
    }

    pub fn coord(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.spacing()
    }

    pub fn freq(&self, i: usize) -> f64 {
        (i as f64 - (self.points / 2) as f64) * self.freq_step()
    }

    /// Row-major multi-index (axis 0 varies slowest).
    pub fn unravel(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim];
        for a in (0..self.dim).rev() {
            idx[a] = flat % self.points;
            flat /= self.points;
        }
        idx
    }

    pub fn ravel(&self, idx: &[usize]) -> usize {
        idx.iter().fold(0, |acc, &i| acc * self.points + i)
    }

    pub fn point(&self, flat: usize) -> Vec<f64> {
        self.unravel(flat).into_iter().map(|i| self.coord(i)).collect()
    }

    pub fn freq_point(&self, flat: usize) -> Vec<f64> {
        self.unravel(flat).into_iter().map(|i| self.freq(i)).collect()
    }

    /// Index of the node `x_i + s h`, wrapped periodically.
    pub fn wrap(&self, i: usize, s: isize) -> usize {
        let n = self.points as isize;
        (((i as isize + s) % n + n) % n) as usize
    }

    /// Index of the node nearest to zero, i.e. `N/2`.
    pub fn origin_index(&self) -> usize {
        self.points / 2
    }

    /// Locate a coordinate on the lattice, if it is (within `1e-9 h`) a node
    /// after periodic reduction.
    pub fn lattice_index(&self, x: f64) -> Option<usize> {
        let h = self.spacing();
        let t = (x + self.half_width) / h;
        let r = t.round();
        if (t - r).abs() > 1e-9 {
            return None;
        }
        let n = self.points as i64;
        Some((((r as i64) % n + n) % n) as usize)
    }

    /// Locate a frequency on the dual lattice (periodically).
    pub fn freq_index(&self, xi: f64) -> Option<usize> {
        let t = xi / self.freq_step();
        let r = t.round();
        if (t - r).abs() > 1e-9 {
            return None;
        }
        let n = self.points as i64;
        Some((((r as i64 + n / 2) % n + n) % n) as usize)
    }
}

/// Whether values live on the spatial lattice or the frequency lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    Space,
    Frequency,
}

/// Complex samples on every node of a grid, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction {
    pub grid: GridSpec,
    pub values: Vec<Complex64>,
    pub domain: Domain,
}

impl SampledFunction {
    pub fn new(grid: GridSpec, values: Vec<Complex64>, domain: Domain) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::DimensionMismatch { expected: grid.len(), got: values.len() });
        }
        if let Some(i) = values.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::invalid(format!("non-finite sample at flat index {i}")));
        }
        Ok(SampledFunction { grid, values, domain })
    }

    pub fn zeros(grid: GridSpec) -> Self {
        SampledFunction { grid, values: vec![Complex64::new(0.0, 0.0); grid.len()], domain: Domain::Space }
    }

    /// Sample a closure at every spatial node.
    pub fn from_fn(grid: GridSpec, f: impl Fn(&[f64]) -> Complex64) -> Self {
        let values = (0..grid.len()).map(|j| f(&grid.point(j))).collect();
        SampledFunction { grid, values, domain: Domain::Space }
    }

    pub fn from_real_fn(grid: GridSpec, f: impl Fn(&[f64]) -> f64) -> Self {
        Self::from_fn(grid, |x| Complex64::new(f(x), 0.0))
    }

    fn cell(&self) -> f64 {
        match self.domain {
            Domain::Space => self.grid.cell(),
            Domain::Frequency => self.grid.freq_cell(),
        }
    }

    pub fn norm_l2(&self) -> f64 {
        (self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.cell()).sqrt()
    }

    pub fn norm_l1(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).sum::<f64>() * self.cell()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    /// `∫ f conj(g)` by quadrature.
    pub fn inner(&self, other: &SampledFunction) -> Result<Complex64> {
        self.check_same(other)?;
        let s: Complex64 = self.values.iter().zip(&other.values).map(|(a, b)| a * b.conj()).sum();
        Ok(s * self.cell())
    }

    pub fn scale(&self, c: Complex64) -> Self {
        self.map(|v| v * c)
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        SampledFunction { grid: self.grid, values: self.values.iter().map(|&v| f(v)).collect(), domain: self.domain }
    }

    pub fn conj(&self) -> Self {
        self.map(|v| v.conj())
    }

    /// Pointwise `α self + β other`.
    pub fn axpby(&self, alpha: Complex64, other: &SampledFunction, beta: Complex64) -> Result<Self> {
        self.check_same(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| alpha * a + beta * b).collect();
        Ok(SampledFunction { grid: self.grid, values, domain: self.domain })
    }

    pub fn check_same(&self, other: &SampledFunction) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch(format!("{:?} vs {:?}", self.grid, other.grid)));
        }
        if self.domain != other.domain {
            return Err(Error::GridMismatch("space/frequency domain tags differ".into()));
        }
        Ok(())
    }

    /// Largest modulus on the `x = -L` faces relative to the global maximum.
    /// Functions that are meant to model decaying data on `R^n` should keep
    /// this tiny, otherwise the periodic wrap is visible.
    pub fn edge_ratio(&self) -> f64 {
        let max = self.max_abs();
        if max == 0.0 {
            return 0.0;
        }
        let g = self.grid;
        let mut edge: f64 = 0.0;
        for (j, v) in self.values.iter().enumerate() {
            if g.unravel(j).contains(&0) {
                edge = edge.max(v.norm());
            }
        }
        edge / max
    }

    /// Periodic translate by a whole number of nodes per axis:
    /// `out(x) = self(x - s h)`.
    pub fn shifted(&self, shift: &[isize]) -> Self {
        let g = self.grid;
        let mut values = vec![Complex64::new(0.0, 0.0); g.len()];
        for (j, out) in values.iter_mut().enumerate() {
            let src: Vec<usize> = g.unravel(j).iter().zip(shift).map(|(&i, &s)| g.wrap(i, -s)).collect();
            *out = self.values[g.ravel(&src)];
        }
        SampledFunction { grid: g, values, domain: self.domain }
    }
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn sign(k: usize) -> f64 {
    if k.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Transform along one axis in place. The centered-lattice phases reduce to
/// the checkerboard factor `(-1)^{j + κ - N/2}` around a plain FFT.
fn transform_axis(values: &mut [Complex64], grid: &GridSpec, axis: usize, inverse: bool) {
    let n = grid.points;
    let stride = n.pow((grid.dim - 1 - axis) as u32);
    let block = stride * n;
    let fft = PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(n)
        } else {
            p.plan_fft_forward(n)
        }
    });
    let scale = if inverse { grid.freq_step() } else { grid.spacing() } / (2.0 * PI).sqrt();
    let mut line = vec![Complex64::new(0.0, 0.0); n];
    for outer in (0..values.len()).step_by(block) {
        for inner in 0..stride {
            let base = outer + inner;
            for (j, l) in line.iter_mut().enumerate() {
                *l = values[base + j * stride] * sign(j);
            }
            fft.process(&mut line);
            for (k, l) in line.iter().enumerate() {
                values[base + k * stride] = l * (sign(k + n / 2) * scale);
            }
        }
    }
}

fn transform_axes(f: &SampledFunction, axes: &[usize], inverse: bool) -> Vec<Complex64> {
    let mut values = f.values.clone();
    for &a in axes {
        transform_axis(&mut values, &f.grid, a, inverse);
    }
    values
}

fn require_finite(f: &SampledFunction) -> Result<()> {
    if f.values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
        return Err(Error::invalid("non-finite samples"));
    }
    Ok(())
}

/// Normalized forward transform on the centered lattice.
pub fn forward_dft(f: &SampledFunction) -> Result<SampledFunction> {
    if f.domain != Domain::Space {
        return Err(Error::invalid("forward transform expects space-domain samples"));
    }
    require_finite(f)?;
    let axes: Vec<usize> = (0..f.grid.dim).collect();
    Ok(SampledFunction { grid: f.grid, values: transform_axes(f, &axes, false), domain: Domain::Frequency })
}

/// Inverse of [`forward_dft`]: `f(x_j) = (2π)^{-n/2} (π/L)^n Σ_k Ff(ξ_k) e^{i<x_j, ξ_k>}`.
pub fn inverse_dft(f: &SampledFunction) -> Result<SampledFunction> {
    if f.domain != Domain::Frequency {
        return Err(Error::invalid("inverse transform expects frequency-domain samples"));
    }
    require_finite(f)?;
    let axes: Vec<usize> = (0..f.grid.dim).collect();
    Ok(SampledFunction { grid: f.grid, values: transform_axes(f, &axes, true), domain: Domain::Space })
}

/// Partial forward transform over a subset of axes (the remaining axes stay
/// spatial). Returned values use the same row-major layout.
pub fn forward_dft_axes(f: &SampledFunction, axes: &[usize]) -> Vec<Complex64> {
    transform_axes(f, axes, false)
}

/// Partial inverse transform over a subset of axes.
pub fn inverse_dft_axes(f: &SampledFunction, axes: &[usize]) -> Vec<Complex64> {
    transform_axes(f, axes, true)
}

/// Forward transform evaluated at an arbitrary frequency by direct
/// lexicographic summation (nonuniform transform). Also serves as the
/// independent oracle for [`forward_dft`].
pub fn dft_at(f: &SampledFunction, xi: &[f64]) -> Complex64 {
    let g = f.grid;
    let mut acc = Complex64::new(0.0, 0.0);
    for (j, v) in f.values.iter().enumerate() {
        let x = g.point(j);
        let phase: f64 = x.iter().zip(xi).map(|(a, b)| a * b).sum();
        acc += v * Complex64::from_polar(1.0, -phase);
    }
    acc * g.cell() / (2.0 * PI).powf(g.dim as f64 / 2.0)
}

/// `h^n Σ f` for spatial samples, `(π/L)^n Σ f` for frequency samples.
pub fn quadrature_integral(f: &SampledFunction) -> Result<Complex64> {
    require_finite(f)?;
    let s: Complex64 = f.values.iter().sum();
    Ok(s * f.cell())
}

/// Trigonometric interpolation of periodic samples.
///
/// The Nyquist coefficient is split symmetrically between `±π/h`, so real
/// data interpolate to real values. Evaluation is a direct sum, the
/// nonuniform transform used for every off-lattice point in the crate.
#[derive(Debug, Clone)]
pub struct TrigInterpolant {
    grid: GridSpec,
    axes: usize,
    spectrum: Vec<Complex64>,
}

impl TrigInterpolant {
    /// Interpolate along the first `axes` axes; the rest stay on the lattice.
    pub fn new(f: &SampledFunction, axes: usize) -> Result<Self> {
        if axes == 0 || axes > f.grid.dim {
            return Err(Error::invalid("interpolation axis count out of range"));
        }
        let ax: Vec<usize> = (0..axes).collect();
        Ok(TrigInterpolant { grid: f.grid, axes, spectrum: forward_dft_axes(f, &ax) })
    }

    /// Fraction of spectral mass on the outermost frequency ring of the
    /// interpolated axes; large values mean the samples are not resolved and
    /// off-lattice evaluation would alias.
    pub fn nyquist_ratio(&self) -> f64 {
        let g = self.grid;
        let total: f64 = self.spectrum.iter().map(|v| v.norm()).fold(0.0, f64::max);
        if total == 0.0 {
            return 0.0;
        }
        let mut edge: f64 = 0.0;
        for (j, v) in self.spectrum.iter().enumerate() {
            if g.unravel(j)[..self.axes].contains(&0) {
                edge = edge.max(v.norm());
            }
        }
        edge / total
    }

    fn weights(&self, x: f64) -> Vec<Complex64> {
        let g = self.grid;
        let c = g.freq_step() / (2.0 * PI).sqrt();
        (0..g.points)
            .map(|k| {
                if k == 0 {
                    Complex64::new(c * (x * PI / g.spacing()).cos(), 0.0)
                } else {
                    Complex64::from_polar(c, x * g.freq(k))
                }
            })
            .collect()
    }

    /// Values at `coords` on the interpolated axes, for every lattice node of
    /// the remaining axes (row-major, length `N^(dim - axes)`).
    pub fn eval(&self, coords: &[f64]) -> Vec<Complex64> {
        let g = self.grid;
        let rest = g.points.pow((g.dim - self.axes) as u32);
        let w: Vec<Vec<Complex64>> = coords.iter().map(|&x| self.weights(x)).collect();
        let mut out = vec![Complex64::new(0.0, 0.0); rest];
        let head = g.points.pow(self.axes as u32);
        for h in 0..head {
            let mut wt = Complex64::new(1.0, 0.0);
            let mut rem = h;
            for a in (0..self.axes).rev() {
                wt *= w[a][rem % g.points];
                rem /= g.points;
            }
            let row = &self.spectrum[h * rest..(h + 1) * rest];
            for (o, s) in out.iter_mut().zip(row) {
                *o += wt * s;
            }
        }
        out
    }

    /// Single value when every axis is interpolated.
    pub fn eval_point(&self, x: &[f64]) -> Complex64 {
        self.eval(x)[0]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gauss(grid: GridSpec) -> SampledFunction {
        SampledFunction::from_real_fn(grid, |x| (-x.iter().map(|v| v * v).sum::<f64>() / 2.0).exp())
    }

    #[test]
    fn impulse_has_flat_spectrum() {
        let g = GridSpec::new(1, 8.0, 64).unwrap();
        let mut f = SampledFunction::zeros(g);
        f.values[g.origin_index()] = Complex64::new(1.0, 0.0);
        let ff = forward_dft(&f).unwrap();
        let expect = g.spacing() / (2.0 * PI).sqrt();
        for v in &ff.values {
            assert!((v - expect).norm() < 1e-15);
        }
    }

    #[test]
    fn gaussian_is_self_dual() {
        let g = GridSpec::new(1, 8.0, 64).unwrap();
        let ff = forward_dft(&gauss(g)).unwrap();
        for k in 0..g.points {
            let xi = g.freq(k);
            assert!((ff.values[k] - (-xi * xi / 2.0).exp()).norm() < 1e-10);
        }
    }

    #[test]
    fn fft_matches_direct_sum_in_two_dimensions() {
        let g = GridSpec::new(2, 3.0, 8).unwrap();
        let f = SampledFunction::from_fn(g, |x| Complex64::new((x[0] * 0.7).sin() + x[1], x[0] * x[1]));
        let ff = forward_dft(&f).unwrap();
        for k in 0..g.len() {
            let d = dft_at(&f, &g.freq_point(k));
            assert!((ff.values[k] - d).norm() < 1e-12, "k={k}");
        }
    }

    #[test]
    fn quadrature_examples() {
        let g = GridSpec::new(1, 8.0, 64).unwrap();
        let one = SampledFunction::from_real_fn(g, |_| 1.0);
        assert!((quadrature_integral(&one).unwrap().re - 16.0).abs() < 1e-12);
        let e = SampledFunction::from_real_fn(g, |x| (-x[0] * x[0]).exp());
        assert!((quadrature_integral(&e).unwrap().re - PI.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn trig_polynomials_integrate_exactly() {
        let g = GridSpec::new(1, 5.0, 32).unwrap();
        let k = g.freq(g.origin_index() + 3);
        let f = SampledFunction::from_fn(g, |x| Complex64::from_polar(1.0, k * x[0]) + 2.0);
        assert!((quadrature_integral(&f).unwrap() - 20.0).norm() < 1e-12);
    }

    #[test]
    fn interpolation_reproduces_nodes_and_smooth_values() {
        let g = GridSpec::new(1, 8.0, 64).unwrap();
        let f = gauss(g);
        let it = TrigInterpolant::new(&f, 1).unwrap();
        assert!((it.eval_point(&[g.coord(20)]) - f.values[20]).norm() < 1e-12);
        let x = 0.37;
        assert!((it.eval_point(&[x]).re - (-x * x / 2.0f64).exp()).abs() < 1e-12);
        assert!(it.nyquist_ratio() < 1e-12);
    }

    #[test]
    fn lattice_lookup() {
        let g = GridSpec::new(1, 4.0, 16).unwrap();
        assert_eq!(g.lattice_index(0.0), Some(8));
        assert_eq!(g.lattice_index(4.0), Some(0));
        assert_eq!(g.lattice_index(0.25), None);
        assert_eq!(g.freq_index(g.freq(3)), Some(3));
        assert_eq!(g.freq_index(-g.freq(0)), Some(0));
    }

    #[test]
    fn rejects_bad_grids_and_samples() {
        assert!(GridSpec::new(1, 1.0, 7).is_err());
        assert!(GridSpec::new(1, -1.0, 8).is_err());
        let g = GridSpec::new(1, 1.0, 4).unwrap();
        let bad = vec![Complex64::new(f64::NAN, 0.0); 4];
        assert!(SampledFunction::new(g, bad, Domain::Space).is_err());
    }
}
