//! Singular values and Schatten–von Neumann norms of discretized operators,
//! optionally between weighted Hilbert modulation spaces `M²_{(ω)}`, whose
//! inner products are realized by Gram matrices of the sampled basis.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{forward_dft, GridSpec, SampledFunction};
use crate::norms::check_exponent;
use crate::operators::OperatorMatrix;
use crate::stft::stft;
use crate::weights::WeightSpec;
use crate::window::WindowSpec;

/// Gram matrices with condition number above this are refused.
pub const MAX_GRAM_CONDITION: f64 = 1e12;
/// Singular values below this fraction of `σ₁` are set to zero.
pub const SPECTRUM_TRUNCATION: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SingularSpectrum {
    /// Non-increasing, non-negative.
    pub values: Vec<f64>,
    /// Weights of the source and target spaces; `None` is plain `L²`.
    pub source: Option<WeightSpec>,
    pub target: Option<WeightSpec>,
}

impl SingularSpectrum {
    /// Sort descending and zero out everything below the truncation level.
    pub fn new(mut values: Vec<f64>, source: Option<WeightSpec>, target: Option<WeightSpec>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::Numerical("singular values must be finite and non-negative".into()));
        }
        values.sort_by(|a, b| b.total_cmp(a));
        let cut = values.first().copied().unwrap_or(0.0) * SPECTRUM_TRUNCATION;
        for v in values.iter_mut() {
            if *v < cut {
                *v = 0.0;
            }
        }
        Ok(SingularSpectrum { values, source, target })
    }

    pub fn largest(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }
}

/// Hermitian positive-definite matrix realizing the `M²_{(ω)}` inner product
/// on lattice coefficient vectors: `f* G f = Σ |V_χ f ω|² h^n (π/L)^n`.
#[derive(Debug, Clone)]
pub struct WeightedGram {
    pub grid: GridSpec,
    pub matrix: DMatrix<Complex64>,
    pub omega: WeightSpec,
    pub window: WindowSpec,
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
    sqrt: DMatrix<Complex64>,
    inv_sqrt: DMatrix<Complex64>,
}

impl WeightedGram {
    pub fn condition(&self) -> f64 {
        self.max_eigenvalue / self.min_eigenvalue
    }

    /// `f* G f` for a sampled `f` on the Gram's grid.
    pub fn quadratic_form(&self, f: &SampledFunction) -> Result<f64> {
        if f.grid != self.grid {
            return Err(Error::GridMismatch("function and Gram live on different grids".into()));
        }
        let v = DVector::from_column_slice(&f.values);
        Ok((v.adjoint() * &self.matrix * &v)[(0, 0)].re)
    }
}

fn hermitian_power(vectors: &DMatrix<Complex64>, values: &DVector<f64>, s: f64) -> DMatrix<Complex64> {
    let d = DMatrix::from_diagonal(&values.map(|l| Complex64::new(l.powf(s), 0.0)));
    vectors * d * vectors.adjoint()
}

pub fn weighted_gram(omega: &WeightSpec, chi: &WindowSpec, grid: &GridSpec) -> Result<WeightedGram> {
    let n = grid.dim;
    if omega.dim != 2 * n {
        return Err(Error::DimensionMismatch { expected: 2 * n, got: omega.dim });
    }
    omega.validate()?;
    if chi.grid() != *grid {
        return Err(Error::GridMismatch("window must live on the Gram grid".into()));
    }
    let m = grid.len();
    let cell = (grid.spacing() * grid.freq_step()).powi(n as i32);
    // Column j: the weighted transform of the j-th lattice delta.
    let cols: Vec<Vec<Complex64>> = (0..m)
        .into_par_iter()
        .map(|j| -> Result<Vec<Complex64>> {
            let mut e = SampledFunction::zeros(*grid);
            e.values[j] = Complex64::new(1.0, 0.0);
            let v = stft(&e, chi)?;
            Ok(v.values.iter().enumerate().map(|(k, z)| z * omega.eval_unchecked(&v.coordinates(k)) * cell.sqrt()).collect())
        })
        .collect::<Result<_>>()?;
    let a = DMatrix::from_fn(m * m, m, |r, c| cols[c][r]);
    let mut g = a.adjoint() * &a;
    // symmetrize away roundoff before the Hermitian eigensolver
    g = (&g + g.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(g.clone());
    let min = eig.eigenvalues.min();
    let max = eig.eigenvalues.max();
    if !(min.is_finite() && max.is_finite()) || min <= 0.0 {
        return Err(Error::Numerical(format!("Gram matrix is not positive definite: eigenvalues in [{min:e}, {max:e}]")));
    }
    let sqrt = hermitian_power(&eig.eigenvectors, &eig.eigenvalues, 0.5);
    let inv_sqrt = hermitian_power(&eig.eigenvectors, &eig.eigenvalues, -0.5);
    Ok(WeightedGram {
        grid: *grid,
        matrix: g,
        omega: omega.clone(),
        window: chi.clone(),
        min_eigenvalue: min,
        max_eigenvalue: max,
        sqrt,
        inv_sqrt,
    })
}

fn check_gram(g: &WeightedGram, grid: &GridSpec) -> Result<()> {
    if g.grid != *grid {
        return Err(Error::GridMismatch("Gram grid does not match the operator".into()));
    }
    if g.condition() > MAX_GRAM_CONDITION {
        return Err(Error::Numerical(format!("Gram condition number {:e} exceeds {MAX_GRAM_CONDITION:e}", g.condition())));
    }
    Ok(())
}

/// Singular values of `G₂^{1/2} T G₁^{-1/2}`; `None` stands for the identity
/// Gram (plain coefficient inner product).
pub fn singular_values(t: &OperatorMatrix, g1: Option<&WeightedGram>, g2: Option<&WeightedGram>) -> Result<SingularSpectrum> {
    let mut m = t.entries.clone();
    if let Some(g) = g1 {
        check_gram(g, &t.source)?;
        m = &m * &g.inv_sqrt;
    }
    if let Some(g) = g2 {
        check_gram(g, &t.target)?;
        m = &g.sqrt * &m;
    }
    if m.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
        return Err(Error::Numerical("non-finite operator entries".into()));
    }
    let sv = m.singular_values();
    SingularSpectrum::new(sv.iter().copied().collect(), g1.map(|g| g.omega.clone()), g2.map(|g| g.omega.clone()))
}

/// Singular values of a plain matrix.
pub fn matrix_singular_values(m: &DMatrix<Complex64>) -> Result<SingularSpectrum> {
    SingularSpectrum::new(m.singular_values().iter().copied().collect(), None, None)
}

/// `(Σ σ_j^p)^{1/p}`, `∞ ↦ σ₁`; summed relative to `σ₁` so large `p` cannot
/// overflow.
pub fn schatten_norm(sigma: &SingularSpectrum, p: f64) -> Result<f64> {
    check_exponent(p)?;
    let s1 = sigma.largest();
    if s1 == 0.0 || p.is_infinite() {
        return Ok(s1);
    }
    let sum: f64 = sigma.values.iter().map(|v| (v / s1).powf(p)).sum();
    Ok(s1 * sum.powf(1.0 / p))
}

/// Log-convexity slack `‖T‖_{p₁}^{1-θ} ‖T‖_{p₂}^θ - ‖T‖_p` with
/// `1/p = (1-θ)/p₁ + θ/p₂`.
pub fn interpolation_audit(sigma: &SingularSpectrum, p1: f64, p2: f64, theta: f64) -> Result<f64> {
    check_exponent(p1)?;
    check_exponent(p2)?;
    if !(0.0..=1.0).contains(&theta) {
        return Err(Error::invalid(format!("interpolation parameter must lie in [0, 1], got {theta}")));
    }
    let inv = (1.0 - theta) / p1 + theta / p2;
    let p = if inv == 0.0 { f64::INFINITY } else { 1.0 / inv };
    let n1 = schatten_norm(sigma, p1)?;
    let n2 = schatten_norm(sigma, p2)?;
    let np = if theta == 0.0 {
        n1
    } else if theta == 1.0 {
        n2
    } else {
        schatten_norm(sigma, p)?
    };
    Ok(n1.powf(1.0 - theta) * n2.powf(theta) - np)
}

/// `|‖T‖_{I₂} - ‖K‖_{L²}|` for an operator assembled from a kernel: the
/// Hilbert–Schmidt norm from the spectrum against the quadrature norm of
/// the recovered kernel.
pub fn hs_kernel_identity(t: &OperatorMatrix) -> Result<f64> {
    let hs = schatten_norm(&singular_values(t, None, None)?, 2.0)?;
    let k = t.kernel()?;
    Ok((hs - k.norm_l2()).abs())
}

/// `f* G f / (‖<D> f‖₂² ‖χ‖₂²)`: the weighted Gram for `ω = <ξ>` against the
/// Bessel multiplier norm.
pub fn bessel_ratio(gram: &WeightedGram, f: &SampledFunction) -> Result<f64> {
    let hat = forward_dft(f)?;
    let g = f.grid;
    let bessel: f64 = hat
        .values
        .iter()
        .enumerate()
        .map(|(k, v)| {
            let xi2: f64 = g.freq_point(k).iter().map(|x| x * x).sum();
            v.norm_sqr() * (1.0 + xi2)
        })
        .sum::<f64>()
        * g.freq_cell();
    let c = gram.window.norm_l2().powi(2);
    Ok(gram.quadratic_form(f)? / (bessel * c))
}

/// Random matrix with entries uniform on the unit square, for audits.
pub fn random_matrix(rows: usize, cols: usize, rng: &mut impl rand::Rng) -> DMatrix<Complex64> {
    DMatrix::from_fn(rows, cols, |_, _| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
}

/// Operator on an explicit grid from a plain matrix (for audits on small,
/// grid-free matrices).
pub fn operator_from_matrix(m: DMatrix<Complex64>) -> Result<OperatorMatrix> {
    if m.nrows() != m.ncols() || m.nrows() < 2 {
        return Err(Error::invalid("audit matrices must be square with at least two rows"));
    }
    let g = GridSpec::new(1, 1.0, m.nrows())?;
    OperatorMatrix::new(g, g, m)
}
