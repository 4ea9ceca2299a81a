use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{Domain, GridSpec, SampledFunction};

/// A discretized operator: `(Tf)(x_j) = Σ_k entries[j, k] f(y_k)`, with the
/// source quadrature weight already folded into the entries.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    pub source: GridSpec,
    pub target: GridSpec,
    pub entries: DMatrix<Complex64>,
}

impl OperatorMatrix {
    pub fn new(source: GridSpec, target: GridSpec, entries: DMatrix<Complex64>) -> Result<Self> {
        if entries.nrows() != target.len() || entries.ncols() != source.len() {
            return Err(Error::invalid(format!(
                "{}x{} entries for a {}-point target and {}-point source",
                entries.nrows(),
                entries.ncols(),
                target.len(),
                source.len()
            )));
        }
        if entries.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::Numerical("non-finite operator entry".into()));
        }
        Ok(OperatorMatrix { source, target, entries })
    }

    /// Assemble row by row in parallel; rows land in index order.
    pub fn from_rows(source: GridSpec, target: GridSpec, row: impl Fn(usize) -> Vec<Complex64> + Sync) -> Result<Self> {
        let rows: Vec<Vec<Complex64>> = (0..target.len()).into_par_iter().map(&row).collect();
        let cols = source.len();
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::invalid("row length does not match the source grid"));
        }
        Self::new(source, target, DMatrix::from_fn(rows.len(), cols, |i, k| rows[i][k]))
    }

    /// The operator with kernel `K(x, y)` sampled on the target × source grid:
    /// entries `K(x_j, y_k) h^{n_source}`.
    pub fn from_kernel(kernel: &SampledFunction, source_dim: usize) -> Result<Self> {
        let g = kernel.grid;
        if source_dim == 0 || source_dim >= g.dim {
            return Err(Error::invalid("kernel grid must split into target and source axes"));
        }
        let source = g.with_dim(source_dim);
        let target = g.with_dim(g.dim - source_dim);
        let w = source.cell();
        let cols = source.len();
        Self::new(source, target, DMatrix::from_fn(target.len(), cols, |i, k| kernel.values[i * cols + k] * w))
    }

    /// Inverse of [`OperatorMatrix::from_kernel`]: the kernel on the
    /// target × source grid.
    pub fn kernel(&self) -> Result<SampledFunction> {
        if self.source.points != self.target.points || self.source.half_width != self.target.half_width {
            return Err(Error::GridMismatch("kernel needs source and target on the same lattice".into()));
        }
        let w = self.source.cell();
        let cols = self.source.len();
        let g = self.source.with_dim(self.source.dim + self.target.dim);
        let values = (0..g.len()).map(|j| self.entries[(j / cols, j % cols)] / w).collect();
        SampledFunction::new(g, values, Domain::Space)
    }

    pub fn identity(grid: GridSpec) -> Self {
        OperatorMatrix { source: grid, target: grid, entries: DMatrix::identity(grid.len(), grid.len()) }
    }

    pub fn apply(&self, f: &SampledFunction) -> Result<SampledFunction> {
        if f.grid != self.source {
            return Err(Error::GridMismatch(format!("operator source {:?} vs input {:?}", self.source, f.grid)));
        }
        if f.domain != Domain::Space {
            return Err(Error::invalid("operators act on space-domain samples"));
        }
        let v = nalgebra::DVector::from_column_slice(&f.values);
        let out = &self.entries * v;
        Ok(SampledFunction { grid: self.target, values: out.iter().copied().collect(), domain: Domain::Space })
    }

    /// `max |A_jk − B_jk|`.
    pub fn max_entry_diff(&self, other: &OperatorMatrix) -> Result<f64> {
        if self.source != other.source || self.target != other.target {
            return Err(Error::GridMismatch("operators act between different grids".into()));
        }
        Ok(self.entries.iter().zip(other.entries.iter()).fold(0.0, |m, (a, b)| m.max((a - b).norm())))
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, v| m.max(v.norm()))
    }
}

/// `(Tf)(x_j) = h^{n_source} Σ_k K(x_j, y_k) f(y_k)`; the pairing is
/// bilinear, with no conjugation.
pub fn apply_kernel(kernel: &SampledFunction, f: &SampledFunction) -> Result<SampledFunction> {
    let g = kernel.grid;
    let s = f.grid;
    if s.dim >= g.dim || s.points != g.points || s.half_width != g.half_width {
        return Err(Error::GridMismatch(format!("kernel grid {g:?} does not contain source grid {s:?}")));
    }
    if f.domain != Domain::Space {
        return Err(Error::invalid("kernels act on space-domain samples"));
    }
    let target = g.with_dim(g.dim - s.dim);
    let cols = s.len();
    let w = s.cell();
    let values: Vec<Complex64> = (0..target.len())
        .into_par_iter()
        .map(|j| kernel.values[j * cols..(j + 1) * cols].iter().zip(&f.values).map(|(k, v)| k * v).sum::<Complex64>() * w)
        .collect();
    Ok(SampledFunction { grid: target, values, domain: Domain::Space })
}
