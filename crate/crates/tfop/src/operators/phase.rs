//! Closed-form phase functions `φ(x, y, ζ)` with analytic derivatives, and
//! the nondegeneracy determinants built from their mixed second derivatives.
//!
//! Points are ordered `X = (x, y, ζ)`: target variable first, then source,
//! then the phase variable, following [`AmplitudeLayout`].

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::norms::AmplitudeLayout;

/// The bundled phase families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PhaseFamily {
    /// `⟨x − y, ζ⟩`; needs `n_x = n_y = m`.
    Bilinear,
    /// `½ Xᵀ A X + ⟨b, X⟩` with symmetric `A`.
    Quadratic { matrix: Vec<Vec<f64>>, linear: Vec<f64> },
    /// Quadratic plus `ε Σ_j sin⟨k_j, X⟩`.
    Perturbed { matrix: Vec<Vec<f64>>, linear: Vec<f64>, epsilon: f64, frequencies: Vec<Vec<f64>> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseSpec {
    pub family: PhaseFamily,
    pub layout: AmplitudeLayout,
}

/// Value, gradient and Hessian at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseEval {
    pub value: f64,
    pub gradient: Vec<f64>,
    pub hessian: DMatrix<f64>,
}

/// Named blocks of the Hessian.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HessianBlock {
    XX,
    XY,
    XZeta,
    YY,
    YZeta,
    ZetaZeta,
}

impl HessianBlock {
    pub const ALL: [HessianBlock; 6] =
        [HessianBlock::XX, HessianBlock::XY, HessianBlock::XZeta, HessianBlock::YY, HessianBlock::YZeta, HessianBlock::ZetaZeta];

    /// Row and column axis ranges in `X = (x, y, ζ)`.
    pub fn axes(&self, lay: &AmplitudeLayout) -> (Vec<usize>, Vec<usize>) {
        match self {
            HessianBlock::XX => (lay.x(), lay.x()),
            HessianBlock::XY => (lay.x(), lay.y()),
            HessianBlock::XZeta => (lay.x(), lay.zeta()),
            HessianBlock::YY => (lay.y(), lay.y()),
            HessianBlock::YZeta => (lay.y(), lay.zeta()),
            HessianBlock::ZetaZeta => (lay.zeta(), lay.zeta()),
        }
    }
}

impl PhaseEval {
    pub fn block(&self, lay: &AmplitudeLayout, b: HessianBlock) -> DMatrix<f64> {
        let (r, c) = b.axes(lay);
        DMatrix::from_fn(r.len(), c.len(), |i, j| self.hessian[(r[i], c[j])])
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| u * v).sum()
}

impl PhaseSpec {
    pub fn bilinear(n: usize) -> Self {
        PhaseSpec { family: PhaseFamily::Bilinear, layout: AmplitudeLayout::new(n, n, n) }
    }

    pub fn quadratic(layout: AmplitudeLayout, matrix: Vec<Vec<f64>>, linear: Vec<f64>) -> Result<Self> {
        let p = PhaseSpec { family: PhaseFamily::Quadratic { matrix, linear }, layout };
        p.validate()?;
        Ok(p)
    }

    /// `φ ≡ 0`, the canonical degenerate phase.
    pub fn zero(layout: AmplitudeLayout) -> Self {
        let d = layout.dim();
        PhaseSpec { family: PhaseFamily::Quadratic { matrix: vec![vec![0.0; d]; d], linear: vec![0.0; d] }, layout }
    }

    /// The quadratic form of the bilinear phase, written out as a matrix.
    pub fn bilinear_as_quadratic(n: usize) -> Self {
        let lay = AmplitudeLayout::new(n, n, n);
        let d = lay.dim();
        let mut a = vec![vec![0.0; d]; d];
        for i in 0..n {
            a[i][2 * n + i] = 1.0;
            a[2 * n + i][i] = 1.0;
            a[n + i][2 * n + i] = -1.0;
            a[2 * n + i][n + i] = -1.0;
        }
        PhaseSpec { family: PhaseFamily::Quadratic { matrix: a, linear: vec![0.0; d] }, layout: lay }
    }

    pub fn dim(&self) -> usize {
        self.layout.dim()
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.dim();
        let check_quadratic = |a: &Vec<Vec<f64>>, b: &Vec<f64>| -> Result<()> {
            if a.len() != d || a.iter().any(|r| r.len() != d) || b.len() != d {
                return Err(Error::invalid(format!("quadratic phase needs a {d}x{d} matrix and a length-{d} vector")));
            }
            for (i, row) in a.iter().enumerate() {
                for (j, &aij) in row.iter().enumerate() {
                    if !aij.is_finite() || aij != a[j][i] {
                        return Err(Error::invalid("phase matrix must be finite and symmetric"));
                    }
                }
            }
            if b.iter().any(|v| !v.is_finite()) {
                return Err(Error::invalid("non-finite linear phase term"));
            }
            Ok(())
        };
        match &self.family {
            PhaseFamily::Bilinear => {
                let l = self.layout;
                if l.n_x != l.n_y || l.n_x != l.m {
                    return Err(Error::invalid("bilinear phase needs n_x = n_y = m"));
                }
                Ok(())
            }
            PhaseFamily::Quadratic { matrix, linear } => check_quadratic(matrix, linear),
            PhaseFamily::Perturbed { matrix, linear, epsilon, frequencies } => {
                check_quadratic(matrix, linear)?;
                if !epsilon.is_finite() || frequencies.iter().any(|k| k.len() != d || k.iter().any(|v| !v.is_finite())) {
                    return Err(Error::invalid(format!("perturbation needs finite ε and length-{d} frequency vectors")));
                }
                Ok(())
            }
        }
    }

    /// `φ(X)` only; the hot path of operator assembly.
    pub fn value(&self, x: &[f64]) -> f64 {
        match &self.family {
            PhaseFamily::Bilinear => {
                let n = self.layout.n_x;
                (0..n).map(|i| (x[i] - x[n + i]) * x[2 * n + i]).sum()
            }
            PhaseFamily::Quadratic { matrix, linear } => quad_value(matrix, linear, x),
            PhaseFamily::Perturbed { matrix, linear, epsilon, frequencies } => {
                quad_value(matrix, linear, x) + epsilon * frequencies.iter().map(|k| dot(k, x).sin()).sum::<f64>()
            }
        }
    }

    /// `vᵀ φ''(X) v` without forming the Hessian.
    pub fn hessian_form(&self, x: &[f64], v: &[f64]) -> f64 {
        let quad = |a: &[Vec<f64>]| a.iter().zip(v).map(|(row, vi)| vi * dot(row, v)).sum::<f64>();
        match &self.family {
            PhaseFamily::Bilinear => {
                let n = self.layout.n_x;
                (0..n).map(|i| 2.0 * (v[i] - v[n + i]) * v[2 * n + i]).sum()
            }
            PhaseFamily::Quadratic { matrix, .. } => quad(matrix),
            PhaseFamily::Perturbed { matrix, epsilon, frequencies, .. } => {
                quad(matrix) - epsilon * frequencies.iter().map(|k| dot(k, x).sin() * dot(k, v).powi(2)).sum::<f64>()
            }
        }
    }

    /// Gradient `φ'(X)`.
    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        self.eval(x).gradient
    }

    pub fn eval(&self, x: &[f64]) -> PhaseEval {
        let d = self.dim();
        match &self.family {
            PhaseFamily::Bilinear => {
                let n = self.layout.n_x;
                let mut g = vec![0.0; d];
                let mut h = DMatrix::zeros(d, d);
                for i in 0..n {
                    g[i] = x[2 * n + i];
                    g[n + i] = -x[2 * n + i];
                    g[2 * n + i] = x[i] - x[n + i];
                    h[(i, 2 * n + i)] = 1.0;
                    h[(2 * n + i, i)] = 1.0;
                    h[(n + i, 2 * n + i)] = -1.0;
                    h[(2 * n + i, n + i)] = -1.0;
                }
                PhaseEval { value: self.value(x), gradient: g, hessian: h }
            }
            PhaseFamily::Quadratic { matrix, linear } => quad_eval(matrix, linear, x),
            PhaseFamily::Perturbed { matrix, linear, epsilon, frequencies } => {
                let mut e = quad_eval(matrix, linear, x);
                for k in frequencies {
                    let t = dot(k, x);
                    e.value += epsilon * t.sin();
                    for i in 0..d {
                        e.gradient[i] += epsilon * t.cos() * k[i];
                        for j in 0..d {
                            e.hessian[(i, j)] -= epsilon * t.sin() * k[i] * k[j];
                        }
                    }
                }
                e
            }
        }
    }
}

fn quad_value(a: &[Vec<f64>], b: &[f64], x: &[f64]) -> f64 {
    let mut v = dot(b, x);
    for (i, row) in a.iter().enumerate() {
        v += 0.5 * x[i] * dot(row, x);
    }
    v
}

fn quad_eval(a: &[Vec<f64>], b: &[f64], x: &[f64]) -> PhaseEval {
    let d = b.len();
    let gradient: Vec<f64> = (0..d).map(|i| dot(&a[i], x) + b[i]).collect();
    PhaseEval { value: quad_value(a, b, x), gradient, hessian: DMatrix::from_fn(d, d, |i, j| a[i][j]) }
}

/// Which mixed-derivative matrix the nondegeneracy condition constrains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NondegeneracyVariant {
    /// `[[φ''_{xy}, φ''_{xζ}], [φ''_{yζ}, φ''_{ζζ}]]`; needs `n_x = n_y = m`.
    Full,
    YZeta,
    XZeta,
    ZetaZeta,
}

impl NondegeneracyVariant {
    pub const ALL: [NondegeneracyVariant; 4] =
        [NondegeneracyVariant::Full, NondegeneracyVariant::YZeta, NondegeneracyVariant::XZeta, NondegeneracyVariant::ZetaZeta];

    /// Hessian blocks laid out as a block matrix, one inner vec per block row.
    fn blocks(&self) -> Vec<Vec<HessianBlock>> {
        use HessianBlock::*;
        match self {
            NondegeneracyVariant::Full => vec![vec![XY, XZeta], vec![YZeta, ZetaZeta]],
            NondegeneracyVariant::YZeta => vec![vec![YZeta]],
            NondegeneracyVariant::XZeta => vec![vec![XZeta]],
            NondegeneracyVariant::ZetaZeta => vec![vec![ZetaZeta]],
        }
    }

    fn assemble(&self, e: &PhaseEval, lay: &AmplitudeLayout) -> Result<DMatrix<f64>> {
        let rows: Vec<Vec<DMatrix<f64>>> = self.blocks().iter().map(|r| r.iter().map(|b| e.block(lay, *b)).collect()).collect();
        let heights: Vec<usize> = rows.iter().map(|r| r[0].nrows()).collect();
        let widths: Vec<usize> = rows[0].iter().map(|b| b.ncols()).collect();
        for (r, &ht) in rows.iter().zip(&heights) {
            if r.iter().zip(&widths).any(|(b, &w)| b.nrows() != ht || b.ncols() != w) {
                return Err(Error::invalid(format!("{self:?} blocks do not tile; it needs n_x = n_y = m")));
            }
        }
        let (nr, nc) = (heights.iter().sum::<usize>(), widths.iter().sum::<usize>());
        if nr != nc {
            return Err(Error::invalid(format!("{self:?} block is {nr}x{nc}; it needs a square block")));
        }
        let mut m = DMatrix::zeros(nr, nc);
        let mut r0 = 0;
        for (r, &ht) in rows.iter().zip(&heights) {
            let mut c0 = 0;
            for (b, &w) in r.iter().zip(&widths) {
                m.view_mut((r0, c0), (ht, w)).copy_from(b);
                c0 += w;
            }
            r0 += ht;
        }
        Ok(m)
    }
}

/// Below this the phase is reported degenerate.
pub const DEGENERACY_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Nondegeneracy {
    /// `min_X |det φ''_block(X)|` over the grid.
    pub d: f64,
    pub degenerate: bool,
}

impl Nondegeneracy {
    /// `Err(DegeneratePhase)` when degenerate.
    pub fn require(self) -> Result<f64> {
        if self.degenerate {
            Err(Error::DegeneratePhase(self.d))
        } else {
            Ok(self.d)
        }
    }
}

/// Determinant with explicit cofactor formulas up to 3×3 (exact for the
/// integer matrices of the bundled phases), LU beyond.
pub fn determinant(m: &DMatrix<f64>) -> f64 {
    match m.nrows() {
        0 => 1.0,
        1 => m[(0, 0)],
        2 => m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)],
        3 => {
            m[(0, 0)] * (m[(1, 1)] * m[(2, 2)] - m[(1, 2)] * m[(2, 1)])
                - m[(0, 1)] * (m[(1, 0)] * m[(2, 2)] - m[(1, 2)] * m[(2, 0)])
                + m[(0, 2)] * (m[(1, 0)] * m[(2, 1)] - m[(1, 1)] * m[(2, 0)])
        }
        _ => m.clone().determinant(),
    }
}

/// `d = min |det|` of the chosen block over every node of `grid`
/// (a grid of dimension `n_x + n_y + m`).
pub fn nondegeneracy(phi: &PhaseSpec, grid: &GridSpec, variant: NondegeneracyVariant) -> Result<Nondegeneracy> {
    phi.validate()?;
    let lay = phi.layout;
    if grid.dim != lay.dim() {
        return Err(Error::DimensionMismatch { expected: lay.dim(), got: grid.dim });
    }
    // Quadratic phases have a constant Hessian: one evaluation suffices.
    let constant = !matches!(phi.family, PhaseFamily::Perturbed { .. });
    let count = if constant { 1 } else { grid.len() };
    let mut d = f64::INFINITY;
    for j in 0..count {
        let b = variant.assemble(&phi.eval(&grid.point(j)), &lay)?;
        let det = determinant(&b).abs();
        if !det.is_finite() {
            return Err(Error::Numerical("non-finite phase Hessian".into()));
        }
        d = d.min(det);
    }
    Ok(Nondegeneracy { d, degenerate: d <= DEGENERACY_TOLERANCE })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bilinear_value_and_derivatives() {
        let p = PhaseSpec::bilinear(1);
        let e = p.eval(&[1.0, 2.0, 3.0]);
        assert_eq!(e.value, -3.0);
        assert_eq!(e.gradient, vec![3.0, -3.0, -1.0]);
        let q = PhaseSpec::bilinear_as_quadratic(1).eval(&[1.0, 2.0, 3.0]);
        assert_eq!(q.value, e.value);
        assert_eq!(q.gradient, e.gradient);
        assert_eq!(q.hessian, e.hessian);
        assert_eq!(e.block(&p.layout, HessianBlock::XZeta)[(0, 0)], 1.0);
        assert_eq!(e.block(&p.layout, HessianBlock::YZeta)[(0, 0)], -1.0);
    }

    #[test]
    fn perturbed_derivatives_match_finite_differences() {
        let lay = AmplitudeLayout::new(1, 1, 1);
        let a = vec![vec![0.2, 0.1, 1.0], vec![0.1, -0.3, -1.0], vec![1.0, -1.0, 0.4]];
        let p = PhaseSpec {
            family: PhaseFamily::Perturbed {
                matrix: a,
                linear: vec![0.1, 0.0, -0.2],
                epsilon: 0.05,
                frequencies: vec![vec![1.0, 0.5, -0.3], vec![0.2, -0.7, 1.1]],
            },
            layout: lay,
        };
        p.validate().unwrap();
        let x = [0.3, -0.4, 0.7];
        let e = p.eval(&x);
        let h = 1e-5;
        for i in 0..3 {
            let mut up = x;
            let mut dn = x;
            up[i] += h;
            dn[i] -= h;
            assert!(((p.value(&up) - p.value(&dn)) / (2.0 * h) - e.gradient[i]).abs() < 1e-8);
            let gu = p.gradient(&up);
            let gd = p.gradient(&dn);
            for j in 0..3 {
                assert!(((gu[j] - gd[j]) / (2.0 * h) - e.hessian[(i, j)]).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn bilinear_is_nondegenerate_with_unit_determinant() {
        let g = GridSpec::new(3, 4.0, 8).unwrap();
        for v in [NondegeneracyVariant::Full, NondegeneracyVariant::YZeta, NondegeneracyVariant::XZeta] {
            let r = nondegeneracy(&PhaseSpec::bilinear(1), &g, v).unwrap();
            assert_eq!(r.d, 1.0, "{v:?}");
            assert!(!r.degenerate);
        }
        // the bilinear phase has no ζζ curvature at all
        assert!(nondegeneracy(&PhaseSpec::bilinear(1), &g, NondegeneracyVariant::ZetaZeta).unwrap().degenerate);
        let g2 = GridSpec::new(6, 2.0, 2).unwrap();
        assert_eq!(nondegeneracy(&PhaseSpec::bilinear(2), &g2, NondegeneracyVariant::Full).unwrap().d, 1.0);
        let z = nondegeneracy(&PhaseSpec::zero(AmplitudeLayout::new(1, 1, 1)), &g, NondegeneracyVariant::Full).unwrap();
        assert_eq!(z.d, 0.0);
        assert!(matches!(z.require(), Err(Error::DegeneratePhase(_))));
    }

    #[test]
    fn rejects_bad_phases() {
        let lay = AmplitudeLayout::new(1, 1, 1);
        assert!(PhaseSpec::quadratic(lay, vec![vec![0.0, 1.0, 0.0], vec![0.0; 3], vec![0.0; 3]], vec![0.0; 3]).is_err());
        assert!(PhaseSpec { family: PhaseFamily::Bilinear, layout: AmplitudeLayout::new(1, 2, 1) }.validate().is_err());
        let g = GridSpec::new(4, 4.0, 4).unwrap();
        assert!(nondegeneracy(&PhaseSpec::bilinear(1), &g, NondegeneracyVariant::Full).is_err());
        let wide = PhaseSpec::zero(AmplitudeLayout::new(1, 1, 2));
        let g4 = GridSpec::new(4, 2.0, 2).unwrap();
        assert!(nondegeneracy(&wide, &g4, NondegeneracyVariant::YZeta).is_err());
    }
}
