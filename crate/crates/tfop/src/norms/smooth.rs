//! `C^{N,p}` norms of smooth amplitudes `a(x, y, ζ)` on `R^{3n}`:
//! `Σ_{|α| ≤ N} (∬ sup_y |∂^α a(x, y, ζ) ω(x, y, ζ)|^p dx dζ)^{1/p}`.
//!
//! Derivatives come from a closed-form oracle; no numerical differentiation.

use num_complex::Complex64;

use super::reduce::{check_exponent, nested_norm, Level};
use crate::error::{Error, Result};
use crate::grid::SampledFunction;
use crate::weights::WeightSpec;

/// Closed-form partial derivatives `∂^α a` of a test amplitude.
pub trait DerivativeOracle {
    /// `None` when the oracle cannot supply this multi-index.
    fn derivative(&self, alpha: &[usize], point: &[f64]) -> Option<Complex64>;
}

/// `Π_a exp(-(x_a - c_a)² / (2 s²))`, with derivatives through Hermite
/// polynomials: `∂^k e^{-u²/(2s²)} = (-1/(s√2))^k H_k(u/(s√2)) e^{-u²/(2s²)}`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianAmplitude {
    pub center: Vec<f64>,
    pub spread: f64,
}

/// Physicists' Hermite polynomial by the three-term recurrence.
fn hermite(k: usize, x: f64) -> f64 {
    let (mut h0, mut h1) = (1.0, 2.0 * x);
    if k == 0 {
        return h0;
    }
    for j in 1..k {
        let h2 = 2.0 * x * h1 - 2.0 * j as f64 * h0;
        h0 = h1;
        h1 = h2;
    }
    h1
}

impl GaussianAmplitude {
    pub fn value(&self, x: &[f64]) -> f64 {
        x.iter().zip(&self.center).map(|(v, c)| (-(v - c).powi(2) / (2.0 * self.spread.powi(2))).exp()).product()
    }

    pub fn sample(&self, grid: crate::grid::GridSpec) -> SampledFunction {
        SampledFunction::from_real_fn(grid, |x| self.value(x))
    }
}

impl DerivativeOracle for GaussianAmplitude {
    fn derivative(&self, alpha: &[usize], point: &[f64]) -> Option<Complex64> {
        if alpha.len() != self.center.len() || point.len() != self.center.len() {
            return None;
        }
        let r = self.spread * 2f64.sqrt();
        let mut v = 1.0;
        for ((&k, &x), &c) in alpha.iter().zip(point).zip(&self.center) {
            let u = (x - c) / r;
            v *= (-1.0 / r).powi(k as i32) * hermite(k, u) * (-u * u).exp();
        }
        Some(Complex64::new(v, 0.0))
    }
}

/// All multi-indices on `d` axes with `|α| ≤ order`, in graded lexicographic order.
pub fn multi_indices(d: usize, order: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for total in 0..=order {
        let mut cur = vec![0usize; d];
        fill(&mut cur, 0, total, &mut out);
    }
    out
}

fn fill(cur: &mut Vec<usize>, axis: usize, left: usize, out: &mut Vec<Vec<usize>>) {
    if axis + 1 == cur.len() {
        cur[axis] = left;
        out.push(cur.clone());
        return;
    }
    for k in (0..=left).rev() {
        cur[axis] = k;
        fill(cur, axis + 1, left - k, out);
    }
    cur[axis] = 0;
}

/// `C^{N,p}_{(ω)}` norm of `a` sampled on a `3n`-dimensional grid with axes
/// `(x, y, ζ)`. The `α = 0` term uses the samples; higher terms the oracle.
pub fn cnp_norm(a: &SampledFunction, oracle: &dyn DerivativeOracle, order: usize, p: f64, omega: &WeightSpec) -> Result<f64> {
    check_exponent(p)?;
    let g = a.grid;
    if !g.dim.is_multiple_of(3) {
        return Err(Error::invalid("C^{N,p} norms need a grid of dimension 3n"));
    }
    if omega.dim != g.dim {
        return Err(Error::DimensionMismatch { expected: g.dim, got: omega.dim });
    }
    let n = g.dim / 3;
    let points: Vec<Vec<f64>> = (0..g.len()).map(|j| g.point(j)).collect();
    let w: Vec<f64> = points.iter().map(|x| omega.eval_unchecked(x)).collect();
    let levels = [Level::sup((n..2 * n).collect()), Level::new((0..n).chain(2 * n..3 * n).collect(), p)];
    let shape = vec![g.points; g.dim];
    let weights = vec![g.spacing(); g.dim];
    let mut total = 0.0;
    for alpha in multi_indices(g.dim, order) {
        let mags: Vec<f64> = if alpha.iter().all(|&k| k == 0) {
            a.values.iter().zip(&w).map(|(v, w)| v.norm() * w).collect()
        } else {
            points
                .iter()
                .zip(&w)
                .map(|(x, w)| oracle.derivative(&alpha, x).map(|v| v.norm() * w))
                .collect::<Option<Vec<f64>>>()
                .ok_or_else(|| Error::invalid(format!("derivative oracle has no entry for multi-index {alpha:?}")))?
        };
        total += nested_norm(&mags, &shape, &weights, &levels)?;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;

    #[test]
    fn hermite_derivatives_match_finite_differences() {
        let amp = GaussianAmplitude { center: vec![0.3, -0.2, 0.1], spread: 0.9 };
        let x = [0.5, 0.1, -0.4];
        let e = 1e-4;
        for axis in 0..3 {
            let mut up = x;
            let mut dn = x;
            up[axis] += e;
            dn[axis] -= e;
            let mut alpha = vec![0; 3];
            alpha[axis] = 1;
            let fd = (amp.value(&up) - amp.value(&dn)) / (2.0 * e);
            assert!((amp.derivative(&alpha, &x).unwrap().re - fd).abs() < 1e-7);
            alpha[axis] = 2;
            let fd2 = (amp.value(&up) - 2.0 * amp.value(&x) + amp.value(&dn)) / (e * e);
            assert!((amp.derivative(&alpha, &x).unwrap().re - fd2).abs() < 1e-5);
        }
    }

    #[test]
    fn order_zero_matches_nested_loops() {
        let g = GridSpec::new(3, 6.0, 12).unwrap();
        let amp = GaussianAmplitude { center: vec![0.5, 0.0, -0.5], spread: 1.0 };
        let a = amp.sample(g);
        let v = cnp_norm(&a, &amp, 0, 2.0, &WeightSpec::trivial(3)).unwrap();
        let n = g.points;
        let h = g.spacing();
        let mut acc = 0.0;
        for x in 0..n {
            for z in 0..n {
                let mut sup: f64 = 0.0;
                for y in 0..n {
                    sup = sup.max(a.values[(x * n + y) * n + z].norm());
                }
                acc += sup * sup * h * h;
            }
        }
        assert!((v - acc.sqrt()).abs() < 1e-10);
        assert_eq!(cnp_norm(&SampledFunction::zeros(g), &amp, 0, 2.0, &WeightSpec::trivial(3)).unwrap(), 0.0);
        let v1 = cnp_norm(&a, &amp, 1, 2.0, &WeightSpec::trivial(3)).unwrap();
        assert!(v1 >= v);
    }

    #[test]
    fn multi_index_counts() {
        assert_eq!(multi_indices(3, 0).len(), 1);
        assert_eq!(multi_indices(3, 1).len(), 4);
        assert_eq!(multi_indices(3, 2).len(), 10);
    }
}
