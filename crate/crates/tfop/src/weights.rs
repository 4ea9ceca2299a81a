//! Polynomial weights built from Peetre brackets `<x> = (1 + |x|²)^{1/2}`,
//! and finite-box audits of the moderateness inequalities they are used in.
//!
//! The audits can only ever look at a box; a finite estimate is evidence,
//! not a proof, and every report carries the box it was computed on.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridSpec;

/// `<x_A>^s` where `x_A` is the sub-vector on `axes`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BracketFactor {
    pub axes: Vec<usize>,
    pub exponent: f64,
}

/// `constant · Π <x_A>^s` on `R^dim`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightSpec {
    pub dim: usize,
    #[serde(default)]
    pub factors: Vec<BracketFactor>,
    #[serde(default = "one")]
    pub constant: f64,
}

fn one() -> f64 {
    1.0
}

pub fn bracket(x: &[f64]) -> f64 {
    (1.0 + x.iter().map(|v| v * v).sum::<f64>()).sqrt()
}

impl WeightSpec {
    /// `ω ≡ 1`.
    pub fn trivial(dim: usize) -> Self {
        WeightSpec { dim, factors: Vec::new(), constant: 1.0 }
    }

    /// `<x>^s` on all of `R^dim`.
    pub fn bracket_power(dim: usize, s: f64) -> Self {
        Self::trivial(dim).times(&(0..dim).collect::<Vec<_>>(), s)
    }

    /// Multiply by `<x_A>^s`.
    pub fn times(mut self, axes: &[usize], s: f64) -> Self {
        self.factors.push(BracketFactor { axes: axes.to_vec(), exponent: s });
        self
    }

    /// Phase-space weight `<ξ>^s` on `R^{2n}` (frequency half is the back half).
    pub fn frequency_power(n: usize, s: f64) -> Self {
        Self::trivial(2 * n).times(&(n..2 * n).collect::<Vec<_>>(), s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.constant.is_finite() && self.constant > 0.0) {
            return Err(Error::invalid("weight constant must be positive"));
        }
        for f in &self.factors {
            if !f.exponent.is_finite() {
                return Err(Error::invalid("weight exponent must be finite"));
            }
            if let Some(&a) = f.axes.iter().find(|&&a| a >= self.dim) {
                return Err(Error::invalid(format!("weight axis {a} out of range for dimension {}", self.dim)));
            }
        }
        Ok(())
    }

    pub fn is_trivial(&self) -> bool {
        self.constant == 1.0 && self.factors.iter().all(|f| f.exponent == 0.0)
    }

    pub fn eval(&self, point: &[f64]) -> Result<f64> {
        if point.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: point.len() });
        }
        Ok(self.eval_unchecked(point))
    }

    pub(crate) fn eval_unchecked(&self, point: &[f64]) -> f64 {
        let mut w = self.constant;
        let mut buf = Vec::new();
        for f in &self.factors {
            if f.exponent == 0.0 {
                continue;
            }
            buf.clear();
            buf.extend(f.axes.iter().map(|&a| point[a]));
            w *= bracket(&buf).powf(f.exponent);
        }
        w
    }

    /// `1/ω`, realized by negating every exponent.
    pub fn reciprocal(&self) -> Self {
        WeightSpec {
            dim: self.dim,
            factors: self.factors.iter().map(|f| BracketFactor { axes: f.axes.clone(), exponent: -f.exponent }).collect(),
            constant: 1.0 / self.constant,
        }
    }
}

/// Result of a finite-box audit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Audit {
    pub c_estimate: f64,
    pub box_half_width: f64,
    pub points_per_axis: usize,
}

fn grid_points(grid: &GridSpec) -> Vec<Vec<f64>> {
    (0..grid.len()).map(|j| grid.point(j)).collect()
}

/// `max ω(x+y) / (ω(x) v(y))` over all pairs of grid nodes.
pub fn audit_moderate(omega: &WeightSpec, v: &WeightSpec, grid: &GridSpec) -> Result<Audit> {
    if omega.dim != v.dim || omega.dim != grid.dim {
        return Err(Error::DimensionMismatch { expected: omega.dim, got: v.dim.max(grid.dim) });
    }
    let pts = grid_points(grid);
    let wo: Vec<f64> = pts.iter().map(|p| omega.eval_unchecked(p)).collect();
    let wv: Vec<f64> = pts.iter().map(|p| v.eval_unchecked(p)).collect();
    let mut c: f64 = 0.0;
    let mut sum = vec![0.0; grid.dim];
    for (x, ox) in pts.iter().zip(&wo) {
        for (y, vy) in pts.iter().zip(&wv) {
            for ((s, a), b) in sum.iter_mut().zip(x).zip(y) {
                *s = a + b;
            }
            c = c.max(omega.eval_unchecked(&sum) / (ox * vy));
        }
    }
    Ok(Audit { c_estimate: c, box_half_width: grid.half_width, points_per_axis: grid.points })
}

/// Submultiplicativity estimate together with the dilation condition
/// `v(t·) ≤ C v` for `t ∈ {0, 0.1, …, 1}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SubmultiplicativeAudit {
    pub submultiplicative: Audit,
    pub dilation: Audit,
}

pub fn audit_submultiplicative(v: &WeightSpec, grid: &GridSpec) -> Result<SubmultiplicativeAudit> {
    let sub = audit_moderate(v, v, grid)?;
    let mut c: f64 = 0.0;
    let mut buf = vec![0.0; grid.dim];
    for x in grid_points(grid) {
        let vx = v.eval_unchecked(&x);
        for step in 0..=10 {
            let t = step as f64 / 10.0;
            for (b, a) in buf.iter_mut().zip(&x) {
                *b = t * a;
            }
            c = c.max(v.eval_unchecked(&buf) / vx);
        }
    }
    Ok(SubmultiplicativeAudit {
        submultiplicative: sub,
        dilation: Audit { c_estimate: c, box_half_width: grid.half_width, points_per_axis: grid.points },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eval_examples() {
        let w = WeightSpec::bracket_power(1, 3.7);
        assert_eq!(w.eval(&[0.0]).unwrap(), 1.0);
        let w2 = WeightSpec::bracket_power(1, 2.0);
        assert!((w2.eval(&[1.0]).unwrap() - 2.0).abs() < 1e-15);
        let prod = WeightSpec::trivial(2).times(&[0], 1.0).times(&[1], 1.0);
        assert!((prod.eval(&[1.0, 1.0]).unwrap() - 2.0).abs() < 1e-15);
        assert!(w.eval(&[0.0, 1.0]).is_err());
    }

    #[test]
    fn trivial_weights_audit_to_one() {
        let g = GridSpec::new(1, 8.0, 32).unwrap();
        let a = audit_moderate(&WeightSpec::trivial(1), &WeightSpec::trivial(1), &g).unwrap();
        assert_eq!(a.c_estimate, 1.0);
        let s = audit_submultiplicative(&WeightSpec::trivial(1), &g).unwrap();
        assert_eq!(s.submultiplicative.c_estimate, 1.0);
        assert_eq!(s.dilation.c_estimate, 1.0);
    }

    #[test]
    fn peetre_bounds_on_box() {
        let g = GridSpec::new(1, 8.0, 64).unwrap();
        let b = WeightSpec::bracket_power(1, 1.0);
        assert!(audit_moderate(&b, &b, &g).unwrap().c_estimate <= 2f64.sqrt());
        let b2 = WeightSpec::bracket_power(1, 2.0);
        let s = audit_submultiplicative(&b2, &g).unwrap();
        assert!(s.submultiplicative.c_estimate <= 2.0);
        assert_eq!(s.dilation.c_estimate, 1.0);
    }

    #[test]
    fn bracket_is_not_one_moderate() {
        let b = WeightSpec::bracket_power(1, 1.0);
        let one = WeightSpec::trivial(1);
        let small = audit_moderate(&b, &one, &GridSpec::new(1, 4.0, 32).unwrap()).unwrap().c_estimate;
        let big = audit_moderate(&b, &one, &GridSpec::new(1, 16.0, 32).unwrap()).unwrap().c_estimate;
        assert!(small > 1.0 && big > small);
    }
}
