use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One nesting level: reduce `axes` with `L^p` (quadrature) or, for
/// `p = ∞`, with the lattice max.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Level {
    pub axes: Vec<usize>,
    pub exponent: f64,
}

impl Level {
    pub fn new(axes: Vec<usize>, exponent: f64) -> Self {
        Level { axes, exponent }
    }

    pub fn sup(axes: Vec<usize>) -> Self {
        Level { axes, exponent: f64::INFINITY }
    }
}

pub fn check_exponent(p: f64) -> Result<()> {
    if p >= 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("exponent must lie in [1, ∞], got {p}")))
    }
}

/// Exponent tuple with the axis groups it applies to, innermost first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentSpec {
    pub values: Vec<f64>,
    pub axis_partition: Vec<Vec<usize>>,
}

impl ExponentSpec {
    pub fn levels(&self) -> Result<Vec<Level>> {
        if self.values.is_empty() || self.values.len() > 4 {
            return Err(Error::invalid("between one and four exponents are supported"));
        }
        if self.values.len() != self.axis_partition.len() {
            return Err(Error::invalid("one axis group per exponent is required"));
        }
        Ok(self.values.iter().zip(&self.axis_partition).map(|(&p, a)| Level::new(a.clone(), p)).collect())
    }
}

/// Axis-aligned split of a phase-space array of dimension `2d`: position
/// axes `0..d` into `(V₁, V₂)`, frequency axes `d..2d` into `(V₁', V₂')`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubspacePartition {
    pub v1: Vec<usize>,
    pub v2: Vec<usize>,
    pub v1_dual: Vec<usize>,
    pub v2_dual: Vec<usize>,
}

impl SubspacePartition {
    /// First half of the position axes in `V₁`, the rest in `V₂`; the same
    /// split on the frequency side.
    pub fn standard(d: usize) -> Self {
        let k = d.div_ceil(2);
        SubspacePartition {
            v1: (0..k).collect(),
            v2: (k..d).collect(),
            v1_dual: (d..d + k).collect(),
            v2_dual: (d + k..2 * d).collect(),
        }
    }

    pub fn validate(&self, d: usize) -> Result<()> {
        let covers = |a: &[usize], b: &[usize], lo: usize| {
            let mut all: Vec<usize> = a.iter().chain(b).copied().collect();
            all.sort_unstable();
            all == (lo..lo + d).collect::<Vec<_>>()
        };
        if !covers(&self.v1, &self.v2, 0) {
            return Err(Error::invalid(format!("V1, V2 must partition the position axes 0..{d}")));
        }
        if !covers(&self.v1_dual, &self.v2_dual, d) {
            return Err(Error::invalid(format!("V1', V2' must partition the frequency axes {d}..{}", 2 * d)));
        }
        Ok(())
    }
}

/// Drop empty levels and fuse neighbours with the same exponent (the fused
/// reduction is the same functional, and fusing makes equal displays give
/// bit-identical results).
fn normalize(levels: &[Level]) -> Vec<Level> {
    let mut out: Vec<Level> = Vec::new();
    for l in levels.iter().filter(|l| !l.axes.is_empty()) {
        match out.last_mut() {
            Some(prev) if prev.exponent == l.exponent => prev.axes.extend(&l.axes),
            _ => out.push(l.clone()),
        }
    }
    for l in &mut out {
        l.axes.sort_unstable();
    }
    out
}

/// Nested mixed norm of a non-negative array with `N_a` points on axis `a`
/// (row-major) and quadrature weight `w_a` per axis. Levels run innermost
/// first; every axis must appear in exactly one level.
pub fn nested_norm(values: &[f64], shape: &[usize], weights: &[f64], levels: &[Level]) -> Result<f64> {
    let d = shape.len();
    if weights.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: weights.len() });
    }
    if values.len() != shape.iter().product::<usize>() {
        return Err(Error::DimensionMismatch { expected: shape.iter().product(), got: values.len() });
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("non-finite entry in norm reduction".into()));
    }
    let mut seen = vec![false; d];
    for l in levels {
        check_exponent(l.exponent)?;
        for &a in &l.axes {
            if a >= d || seen[a] {
                return Err(Error::invalid(format!("axis {a} is out of range or assigned twice")));
            }
            seen[a] = true;
        }
    }
    if let Some(a) = seen.iter().position(|s| !s) {
        return Err(Error::invalid(format!("axis {a} is not assigned to any level")));
    }

    let mut cur: Vec<f64> = values.to_vec();
    let mut axes: Vec<usize> = (0..d).collect();
    for level in normalize(levels) {
        let shape_now: Vec<usize> = axes.iter().map(|&a| shape[a]).collect();
        let keep: Vec<bool> = axes.iter().map(|a| !level.axes.contains(a)).collect();
        // output strides for kept axes, row-major over the kept subset
        let mut ostride = vec![0usize; axes.len()];
        let mut s = 1;
        for i in (0..axes.len()).rev() {
            if keep[i] {
                ostride[i] = s;
                s *= shape_now[i];
            }
        }
        let out_len = s;
        let w: f64 = level.axes.iter().map(|&a| weights[a]).product();
        let p = level.exponent;
        let mut out = vec![0.0f64; out_len];
        let mut idx = vec![0usize; axes.len()];
        let mut o = 0usize;
        for &v in &cur {
            let slot = &mut out[o];
            if p.is_infinite() {
                *slot = slot.max(v);
            } else if p == 1.0 {
                *slot += v;
            } else if p == 2.0 {
                *slot += v * v;
            } else {
                *slot += v.powf(p);
            }
            // odometer increment, last axis fastest
            let mut i = axes.len();
            while i > 0 {
                i -= 1;
                idx[i] += 1;
                o += ostride[i];
                if idx[i] < shape_now[i] {
                    break;
                }
                o -= ostride[i] * idx[i];
                idx[i] = 0;
            }
        }
        if !p.is_infinite() {
            for v in &mut out {
                *v = if p == 1.0 {
                    *v * w
                } else if p == 2.0 {
                    (*v * w).sqrt()
                } else {
                    (*v * w).powf(1.0 / p)
                };
            }
        }
        cur = out;
        axes = axes.into_iter().zip(keep).filter(|(_, k)| *k).map(|(a, _)| a).collect();
    }
    debug_assert_eq!(cur.len(), 1);
    Ok(cur[0])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_reductions() {
        let v = [1.0, 2.0, 3.0, 4.0];
        let l1 = nested_norm(&v, &[2, 2], &[0.5, 2.0], &[Level::new(vec![0, 1], 1.0)]).unwrap();
        assert_eq!(l1, 10.0);
        let sup = nested_norm(&v, &[2, 2], &[0.5, 2.0], &[Level::sup(vec![1]), Level::sup(vec![0])]).unwrap();
        assert_eq!(sup, 4.0);
        // inner L1 over axis 1 (weight 2): rows -> 6, 14; outer sup
        let mixed = nested_norm(&v, &[2, 2], &[0.5, 2.0], &[Level::new(vec![1], 1.0), Level::sup(vec![0])]).unwrap();
        assert_eq!(mixed, 14.0);
        // inner sup over axis 0: columns -> 3, 4; outer L2 with weight 2
        let m2 = nested_norm(&v, &[2, 2], &[0.5, 2.0], &[Level::sup(vec![0]), Level::new(vec![1], 2.0)]).unwrap();
        assert!((m2 - (2.0f64 * 25.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_partitions() {
        let v = [1.0; 4];
        assert!(nested_norm(&v, &[2, 2], &[1.0, 1.0], &[Level::new(vec![0], 1.0)]).is_err());
        assert!(nested_norm(&v, &[2, 2], &[1.0, 1.0], &[Level::new(vec![0, 0, 1], 1.0)]).is_err());
        assert!(nested_norm(&v, &[2, 2], &[1.0, 1.0], &[Level::new(vec![0, 1], 0.5)]).is_err());
        assert!(SubspacePartition { v1: vec![0], v2: vec![], v1_dual: vec![1], v2_dual: vec![1] }.validate(1).is_err());
        SubspacePartition::standard(3).validate(3).unwrap();
    }
}
