//! `t`-quantized pseudo-differential operators
//!
//! ```text
//! a_t(x, D) f(x) = (2π)^{-n} ∬ a((1-t)x + ty, ξ) f(y) e^{i<x-y, ξ>} dy dξ
//! ```
//!
//! and the exact multiplier that moves a symbol between quantizations.
//! Symbols live on `R^{2n}` with axes `(x, ξ)`; the `ξ` axes are sampled on
//! the spatial lattice of the same grid.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use super::fio::NYQUIST_TOLERANCE;
use super::matrix::OperatorMatrix;
use crate::error::{Error, Result};
use crate::grid::{forward_dft, inverse_dft, inverse_dft_axes, Domain, GridSpec, SampledFunction, TrigInterpolant};

fn check_symbol(a: &SampledFunction) -> Result<usize> {
    if !a.grid.dim.is_multiple_of(2) {
        return Err(Error::invalid("symbols need a grid of even dimension 2n"));
    }
    if a.domain != Domain::Space {
        return Err(Error::invalid("symbols are space-domain samples"));
    }
    Ok(a.grid.dim / 2)
}

fn check_t(t: f64) -> Result<()> {
    if !t.is_finite() {
        return Err(Error::invalid(format!("quantization parameter must be finite, got {t}")));
    }
    Ok(())
}

/// The mixing point `(1-t)x + t y` on the torus, taken along the centred
/// periodic difference: `x - t d` with `d ≡ x - y` reduced to `[-L, L)`.
/// Mixing along the raw difference would put the midpoint of two nodes near
/// opposite edges in the middle of the box instead of near the seam.
/// Returns the point and its lattice index, if it is a node.
fn mixed_point(g: &GridSpec, x: &[f64], y: &[f64], t: f64) -> (Vec<f64>, Option<usize>) {
    let (l, p) = (g.half_width, 2.0 * g.half_width);
    let z: Vec<f64> = x
        .iter()
        .zip(y)
        .map(|(x, y)| {
            let mut d = x - y;
            if d >= l {
                d -= p;
            } else if d < -l {
                d += p;
            }
            x - t * d
        })
        .collect();
    let idx: Option<Vec<usize>> = z.iter().map(|&c| g.lattice_index(c)).collect();
    let flat = idx.map(|i| g.ravel(&i));
    (z, flat)
}

/// Interpolant along the leading `n` axes when some mixed point is off the
/// lattice, after the Nyquist fitness gate.
fn interpolant_if_needed(f: &SampledFunction, n: usize, t: f64) -> Result<Option<TrigInterpolant>> {
    let g = f.grid.with_dim(n);
    let all_on = t == 0.0
        || t == 1.0
        || (0..g.len()).all(|i| {
            let x = g.point(i);
            (0..g.len()).all(|k| mixed_point(&g, &x, &g.point(k), t).1.is_some())
        });
    if all_on {
        return Ok(None);
    }
    let ip = TrigInterpolant::new(f, n)?;
    let r = ip.nyquist_ratio();
    if r > NYQUIST_TOLERANCE {
        return Err(Error::Fitness(format!("symbol not resolved for interpolation: Nyquist ratio {r:e}")));
    }
    Ok(Some(ip))
}

fn row_at(f: &SampledFunction, ip: &Option<TrigInterpolant>, z: &[f64], flat: Option<usize>, width: usize) -> Vec<Complex64> {
    match (flat, ip) {
        (Some(j), _) => f.values[j * width..(j + 1) * width].to_vec(),
        (None, Some(ip)) => ip.eval(z),
        (None, None) => unreachable!("interpolant is built whenever a point is off the lattice"),
    }
}

/// Direct quadrature of the quantization integral; works on any grid.
pub fn op_pseudo(a: &SampledFunction, t: f64) -> Result<OperatorMatrix> {
    let n = check_symbol(a)?;
    check_t(t)?;
    let g = a.grid.with_dim(n);
    let ip = interpolant_if_needed(a, n, t)?;
    let m = g.len();
    let pts: Vec<Vec<f64>> = (0..m).map(|k| g.point(k)).collect();
    let pref = (2.0 * PI).powf(-(n as f64)) * g.cell() * g.cell();
    OperatorMatrix::from_rows(g, g, |i| {
        (0..m)
            .map(|k| {
                let (z, flat) = mixed_point(&g, &pts[i], &pts[k], t);
                let row = row_at(a, &ip, &z, flat, m);
                let mut acc = Complex64::new(0.0, 0.0);
                for (v, th) in row.iter().zip(&pts) {
                    let ph: f64 = pts[i].iter().zip(&pts[k]).zip(th).map(|((x, y), th)| (x - y) * th).sum();
                    acc += v * Complex64::from_polar(1.0, ph);
                }
                acc * pref
            })
            .collect()
    })
}

/// Whether the spatial and frequency lattices coincide (`h = π/L`).
pub fn is_matched(g: &GridSpec) -> bool {
    (g.spacing() - g.freq_step()).abs() <= 1e-12 * g.spacing()
}

/// Kernel `K(x, y) = (2π)^{-n/2} (F₂^{-1} a)((1-t)x + ty, x - y)` on `R^{2n}`,
/// with the partial inverse transform in `ξ` done by FFT. This needs the
/// matched grid, where `ξ`-nodes are frequency nodes and `x - y` is again a
/// node (mod `2L`).
pub fn pseudo_kernel(a: &SampledFunction, t: f64) -> Result<SampledFunction> {
    let n = check_symbol(a)?;
    check_t(t)?;
    if !is_matched(&a.grid) {
        return Err(Error::GridMismatch("the FFT kernel route needs the matched grid h = π/L".into()));
    }
    let g = a.grid.with_dim(n);
    let m = g.len();
    let axes: Vec<usize> = (n..2 * n).collect();
    // G(z, w) = (F₂^{-1} a)(z, w) at lattice z and lattice w
    let gz = SampledFunction { grid: a.grid, values: inverse_dft_axes(a, &axes), domain: Domain::Space };
    let ip = interpolant_if_needed(&gz, n, t)?;
    let c = (2.0 * PI).powf(-(n as f64) / 2.0);
    let values: Vec<Complex64> = (0..m * m)
        .into_par_iter()
        .map(|flat| {
            let (i, k) = (flat / m, flat % m);
            let (x, y) = (g.unravel(i), g.unravel(k));
            let (z, zf) = mixed_point(&g, &g.point(i), &g.point(k), t);
            let w: Vec<usize> = x.iter().zip(&y).map(|(&xi, &yi)| g.wrap(xi + g.points / 2, -(yi as isize))).collect();
            let row = row_at(&gz, &ip, &z, zf, m);
            row[g.ravel(&w)] * c
        })
        .collect();
    Ok(SampledFunction { grid: a.grid, values, domain: Domain::Space })
}

/// `b = e^{i(s-t)<D_x, D_ξ>} a` with `D = -i∂`, so that `a_s(x, D) = b_t(x, D)`.
/// Applied as the Fourier multiplier `e^{i(s-t)<x*, ξ*>}` on the full
/// `2n`-dimensional transform.
pub fn quantization_transfer(a: &SampledFunction, s: f64, t: f64) -> Result<SampledFunction> {
    let n = check_symbol(a)?;
    check_t(s)?;
    check_t(t)?;
    if s == t {
        return Ok(a.clone());
    }
    let g = a.grid;
    let mut hat = forward_dft(a)?;
    let max = hat.max_abs();
    if max > 0.0 {
        let mut edge: f64 = 0.0;
        for (j, v) in hat.values.iter().enumerate() {
            if g.unravel(j).contains(&0) {
                edge = edge.max(v.norm());
            }
        }
        if edge / max > NYQUIST_TOLERANCE {
            return Err(Error::Fitness(format!("symbol spectrum reaches the Nyquist ring: ratio {:e}", edge / max)));
        }
    }
    for (j, v) in hat.values.iter_mut().enumerate() {
        let k = g.freq_point(j);
        let q: f64 = (0..n).map(|i| k[i] * k[n + i]).sum();
        *v *= Complex64::from_polar(1.0, (s - t) * q);
    }
    inverse_dft(&hat)
}
