//! Fourier integral operators by direct quadrature:
//!
//! ```text
//! Tf(x) = (2π)^{-(n_x+n_y)/2} ∬ a(x, y, ζ) f(y) e^{iφ(x, y, ζ)} dy dζ
//! ```

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use super::matrix::OperatorMatrix;
use super::phase::PhaseSpec;
use crate::error::{Error, Result};
use crate::grid::{Domain, SampledFunction, TrigInterpolant};

/// Amplitudes must fall below this (relative) on the `ζ = -L` faces.
pub const AMPLITUDE_EDGE_TOLERANCE: f64 = 1e-10;
/// Largest tolerated Nyquist-ring share before off-lattice evaluation is refused.
pub const NYQUIST_TOLERANCE: f64 = 1e-8;

/// Largest modulus where any of `axes` sits on its `-L` face, relative to the max.
pub fn axes_edge_ratio(f: &SampledFunction, axes: &[usize]) -> f64 {
    let max = f.max_abs();
    if max == 0.0 {
        return 0.0;
    }
    let g = f.grid;
    let mut edge: f64 = 0.0;
    for (j, v) in f.values.iter().enumerate() {
        let idx = g.unravel(j);
        if axes.iter().any(|&a| idx[a] == 0) {
            edge = edge.max(v.norm());
        }
    }
    edge / max
}

fn check_amplitude(a: &SampledFunction, phi: &PhaseSpec) -> Result<()> {
    phi.validate()?;
    if a.grid.dim != phi.dim() {
        return Err(Error::DimensionMismatch { expected: phi.dim(), got: a.grid.dim });
    }
    if a.domain != Domain::Space {
        return Err(Error::invalid("amplitudes are space-domain samples"));
    }
    Ok(())
}

/// The integral over `ζ` only needs decay in `ζ`; amplitudes constant in
/// `x` or `y` are fine because those variables are not integrated here.
fn check_zeta_decay(a: &SampledFunction, phi: &PhaseSpec) -> Result<()> {
    let r = axes_edge_ratio(a, &phi.layout.zeta());
    if r > AMPLITUDE_EDGE_TOLERANCE {
        return Err(Error::Fitness(format!("amplitude does not decay in ζ: edge ratio {r:e}")));
    }
    Ok(())
}

fn fio_rows(a: &SampledFunction, phi: &PhaseSpec) -> Result<OperatorMatrix> {
    let lay = phi.layout;
    let g = a.grid;
    let source = g.with_dim(lay.n_y);
    let target = g.with_dim(lay.n_x);
    let zeta = g.with_dim(lay.m);
    let (ny, nz) = (source.len(), zeta.len());
    let pref = (2.0 * PI).powf(-((lay.n_x + lay.n_y) as f64) / 2.0) * zeta.cell() * source.cell();
    let ys: Vec<Vec<f64>> = (0..ny).map(|k| source.point(k)).collect();
    let zs: Vec<Vec<f64>> = (0..nz).map(|k| zeta.point(k)).collect();
    OperatorMatrix::from_rows(source, target, |i| {
        let mut pt = target.point(i);
        let base = pt.len();
        (0..ny)
            .map(|k| {
                let mut acc = Complex64::new(0.0, 0.0);
                for (z, zc) in zs.iter().enumerate() {
                    pt.truncate(base);
                    pt.extend(&ys[k]);
                    pt.extend(zc);
                    acc += a.values[(i * ny + k) * nz + z] * Complex64::from_polar(1.0, phi.value(&pt));
                }
                acc * pref
            })
            .collect()
    })
}

/// Matrix of the operator: entries
/// `(2π)^{-(n_x+n_y)/2} h^m Σ_ζ a(x_j, y_k, ζ) e^{iφ(x_j, y_k, ζ)} · h^{n_y}`.
pub fn op_fio(a: &SampledFunction, phi: &PhaseSpec) -> Result<OperatorMatrix> {
    check_amplitude(a, phi)?;
    check_zeta_decay(a, phi)?;
    fio_rows(a, phi)
}

/// [`op_fio`] without the decay gate, for amplitudes that are genuinely
/// periodic on the box (e.g. `a ≡ 1`, which gives the identity on the
/// matched grid).
pub fn op_fio_torus(a: &SampledFunction, phi: &PhaseSpec) -> Result<OperatorMatrix> {
    check_amplitude(a, phi)?;
    fio_rows(a, phi)
}

/// Distribution kernel `K(x, y) = (2π)^{-(n_x+n_y)/2} ∫ a e^{iφ} dζ` on the
/// `(n_x + n_y)`-dimensional grid.
pub fn fio_kernel(a: &SampledFunction, phi: &PhaseSpec) -> Result<SampledFunction> {
    check_amplitude(a, phi)?;
    check_zeta_decay(a, phi)?;
    let lay = phi.layout;
    let g = a.grid;
    let kg = g.with_dim(lay.n_x + lay.n_y);
    let nz = g.with_dim(lay.m).len();
    let pref = (2.0 * PI).powf(-(kg.dim as f64) / 2.0) * g.with_dim(lay.m).cell();
    let values: Vec<Complex64> = (0..kg.len())
        .into_par_iter()
        .map(|xy| {
            (0..nz)
                .map(|z| {
                    let flat = xy * nz + z;
                    a.values[flat] * Complex64::from_polar(1.0, phi.value(&g.point(flat)))
                })
                .sum::<Complex64>()
                * pref
        })
        .collect();
    Ok(SampledFunction { grid: kg, values, domain: Domain::Space })
}

/// Tolerance on `t₁² + t₂² = 1`.
pub const ROTATION_TOLERANCE: f64 = 1e-12;

/// Operator with the amplitude frozen along a rotated direction:
///
/// ```text
/// Tf(x) = (2π)^{-n} ∬ a(t₁x + t₂y, ζ) f(y) e^{iφ(t₁x + t₂y, -t₂x + t₁y, ζ)} dy dζ
/// ```
///
/// `a` lives on `R^{2n}` (`(x, ζ)`), `φ` on `R^{3n}`. Off-lattice rotated
/// points are evaluated by trigonometric interpolation in `x`.
pub fn op_fio_rotated(a: &SampledFunction, phi: &PhaseSpec, t1: f64, t2: f64) -> Result<OperatorMatrix> {
    phi.validate()?;
    let lay = phi.layout;
    if lay.n_x != lay.n_y || lay.n_x != lay.m {
        return Err(Error::invalid("rotated operators need n_x = n_y = m"));
    }
    let n = lay.m;
    if (t1 * t1 + t2 * t2 - 1.0).abs() > ROTATION_TOLERANCE || !t1.is_finite() || !t2.is_finite() {
        return Err(Error::invalid(format!("rotation needs t₁² + t₂² = 1, got {t1}² + {t2}²")));
    }
    if a.grid.dim != 2 * n {
        return Err(Error::DimensionMismatch { expected: 2 * n, got: a.grid.dim });
    }
    let zeta_axes: Vec<usize> = (n..2 * n).collect();
    let r = axes_edge_ratio(a, &zeta_axes);
    if r > AMPLITUDE_EDGE_TOLERANCE {
        return Err(Error::Fitness(format!("amplitude does not decay in ζ: edge ratio {r:e}")));
    }
    let g = a.grid.with_dim(n);
    let nz = g.len();
    let pts: Vec<Vec<f64>> = (0..nz).map(|k| g.point(k)).collect();
    let rotated = |i: usize, k: usize| -> (Vec<f64>, Vec<f64>) {
        let (x, y) = (&pts[i], &pts[k]);
        let u: Vec<f64> = x.iter().zip(y).map(|(x, y)| t1 * x + t2 * y).collect();
        let v: Vec<f64> = x.iter().zip(y).map(|(x, y)| -t2 * x + t1 * y).collect();
        (u, v)
    };
    let on_lattice = |u: &[f64]| -> Option<usize> {
        let idx: Option<Vec<usize>> = u.iter().map(|&c| if c.abs() < g.half_width { g.lattice_index(c) } else { None }).collect();
        idx.map(|i| g.ravel(&i))
    };
    let needs_interp = (0..nz).any(|i| (0..nz).any(|k| on_lattice(&rotated(i, k).0).is_none()));
    let interp = if needs_interp {
        let ip = TrigInterpolant::new(a, n)?;
        let ratio = ip.nyquist_ratio();
        if ratio > NYQUIST_TOLERANCE {
            return Err(Error::Fitness(format!("amplitude not resolved for interpolation: Nyquist ratio {ratio:e}")));
        }
        Some(ip)
    } else {
        None
    };
    let pref = (2.0 * PI).powf(-(n as f64)) * g.cell() * g.cell();
    OperatorMatrix::from_rows(g, g, |i| {
        (0..nz)
            .map(|k| {
                let (u, v) = rotated(i, k);
                let row: Vec<Complex64> = match on_lattice(&u) {
                    Some(j) => a.values[j * nz..(j + 1) * nz].to_vec(),
                    None => interp.as_ref().map(|ip| ip.eval(&u)).unwrap_or_default(),
                };
                let mut pt = [u.clone(), v.clone(), vec![0.0; n]].concat();
                row.iter()
                    .zip(&pts)
                    .map(|(av, z)| {
                        pt[2 * n..].copy_from_slice(z);
                        av * Complex64::from_polar(1.0, phi.value(&pt))
                    })
                    .sum::<Complex64>()
                    * pref
            })
            .collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use crate::norms::AmplitudeLayout;
    use crate::operators::apply_kernel;

    fn gaussian_amplitude(g: GridSpec) -> SampledFunction {
        SampledFunction::from_fn(g, |x| {
            Complex64::from_polar(
                (-(x[0] - 0.3).powi(2) / 2.0 - (x[1] + 0.2).powi(2) / 3.0 - x[2].powi(2) / 1.5).exp(),
                0.3 * x[1],
            )
        })
    }

    #[test]
    fn matrix_and_kernel_agree() {
        let g = GridSpec::new(3, 8.0, 24).unwrap();
        let phi = PhaseSpec::bilinear(1);
        let a = gaussian_amplitude(g);
        let m = op_fio(&a, &phi).unwrap();
        let k = fio_kernel(&a, &phi).unwrap();
        let mk = OperatorMatrix::from_kernel(&k, 1).unwrap();
        assert!(m.max_entry_diff(&mk).unwrap() < 1e-10);
        let f = SampledFunction::from_real_fn(g.with_dim(1), |x| (-(x[0] - 1.0).powi(2)).exp());
        let a1 = m.apply(&f).unwrap();
        let a2 = apply_kernel(&k, &f).unwrap();
        for (u, v) in a1.values.iter().zip(&a2.values) {
            assert!((u - v).norm() < 1e-10);
        }
    }

    #[test]
    fn zero_amplitude_and_fitness() {
        let g = GridSpec::new(3, 4.0, 8).unwrap();
        let phi = PhaseSpec::bilinear(1);
        assert_eq!(op_fio(&SampledFunction::zeros(g), &phi).unwrap().max_abs(), 0.0);
        let flat = SampledFunction::from_real_fn(g, |_| 1.0);
        assert!(matches!(op_fio(&flat, &phi), Err(Error::Fitness(_))));
        assert!(op_fio_torus(&flat, &phi).is_ok());
        let wrong = SampledFunction::zeros(GridSpec::new(2, 4.0, 8).unwrap());
        assert!(op_fio(&wrong, &phi).is_err());
    }

    #[test]
    fn unit_amplitude_is_the_identity_on_the_matched_grid() {
        let g = GridSpec::matched(3, 16).unwrap();
        let one = SampledFunction::from_real_fn(g, |_| 1.0);
        let m = op_fio_torus(&one, &PhaseSpec::bilinear(1)).unwrap();
        assert!(m.max_entry_diff(&OperatorMatrix::identity(g.with_dim(1))).unwrap() < 1e-12);
    }

    fn rotated_amplitude(u: f64, z: f64) -> Complex64 {
        Complex64::from_polar((-(u - 0.2).powi(2) / 2.0 - z * z / 2.0).exp(), 0.25 * u)
    }

    #[test]
    fn rotation_by_identity_is_plain_fio() {
        let g = GridSpec::new(2, 8.0, 40).unwrap();
        let a = SampledFunction::from_fn(g, |x| rotated_amplitude(x[0], x[1]));
        let phi = PhaseSpec::bilinear(1);
        let r = op_fio_rotated(&a, &phi, 1.0, 0.0).unwrap();
        let a3 = SampledFunction::from_fn(g.with_dim(3), |x| rotated_amplitude(x[0], x[2]));
        let m = op_fio(&a3, &phi).unwrap();
        assert!(r.max_entry_diff(&m).unwrap() < 1e-10);
    }

    #[test]
    fn rotated_matches_closed_form_quadrature() {
        let g = GridSpec::new(2, 8.0, 40).unwrap();
        let a = SampledFunction::from_fn(g, |x| rotated_amplitude(x[0], x[1]));
        let lay = AmplitudeLayout::new(1, 1, 1);
        let a_mat = vec![vec![0.1, 0.0, 1.0], vec![0.0, -0.2, -1.0], vec![1.0, -1.0, 0.0]];
        let phi = PhaseSpec::quadratic(lay, a_mat, vec![0.0; 3]).unwrap();
        let (t1, t2) = (0.6, 0.8);
        let r = op_fio_rotated(&a, &phi, t1, t2).unwrap();
        // change of variables: direct ζ-quadrature of the closed-form amplitude
        // at the rotated points
        let g1 = g.with_dim(1);
        let h = g1.spacing();
        let mut worst: f64 = 0.0;
        for i in 0..g1.points {
            for k in 0..g1.points {
                let (x, y) = (g1.coord(i), g1.coord(k));
                let (u, v) = (t1 * x + t2 * y, -t2 * x + t1 * y);
                let mut acc = Complex64::new(0.0, 0.0);
                for z in 0..g1.points {
                    let zc = g1.coord(z);
                    acc += rotated_amplitude(u, zc) * Complex64::from_polar(1.0, phi.value(&[u, v, zc]));
                }
                let expect = acc * h * h / (2.0 * PI);
                worst = worst.max((expect - r.entries[(i, k)]).norm());
            }
        }
        assert!(worst < 1e-6, "{worst:e}");
        assert!(op_fio_rotated(&a, &phi, 1.0, 1.0).is_err());
    }
}
