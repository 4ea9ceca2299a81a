use serde::{Deserialize, Serialize};

use super::reduce::{check_exponent, nested_norm, ExponentSpec, Level, SubspacePartition};
use crate::error::{Error, Result};
use crate::grid::{forward_dft, Domain, SampledFunction};
use crate::stft::{stft_rows, window_translate, StftArray};
use crate::weights::WeightSpec;
use crate::window::{Normalization, WindowFamily, WindowSpec};

fn phase_space_weights(v: &StftArray) -> Vec<f64> {
    let n = v.grid.dim;
    (0..2 * n).map(|a| if a < n { v.grid.spacing() } else { v.grid.freq_step() }).collect()
}

/// `(∫(∫|V ω|^p dx)^{q/p} dξ)^{1/q}` with `∞ ↦ lattice max`.
pub fn modulation_norm(v: &StftArray, p: f64, q: f64, omega: &WeightSpec) -> Result<f64> {
    check_exponent(p)?;
    check_exponent(q)?;
    let n = v.grid.dim;
    let mags = v.weighted_magnitudes(omega)?;
    let shape = vec![v.grid.points; 2 * n];
    let levels = [Level::new((0..n).collect(), p), Level::new((n..2 * n).collect(), q)];
    nested_norm(&mags, &shape, &phase_space_weights(v), &levels)
}

/// [`modulation_norm`] computed row by row without storing the transform;
/// used for amplitudes whose phase-space array would not fit in memory.
pub fn modulation_norm_streaming(
    f: &SampledFunction,
    window: &SampledFunction,
    p: f64,
    q: f64,
    omega: &WeightSpec,
) -> Result<f64> {
    check_exponent(p)?;
    check_exponent(q)?;
    let g = f.grid;
    if omega.dim != 2 * g.dim {
        return Err(Error::DimensionMismatch { expected: 2 * g.dim, got: omega.dim });
    }
    let m = g.len();
    let freq_points: Vec<Vec<f64>> = (0..m).map(|k| g.freq_point(k)).collect();
    let trivial = omega.is_trivial();
    let mut inner = vec![0.0f64; m];
    let mut bad = false;
    stft_rows(f, window, |x, row| {
        let xp = g.point(x);
        let mut pt = xp.clone();
        for (k, val) in row.iter().enumerate() {
            let mut a = val.norm();
            if !trivial {
                pt.truncate(g.dim);
                pt.extend(&freq_points[k]);
                a *= omega.eval_unchecked(&pt);
            }
            if !a.is_finite() {
                bad = true;
            }
            if p.is_infinite() {
                inner[k] = inner[k].max(a);
            } else {
                inner[k] += a.powf(p);
            }
        }
    })?;
    if bad {
        return Err(Error::Numerical("non-finite short-time transform".into()));
    }
    if !p.is_infinite() {
        for v in &mut inner {
            *v = (*v * g.cell()).powf(1.0 / p);
        }
    }
    nested_norm(&inner, &vec![g.points; g.dim], &vec![g.freq_step(); g.dim], &[Level::new((0..g.dim).collect(), q)])
}

/// Four-level mixed norm `L^s(V₂'; L^r(V₁'; L^q(V₂; L^p(V₁))))` of `V ω`.
pub fn coorbit_norm(v: &StftArray, part: &SubspacePartition, exps: &[f64; 4], omega: &WeightSpec) -> Result<f64> {
    let n = v.grid.dim;
    part.validate(n)?;
    let spec = ExponentSpec {
        values: exps.to_vec(),
        axis_partition: vec![part.v1.clone(), part.v2.clone(), part.v1_dual.clone(), part.v2_dual.clone()],
    };
    let mags = v.weighted_magnitudes(omega)?;
    nested_norm(&mags, &vec![v.grid.points; 2 * n], &phase_space_weights(v), &spec.levels()?)
}

/// Patch norm: `f_α = f χ(· - x_α)` over the lattice `x_α ∈ -L + step·Z^n`,
/// `F(ξ) = (Σ_α |f̂_α(ξ) ω(x_α, ξ)|^p)^{1/p}`, result `‖F‖_{L^q}`.
///
/// The translates must form a partition of unity on the torus (checked to
/// `1e-10`); `step` must be a whole number of grid cells dividing the box.
pub fn patch_norm(f: &SampledFunction, step: f64, chi: &WindowSpec, p: f64, q: f64, omega: &WeightSpec) -> Result<f64> {
    check_exponent(p)?;
    check_exponent(q)?;
    let g = f.grid;
    if chi.grid() != g {
        return Err(Error::GridMismatch("partition window must live on the signal grid".into()));
    }
    if omega.dim != 2 * g.dim {
        return Err(Error::DimensionMismatch { expected: 2 * g.dim, got: omega.dim });
    }
    let cells = step / g.spacing();
    let stride = cells.round() as usize;
    if stride == 0 || (cells - stride as f64).abs() > 1e-9 || !g.points.is_multiple_of(stride) {
        return Err(Error::invalid(format!("patch step {step} must be a whole number of cells dividing the box")));
    }
    let per_axis = g.points / stride;
    let count = per_axis.pow(g.dim as u32);
    let centers: Vec<usize> = (0..count)
        .map(|c| {
            let mut idx = vec![0usize; g.dim];
            let mut r = c;
            for a in (0..g.dim).rev() {
                idx[a] = (r % per_axis) * stride;
                r /= per_axis;
            }
            g.ravel(&idx)
        })
        .collect();
    let translates: Vec<SampledFunction> = centers.iter().map(|&c| window_translate(&chi.values, c)).collect();
    let mut sum = vec![0.0f64; g.len()];
    for t in &translates {
        for (s, v) in sum.iter_mut().zip(&t.values) {
            *s += v.re;
        }
    }
    let dev = sum.iter().fold(0.0f64, |m, s| m.max((s - 1.0).abs()));
    if dev > 1e-10 {
        return Err(Error::invalid(format!("window translates are not a partition of unity (deviation {dev:e})")));
    }
    let m = g.len();
    let mut acc = vec![0.0f64; m];
    for (t, &c) in translates.iter().zip(&centers) {
        let patch = SampledFunction {
            grid: g,
            values: f.values.iter().zip(&t.values).map(|(a, b)| a * b).collect(),
            domain: Domain::Space,
        };
        let hat = forward_dft(&patch)?;
        let xa = g.point(c);
        for (k, v) in hat.values.iter().enumerate() {
            let mut pt = xa.clone();
            pt.extend(g.freq_point(k));
            let a = v.norm() * omega.eval_unchecked(&pt);
            if p.is_infinite() {
                acc[k] = acc[k].max(a);
            } else {
                acc[k] += a.powf(p);
            }
        }
    }
    if !p.is_infinite() {
        for v in &mut acc {
            *v = v.powf(1.0 / p);
        }
    }
    nested_norm(&acc, &vec![g.points; g.dim], &vec![g.freq_step(); g.dim], &[Level::new((0..g.dim).collect(), q)])
}

/// A norm that can be evaluated on any sampled function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NormSpec {
    Modulation { p: f64, q: f64, weight: WeightSpec, window: WindowFamily },
    Patch { p: f64, q: f64, weight: WeightSpec, step: f64, radius: f64 },
}

impl NormSpec {
    pub fn eval(&self, f: &SampledFunction) -> Result<f64> {
        match self {
            NormSpec::Modulation { p, q, weight, window } => {
                let chi = WindowSpec::new(*window, f.grid, Normalization::L2)?;
                modulation_norm_streaming(f, &chi.values, *p, *q, weight)
            }
            NormSpec::Patch { p, q, weight, step, radius } => {
                let chi = WindowSpec::new(WindowFamily::Partition { radius: *radius, step: *step }, f.grid, Normalization::None)?;
                patch_norm(f, *step, &chi, *p, *q, weight)
            }
        }
    }
}

/// Ratios `‖f‖₂ / ‖f‖₁` for each family member together with their maximum.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmbeddingReport {
    pub ratios: Vec<f64>,
    pub max_ratio: f64,
}

/// Largest `norm₂(f)/norm₁(f)` over a family. A diagnostic, not a proof.
pub fn embedding_ratio(family: &[SampledFunction], first: &NormSpec, second: &NormSpec) -> Result<EmbeddingReport> {
    let mut ratios = Vec::with_capacity(family.len());
    for f in family {
        let a = first.eval(f)?;
        let b = if first == second { a } else { second.eval(f)? };
        if a == 0.0 {
            return Err(Error::invalid("zero denominator: family contains a function of zero norm"));
        }
        ratios.push(b / a);
    }
    let max_ratio = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(EmbeddingReport { ratios, max_ratio })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use crate::stft::stft;

    fn setup() -> (GridSpec, WindowSpec, SampledFunction) {
        let g = GridSpec::new(1, 8.0, 64).unwrap();
        let chi = WindowSpec::gaussian(g).unwrap();
        let f = SampledFunction::from_real_fn(g, |x| (-(x[0] - 0.5).powi(2) / 1.5).exp());
        (g, chi, f)
    }

    #[test]
    fn l2_modulation_norm_is_moyal() {
        let (_, chi, f) = setup();
        let v = stft(&f, &chi).unwrap();
        let m = modulation_norm(&v, 2.0, 2.0, &WeightSpec::trivial(2)).unwrap();
        let expect = chi.norm_l2() * f.norm_l2();
        assert!((m - expect).abs() / expect < 1e-8);
    }

    #[test]
    fn sup_norm_and_weight_monotonicity() {
        let (_, chi, f) = setup();
        let v = stft(&f, &chi).unwrap();
        let inf = modulation_norm(&v, f64::INFINITY, f64::INFINITY, &WeightSpec::trivial(2)).unwrap();
        let max = v.values.iter().fold(0.0f64, |m, z| m.max(z.norm()));
        assert_eq!(inf, max);
        let plain = modulation_norm(&v, 1.0, 2.0, &WeightSpec::trivial(2)).unwrap();
        let weighted = modulation_norm(&v, 1.0, 2.0, &WeightSpec::frequency_power(1, 1.5)).unwrap();
        assert!(weighted >= plain);
    }

    #[test]
    fn streaming_matches_stored() {
        let (_, chi, f) = setup();
        let v = stft(&f, &chi).unwrap();
        let w = WeightSpec::frequency_power(1, 1.0);
        for (p, q) in [(1.0, 1.0), (2.0, 3.0), (f64::INFINITY, 1.0)] {
            let a = modulation_norm(&v, p, q, &w).unwrap();
            let b = modulation_norm_streaming(&f, &chi.values, p, q, &w).unwrap();
            assert!((a - b).abs() <= 1e-12 * a);
        }
    }

    #[test]
    fn coorbit_collapses_to_modulation() {
        let (_, chi, f) = setup();
        let v = stft(&f, &chi).unwrap();
        let part = SubspacePartition::standard(1);
        let w = WeightSpec::trivial(2);
        let c = coorbit_norm(&v, &part, &[1.5, 1.5, 3.0, 3.0], &w).unwrap();
        let m = modulation_norm(&v, 1.5, 3.0, &w).unwrap();
        assert_eq!(c, m);
    }

    #[test]
    fn patch_norm_zero_and_bad_step() {
        let g = GridSpec::new(1, 8.0, 64).unwrap();
        let chi = WindowSpec::new(WindowFamily::Partition { radius: 1.5, step: 2.0 }, g, Normalization::None).unwrap();
        let w = WeightSpec::trivial(2);
        assert_eq!(patch_norm(&SampledFunction::zeros(g), 2.0, &chi, 2.0, 2.0, &w).unwrap(), 0.0);
        assert!(patch_norm(&SampledFunction::zeros(g), 0.3, &chi, 2.0, 2.0, &w).is_err());
    }
}
