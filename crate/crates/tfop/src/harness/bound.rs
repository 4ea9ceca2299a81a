use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::config::{ExperimentConfig, GridConfig, WeightsConfig};
use crate::error::{Error, Result};
use crate::grid::{inverse_dft, Domain, GridSpec, SampledFunction};
use crate::norms::{modulation_norm, modulation_norm_streaming};
use crate::operators::{nondegeneracy, op_fio, NondegeneracyVariant, OperatorMatrix, PhaseFamily, PhaseSpec};
use crate::schatten::{singular_values, weighted_gram};
use crate::stft::stft;
use crate::weights::WeightSpec;
use crate::window::{Normalization, WindowFamily, WindowSpec};

/// Number of random inputs behind the `p ≠ 2` lower bound.
pub const RANDOM_INPUTS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LhsKind {
    /// Largest singular value between the weighted `M²` spaces.
    WeightedSingularValue,
    /// `max ‖Tf‖/‖f‖` over seeded random band-limited inputs; a lower bound.
    RandomizedLowerBound,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundMetadata {
    pub grid: GridConfig,
    pub weights: WeightsConfig,
    pub seed: u64,
    pub p: f64,
    pub lhs_kind: LhsKind,
}

/// `ratio = lhs · d / (amp_norm · exp(phase_norm))`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub lhs: f64,
    pub d: f64,
    pub amp_norm: f64,
    pub phase_norm: f64,
    pub ratio: f64,
    pub metadata: BoundMetadata,
}

/// Unit-spread Gaussian analysis window, `L²`-normalized.
pub fn analysis_window(grid: GridSpec) -> Result<WindowSpec> {
    WindowSpec::new(WindowFamily::Gaussian { spread: 1.0 }, grid, Normalization::L2)
}

/// `Σ_{|α|=2} ‖∂^α φ‖_{M^{∞,1}_{(v)}}` over the distinct second derivatives,
/// each sampled on the amplitude grid. Quadratic phases have constant
/// second derivatives, whose norms are `|c|` times the norm of `1`.
pub fn phase_norm(phi: &PhaseSpec, grid: &GridSpec, chi: &WindowSpec, v: &WeightSpec) -> Result<f64> {
    let d = phi.dim();
    if grid.dim != d {
        return Err(Error::DimensionMismatch { expected: d, got: grid.dim });
    }
    let pairs: Vec<(usize, usize)> = (0..d).flat_map(|i| (i..d).map(move |j| (i, j))).collect();
    if !matches!(phi.family, PhaseFamily::Perturbed { .. }) {
        let h = phi.eval(&vec![0.0; d]).hessian;
        if pairs.iter().all(|&(i, j)| h[(i, j)] == 0.0) {
            return Ok(0.0);
        }
        let one = SampledFunction::from_real_fn(*grid, |_| 1.0);
        let unit = modulation_norm_streaming(&one, &chi.values, f64::INFINITY, 1.0, v)?;
        return Ok(pairs.iter().map(|&(i, j)| h[(i, j)].abs() * unit).sum());
    }
    let mut total = 0.0;
    for (i, j) in pairs {
        let mut e = vec![0.0; d];
        e[i] += 1.0;
        e[j] += 1.0;
        let f = SampledFunction::from_real_fn(*grid, |x| {
            if i == j {
                phi.hessian_form(x, &vec_unit(d, i))
            } else {
                // polarization: φ''(e_i, e_j) = (Q(e_i + e_j) - Q(e_i) - Q(e_j)) / 2
                (phi.hessian_form(x, &e) - phi.hessian_form(x, &vec_unit(d, i)) - phi.hessian_form(x, &vec_unit(d, j))) / 2.0
            }
        });
        total += modulation_norm_streaming(&f, &chi.values, f64::INFINITY, 1.0, v)?;
    }
    Ok(total)
}

fn vec_unit(d: usize, i: usize) -> Vec<f64> {
    let mut e = vec![0.0; d];
    e[i] = 1.0;
    e
}

/// Random trigonometric polynomial with frequencies in the central half of
/// the lattice.
pub fn band_limited(grid: GridSpec, rng: &mut ChaCha8Rng) -> Result<SampledFunction> {
    let n = grid.points;
    let values = (0..grid.len())
        .map(|k| {
            let centered = grid.unravel(k).iter().all(|&i| i >= n / 4 && i < 3 * n / 4);
            let (re, im): (f64, f64) = (rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
            if centered {
                Complex64::new(re, im)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect();
    inverse_dft(&SampledFunction::new(grid, values, Domain::Frequency)?)
}

fn modulation_p(f: &SampledFunction, chi: &WindowSpec, p: f64, w: &WeightSpec) -> Result<f64> {
    modulation_norm(&stft(f, chi)?, p, p, w)
}

/// `max ‖Tf‖_{M^p_{(ω₂)}} / ‖f‖_{M^p_{(ω₁)}}` over seeded random inputs.
pub fn randomized_lower_bound(
    t: &OperatorMatrix,
    chi: &WindowSpec,
    p: f64,
    w1: &WeightSpec,
    w2: &WeightSpec,
    seed: u64,
) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let inputs: Vec<SampledFunction> = (0..RANDOM_INPUTS).map(|_| band_limited(t.source, &mut rng)).collect::<Result<_>>()?;
    let ratios: Vec<f64> = inputs
        .par_iter()
        .map(|f| Ok(modulation_p(&t.apply(f)?, chi, p, w2)? / modulation_p(f, chi, p, w1)?))
        .collect::<Result<_>>()?;
    Ok(ratios.into_iter().fold(0.0, f64::max))
}

pub fn run_bound_experiment(cfg: &ExperimentConfig) -> Result<BoundReport> {
    cfg.validate()?;
    let phi = cfg.phase_spec();
    let grid = cfg.amplitude_grid()?;
    let d = nondegeneracy(&phi, &grid, NondegeneracyVariant::Full)?.require()?;
    let a = cfg.amplitude.sample(grid);
    bound_report(cfg, &phi, &a, d)
}

/// All report fields for a given amplitude; `d` is the nondegeneracy value.
pub fn bound_report(cfg: &ExperimentConfig, phi: &PhaseSpec, a: &SampledFunction, d: f64) -> Result<BoundReport> {
    let grid = a.grid;
    let t = op_fio(a, phi)?;
    let g1 = grid.with_dim(1);
    let chi1 = analysis_window(g1)?;
    let w = &cfg.weights;
    let p = cfg.exponents.p;
    let (lhs, lhs_kind) = if p == 2.0 {
        let gram1 = weighted_gram(&w.omega1, &chi1, &g1)?;
        let gram2 = weighted_gram(&w.omega2, &chi1, &g1)?;
        (singular_values(&t, Some(&gram1), Some(&gram2))?.largest(), LhsKind::WeightedSingularValue)
    } else {
        (randomized_lower_bound(&t, &chi1, p, &w.omega1, &w.omega2, cfg.seed)?, LhsKind::RandomizedLowerBound)
    };
    let chi3 = analysis_window(grid)?;
    let amp_norm = modulation_norm_streaming(a, &chi3.values, f64::INFINITY, 1.0, &w.omega)?;
    let phase_norm = phase_norm(phi, &grid, &chi3, &w.v)?;
    if amp_norm == 0.0 {
        return Err(Error::Numerical("amplitude has zero norm; the ratio is undefined".into()));
    }
    let ratio = lhs * d / (amp_norm * phase_norm.exp());
    for (name, v) in [("lhs", lhs), ("amp_norm", amp_norm), ("phase_norm", phase_norm), ("ratio", ratio)] {
        if !(v.is_finite() && v >= 0.0) {
            return Err(Error::Numerical(format!("bound report field {name} = {v}")));
        }
    }
    Ok(BoundReport {
        lhs,
        d,
        amp_norm,
        phase_norm,
        ratio,
        metadata: BoundMetadata { grid: cfg.grid, weights: w.clone(), seed: cfg.seed, p, lhs_kind },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::norms::AmplitudeLayout;

    #[test]
    fn bilinear_reference_has_unit_determinant_and_scales() {
        let cfg = ExperimentConfig::default();
        let r = run_bound_experiment(&cfg).unwrap();
        assert_eq!(r.d, 1.0);
        assert!(r.ratio > 0.0 && r.lhs > 0.0 && r.phase_norm > 0.0);
        let grid = cfg.amplitude_grid().unwrap();
        let a2 = cfg.amplitude.sample(grid).scale(Complex64::new(2.0, 0.0));
        let r2 = bound_report(&cfg, &cfg.phase_spec(), &a2, r.d).unwrap();
        assert!((r2.lhs - 2.0 * r.lhs).abs() < 1e-10 * r.lhs);
        assert!((r2.ratio - r.ratio).abs() < 1e-10 * r.ratio);
    }

    #[test]
    fn zero_phase_is_refused() {
        let cfg = ExperimentConfig { phase: PhaseSpec::zero(AmplitudeLayout::new(1, 1, 1)).family, ..Default::default() };
        assert!(matches!(run_bound_experiment(&cfg), Err(Error::DegeneratePhase(_))));
    }

    #[test]
    fn phase_norm_of_constant_hessians_matches_sampling() {
        let grid = GridSpec::new(3, 8.0, 8).unwrap();
        let chi = analysis_window(grid).unwrap();
        let v = WeightSpec::trivial(6);
        let lay = AmplitudeLayout::new(1, 1, 1);
        let phi = PhaseSpec::quadratic(lay, vec![vec![0.5, 0.0, 1.0], vec![0.0, 0.0, -1.0], vec![1.0, -1.0, 0.25]], vec![0.0; 3])
            .unwrap();
        let fast = phase_norm(&phi, &grid, &chi, &v).unwrap();
        // the same phase with a vanishing perturbation goes through sampling
        let PhaseFamily::Quadratic { matrix, linear } = phi.family.clone() else { unreachable!() };
        let slow_phi = PhaseSpec {
            family: PhaseFamily::Perturbed { matrix, linear, epsilon: 0.0, frequencies: vec![vec![1.0, 0.0, 0.0]] },
            layout: lay,
        };
        let slow = phase_norm(&slow_phi, &grid, &chi, &v).unwrap();
        assert!((fast - slow).abs() < 1e-12 * fast, "{fast} {slow}");
        assert_eq!(phase_norm(&PhaseSpec::zero(lay), &grid, &chi, &v).unwrap(), 0.0);
    }

    #[test]
    fn randomized_bound_is_seeded() {
        let g = GridSpec::new(1, 8.0, 16).unwrap();
        let chi = analysis_window(g).unwrap();
        let w = WeightSpec::trivial(2);
        let id = OperatorMatrix::identity(g);
        let a = randomized_lower_bound(&id, &chi, 1.0, &w, &w, 3).unwrap();
        let b = randomized_lower_bound(&id, &chi, 1.0, &w, &w, 3).unwrap();
        assert_eq!(a, b);
        assert!((a - 1.0).abs() < 1e-12);
    }
}
