//! The verification suite: every exactly-testable identity, with the
//! tolerance each module promises. Checks are grouped so callers can run
//! one family at a time.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::bound::{band_limited, bound_report, run_bound_experiment};
use super::calibration::{drift, BOUND_RATIO_REFERENCE, CALIBRATION_DRIFT, KERNEL_SYMBOL_RATIO_REFERENCE};
use super::config::ExperimentConfig;
use super::report::CheckRecord;
use crate::error::Result;
use crate::grid::{dft_at, forward_dft, inverse_dft, GridSpec, SampledFunction};
use crate::norms::{modulation_norm, AmplitudeLayout};
use crate::operators::{
    direct_pairing, gaussian_identity_check, h_convolution_check, kernel_stft_identity, kernel_symbol_norm_ratio, nondegeneracy,
    op_fio, op_fio_torus, op_pseudo, quantization_transfer, stft_reformulation_pair, symbol_kernel_stft_check,
    NondegeneracyVariant, PhaseSpec, ReformulationWindows,
};
use crate::schatten::{
    hs_kernel_identity, interpolation_audit, matrix_singular_values, operator_from_matrix, random_matrix, schatten_norm,
    singular_values,
};
use crate::stft::{conjugation_check, covariance_check, stft, tensor_lift_check};
use crate::weights::WeightSpec;
use crate::window::{Normalization, WindowFamily, WindowSpec};

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn gaussian_1d(g: GridSpec, center: f64, spread: f64, freq: f64) -> SampledFunction {
    SampledFunction::from_fn(g, |x| {
        Complex64::from_polar((-(x[0] - center).powi(2) / (2.0 * spread * spread)).exp(), freq * x[0])
    })
}

/// Ten Gaussians with varied centre, spread and modulation.
pub fn gaussian_family(g: GridSpec) -> Vec<SampledFunction> {
    (0..10)
        .map(|k| {
            let k = k as f64;
            gaussian_1d(g, -1.5 + 0.35 * k, 0.6 + 0.09 * k, -2.0 + 0.45 * k)
        })
        .collect()
}

fn rel_max_diff(a: &SampledFunction, b: &SampledFunction) -> Result<f64> {
    Ok(a.axpby(c(1.0), b, c(-1.0))?.max_abs() / b.max_abs())
}

/// DFT round trip, Parseval and agreement with the direct sum.
pub fn transform_checks() -> Result<Vec<CheckRecord>> {
    let g = GridSpec::new(1, 8.0, 64)?;
    let f = SampledFunction::from_fn(g, |x| {
        Complex64::from_polar((-(x[0] - 0.5).powi(2) / 2.0).exp(), 0.7 * x[0]) + 0.3 * (-(x[0] + 1.0).powi(2)).exp()
    });
    let hat = forward_dft(&f)?;
    let back = inverse_dft(&hat)?;
    let direct = (0..g.points).step_by(7).map(|k| (hat.values[k] - dft_at(&f, &g.freq_point(k))).norm()).fold(0.0, f64::max)
        / hat.max_abs();
    Ok(vec![
        CheckRecord::below("dft round trip", "inverse transform undoes the forward transform", rel_max_diff(&back, &f)?, 1e-12),
        CheckRecord::below(
            "parseval",
            "transform is unitary on the lattice",
            (hat.norm_l2() - f.norm_l2()).abs() / f.norm_l2(),
            1e-12,
        ),
        CheckRecord::below("fft vs direct sum", "fast and direct transforms agree", direct, 1e-12),
    ])
}

/// Moyal identity, the unweighted `M²` norm, covariance, conjugation and
/// tensor lift.
pub fn isometry_checks() -> Result<Vec<CheckRecord>> {
    let g = GridSpec::new(1, 8.0, 64)?;
    let chi = WindowSpec::new(WindowFamily::Gaussian { spread: 1.0 }, g, Normalization::L2)?;
    let cell = g.spacing() * g.freq_step();
    let (mut moyal, mut m2): (f64, f64) = (0.0, 0.0);
    for f in gaussian_family(g) {
        let v = stft(&f, &chi)?;
        let expect = chi.norm_l2() * f.norm_l2();
        let direct = (v.values.iter().map(|z| z.norm_sqr()).sum::<f64>() * cell).sqrt();
        moyal = moyal.max((direct - expect).abs() / expect);
        m2 = m2.max((modulation_norm(&v, 2.0, 2.0, &WeightSpec::trivial(2))? - expect).abs() / expect);
    }
    let f = gaussian_1d(g, 0.4, 0.9, 1.1);
    let scale = f.max_abs();
    let cov = covariance_check(&f, &chi, &[4.0 * g.spacing()], &[-3.0 * g.freq_step()])?;
    let conj = conjugation_check(&f, &chi)?;
    let small = GridSpec::new(1, 8.0, 16)?;
    let chi_s = WindowSpec::new(WindowFamily::Gaussian { spread: 1.0 }, small, Normalization::L2)?;
    let chi1 = WindowSpec::new(WindowFamily::Gaussian { spread: 0.8 }, small, Normalization::L2)?;
    let lift = tensor_lift_check(&gaussian_1d(small, 0.3, 1.0, 0.5), &chi_s, &chi1, 1.0)?;
    Ok(vec![
        CheckRecord::below("moyal", "short-time transform is an isometry up to the window norm", moyal, 1e-8),
        CheckRecord::below("m2 norm", "unweighted modulation norm with p = q = 2 equals the L2 norm", m2, 1e-8),
        CheckRecord::below("covariance", "translation and modulation move the transform", cov / scale, 1e-12),
        CheckRecord::below("conjugation", "conjugation reflects frequency", conj / scale, 1e-12),
        CheckRecord::below("tensor lift", "lifting to R^2n factorizes the transform", lift, 1e-12),
    ])
}

/// Band-limited symbol on the matched grid used by the quantization checks.
pub fn quantization_symbol(g: GridSpec) -> SampledFunction {
    SampledFunction::from_fn(g, |x| {
        Complex64::from_polar((-(x[0] - 0.4).powi(2) / 2.0 - (x[1] + 0.3).powi(2) / 2.4).exp(), 0.5 * x[1])
    })
}

/// Exact change of quantization.
pub fn quantization_checks() -> Result<Vec<CheckRecord>> {
    let g = GridSpec::matched(2, 64)?;
    let a = quantization_symbol(g);
    let same = quantization_transfer(&a, 0.3, 0.3)?;
    let mut records = vec![CheckRecord::holds("transfer s = t", "equal quantizations need no change", same == a)];
    let mut worst: f64 = 0.0;
    let mut trip: f64 = 0.0;
    for (s, t) in [(0.0, 1.0), (0.0, 0.5), (1.0, 0.5)] {
        let b = quantization_transfer(&a, s, t)?;
        worst = worst.max(op_pseudo(&a, s)?.max_entry_diff(&op_pseudo(&b, t)?)?);
        let back = quantization_transfer(&b, t, s)?;
        trip = trip.max(back.axpby(c(1.0), &a, c(-1.0))?.max_abs());
    }
    records.push(CheckRecord::below("transfer operators", "transferred symbol quantizes to the same operator", worst, 1e-6));
    records.push(CheckRecord::below("transfer round trip", "transfer there and back is the identity", trip, 1e-10));
    Ok(records)
}

/// Bilinear phase and `y`-independent amplitude give a pseudo-differential
/// operator; unit amplitude gives the identity.
pub fn reduction_checks(seed: u64) -> Result<Vec<CheckRecord>> {
    let g = GridSpec::new(3, 8.0, 32)?;
    let b = |x: f64, z: f64| Complex64::from_polar((-(x - 0.3).powi(2) / 2.0 - z * z / 2.0).exp(), 0.4 * x + 0.2 * z);
    let a3 = SampledFunction::from_fn(g, |x| b(x[0], x[2]));
    let a2 = SampledFunction::from_fn(g.with_dim(2), |x| b(x[0], x[1]));
    let phi = PhaseSpec::bilinear(1);
    let diff = op_fio(&a3, &phi)?.max_entry_diff(&op_pseudo(&a2, 0.0)?)?;
    let m = GridSpec::matched(3, 32)?;
    let id = op_fio_torus(&SampledFunction::from_real_fn(m, |_| 1.0), &phi)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..5 {
        let f = band_limited(m.with_dim(1), &mut rng)?;
        let tf = id.apply(&f)?;
        worst = worst.max(tf.axpby(c(1.0), &f, c(-1.0))?.norm_l2() / f.norm_l2());
    }
    Ok(vec![
        CheckRecord::below("fio to pseudo-differential", "bilinear phase reduces to Kohn-Nirenberg quantization", diff, 1e-8),
        CheckRecord::below("unit amplitude identity", "unit amplitude with bilinear phase is the identity", worst, 1e-6),
    ])
}

/// Fixture for the phase-space reformulation on `L = N/2` (`h = 1`).
pub fn reformulation_fixture(n: usize) -> Result<(SampledFunction, SampledFunction, SampledFunction, ReformulationWindows)> {
    let grid = GridSpec::new(3, n as f64 / 2.0, n)?;
    let g1 = grid.with_dim(1);
    let gauss = |u: f64, s: f64, c: f64| (-(u - c).powi(2) / (2.0 * s * s)).exp();
    let a = SampledFunction::from_fn(grid, |x| {
        Complex64::from_polar(gauss(x[0], 0.55, 0.3) * gauss(x[1], 0.55, -0.2) * gauss(x[2], 0.6, 0.1), 0.4 * x[0])
    });
    let f = SampledFunction::from_fn(g1, |x| Complex64::from_polar(gauss(x[0], 0.6, 0.2), 0.5 * x[0]));
    let g = SampledFunction::from_fn(g1, |x| Complex64::from_polar(gauss(x[0], 0.6, -0.3), -0.3 * x[0]));
    let fam = WindowFamily::Gaussian { spread: 0.5 };
    let w = ReformulationWindows {
        chi: WindowSpec::new(fam, grid, Normalization::L2)?,
        chi1: WindowSpec::new(fam, g1, Normalization::L1)?,
        chi2: WindowSpec::new(fam, g1, Normalization::L1)?,
    };
    Ok((a, f, g, w))
}

/// Relative discrepancy between the phase-space and direct pairings at `N` nodes.
pub fn reformulation_discrepancy(phi: &PhaseSpec, n: usize) -> Result<f64> {
    let (a, f, g, w) = reformulation_fixture(n)?;
    let lhs = stft_reformulation_pair(&a, phi, &f, &g, &w)?;
    let d = direct_pairing(&a, phi, &f, &g)?;
    Ok((lhs - d).norm() / d.norm())
}

pub fn reformulation_checks(phi: &PhaseSpec) -> Result<Vec<CheckRecord>> {
    let d8 = reformulation_discrepancy(phi, 8)?;
    let d16 = reformulation_discrepancy(phi, 16)?;
    let (a, _, _, w) = reformulation_fixture(8)?;
    let conv = h_convolution_check(&a, phi, &w.chi, 4 * 64 + 3 * 8 + 5, &[(3, 4), (5, 2), (0, 7)])?;
    Ok(vec![
        CheckRecord::below("reformulation n=8", "phase-space pairing matches the direct pairing", d8, 1e-3),
        CheckRecord::below("reformulation refinement", "discrepancy shrinks from N = 8 to N = 16", d16, d8),
        CheckRecord::below("h-function convolution", "windowed amplitude transform is an exact lattice convolution", conv, 1e-10),
    ])
}

pub const GAUSSIAN_T_VALUES: [f64; 10] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0];

/// Closed-form transform of `e^{-2|y/t|²} e^{|y|²}` at `N = 128`, `L = 8`.
pub fn gaussian_checks() -> Result<Vec<CheckRecord>> {
    let g = GridSpec::new(1, 8.0, 128)?;
    let r = gaussian_identity_check(&GAUSSIAN_T_VALUES, &g)?;
    let mut records: Vec<CheckRecord> = r
        .per_t
        .iter()
        .map(|(t, e)| {
            CheckRecord::below(&format!("gaussian closed form t={t:.1}"), "sampled transform of the dilated Gaussian", *e, 1e-8)
        })
        .collect();
    records.push(CheckRecord::below("gaussian closed form", "largest error over all t", r.max_error, 1e-8));
    Ok(records)
}

/// Kernel transform against the operator pairing, plus covariances, at
/// seeded random lattice samples.
pub fn kernel_identity_checks(phi: &PhaseSpec, seed: u64) -> Result<Vec<CheckRecord>> {
    let g = GridSpec::new(3, 8.0, 16)?;
    let a = SampledFunction::from_fn(g, |x| {
        Complex64::from_polar((-(x[0] - 0.5).powi(2) / 2.0 - x[1].powi(2) / 3.0 - (x[2] + 0.3).powi(2) / 1.5).exp(), 0.2 * x[0])
    });
    let g1 = g.with_dim(1);
    let chi1 = WindowSpec::new(WindowFamily::Gaussian { spread: 1.0 }, g1, Normalization::L2)?;
    let chi2 = WindowSpec::new(WindowFamily::Gaussian { spread: 0.8 }, g1, Normalization::L2)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples: Vec<[usize; 4]> = (0..10).map(|_| std::array::from_fn(|_| rng.random_range(0..g1.points))).collect();
    let r = kernel_stft_identity(&a, phi, &chi1, &chi2, &samples)?;
    Ok(vec![
        CheckRecord::below(
            "kernel transform identity",
            "windowed kernel transform equals the pairing with wave packets",
            r.identity,
            1e-6,
        ),
        CheckRecord::below(
            "source covariance",
            "source wave packet transform is a shifted window transform",
            r.source_covariance,
            1e-6,
        ),
        CheckRecord::below(
            "target covariance",
            "target wave packet transform is a shifted window transform",
            r.target_covariance,
            1e-6,
        ),
    ])
}

/// The symbol of the magnitude identity, on `L = 8`, `N = 32`.
pub fn identity_symbol(g: GridSpec) -> SampledFunction {
    SampledFunction::from_fn(g, |x| {
        Complex64::from_polar((-((x[0] - 0.4).powi(2) + (x[1] + 0.3).powi(2)) / 2.88).exp() * (1.0 + 0.1 * x[0]), 0.5 * x[1])
    })
}

/// Ten symbols on the `N = 48` matched grid for the norm-ratio constancy.
pub fn ratio_family(g: GridSpec) -> Vec<SampledFunction> {
    (0..10)
        .map(|k| {
            let k = k as f64;
            let (cx, cxi) = (0.3 * (0.7 * k).cos(), 0.3 * (0.7 * k).sin());
            let s = 0.8 + 0.06 * k;
            let w = -0.5 + 0.1 * k;
            SampledFunction::from_fn(g, move |x| {
                Complex64::from_polar(
                    (-((x[0] - cx).powi(2) + (x[1] - cxi).powi(2)) / (2.0 * s * s)).exp(),
                    w * x[0] - 0.5 * w * x[1],
                )
            })
        })
        .collect()
}

pub fn kernel_symbol_ratios() -> Result<Vec<f64>> {
    let g = GridSpec::matched(2, 48)?;
    let chi = WindowSpec::new(WindowFamily::Gaussian { spread: 1.0 }, g, Normalization::L2)?;
    ratio_family(g).iter().map(|a| kernel_symbol_norm_ratio(a, &chi, 2.0)).collect()
}

pub fn symbol_identity_checks(seed: u64) -> Result<Vec<CheckRecord>> {
    let g = GridSpec::new(2, 8.0, 32)?;
    let chi = WindowSpec::new(WindowFamily::Gaussian { spread: 0.9 }, g, Normalization::L2)?;
    let a = identity_symbol(g);
    let h = g.spacing();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples: Vec<[f64; 4]> = (0..6).map(|_| std::array::from_fn(|_| rng.random_range(-4i32..=4) as f64 * h)).collect();
    let mut records = Vec::new();
    for t in [0.0, 0.5, 1.0] {
        let e = symbol_kernel_stft_check(&a, t, &chi, &samples)?;
        records.push(CheckRecord::below(
            &format!("symbol-kernel magnitudes t={t}"),
            "kernel and symbol transforms agree in magnitude",
            e,
            1e-6,
        ));
    }
    let ratios = kernel_symbol_ratios()?;
    let max = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    records.push(CheckRecord::below(
        "kernel-symbol norm ratio spread",
        "norm ratio is constant across the family",
        max / min - 1.0,
        0.02,
    ));
    records.push(CheckRecord::below(
        "kernel-symbol ratio calibration",
        "mean norm ratio stays at the committed constant",
        drift(mean, KERNEL_SYMBOL_RATIO_REFERENCE),
        CALIBRATION_DRIFT,
    ));
    Ok(records)
}

pub const SCHATTEN_EXPONENTS: [f64; 4] = [1.0, 2.0, 4.0, f64::INFINITY];

/// Smallest `‖T‖_p - ‖T‖_q` over `p ≤ q`.
pub fn monotonicity_slack(norms: &[f64]) -> f64 {
    let mut worst = f64::INFINITY;
    for i in 0..norms.len() {
        for j in i..norms.len() {
            worst = worst.min(norms[i] - norms[j]);
        }
    }
    worst
}

pub fn schatten_checks(seed: u64) -> Result<Vec<CheckRecord>> {
    let g = GridSpec::new(3, 8.0, 16)?;
    let a = SampledFunction::from_real_fn(g, |x| (-((x[0] - 0.3).powi(2) + x[1] * x[1]) / 2.0 - x[2] * x[2] / 1.5).exp());
    let t = op_fio(&a, &PhaseSpec::bilinear(1))?;
    let hs = hs_kernel_identity(&t)?;
    let sigma = singular_values(&t, None, None)?;
    let norms: Vec<f64> = SCHATTEN_EXPONENTS.iter().map(|&p| schatten_norm(&sigma, p)).collect::<Result<_>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst_log: f64 = f64::INFINITY;
    let mut worst_mono: f64 = monotonicity_slack(&norms);
    for _ in 0..100 {
        let s = matrix_singular_values(&random_matrix(8, 8, &mut rng))?;
        let p1 = 1.0 + 3.0 * rng.random::<f64>();
        let p2 = if rng.random::<f64>() < 0.25 { f64::INFINITY } else { p1 + 10.0 * rng.random::<f64>() };
        let theta = rng.random::<f64>();
        worst_log = worst_log.min(interpolation_audit(&s, p1, p2, theta)?);
        let n: Vec<f64> = SCHATTEN_EXPONENTS.iter().map(|&p| schatten_norm(&s, p)).collect::<Result<_>>()?;
        worst_mono = worst_mono.min(monotonicity_slack(&n));
    }
    let d = nalgebra::DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(3.0), c(4.0)]));
    let s = singular_values(&operator_from_matrix(d)?, None, None)?;
    Ok(vec![
        CheckRecord::below("hilbert-schmidt kernel norm", "Hilbert-Schmidt norm is the kernel L2 norm", hs, 1e-8),
        CheckRecord::slack("schatten monotonicity", "Schatten norms decrease in the exponent", worst_mono, 1e-12),
        CheckRecord::slack("schatten log-convexity", "Schatten norms are log-convex in 1/p", worst_log, 1e-10),
        CheckRecord::exact("diag(3,4) trace norm", "sum of singular values", schatten_norm(&s, 1.0)?, 7.0),
        CheckRecord::exact("diag(3,4) hilbert-schmidt norm", "root sum of squares", schatten_norm(&s, 2.0)?, 5.0),
        CheckRecord::exact("diag(3,4) operator norm", "largest singular value", schatten_norm(&s, f64::INFINITY)?, 4.0),
    ])
}

pub fn nondegeneracy_checks() -> Result<Vec<CheckRecord>> {
    let g = GridSpec::new(3, 4.0, 8)?;
    let bilinear = PhaseSpec::bilinear(1);
    let mut records = Vec::new();
    for (variant, name) in
        [(NondegeneracyVariant::Full, "full"), (NondegeneracyVariant::YZeta, "y-zeta"), (NondegeneracyVariant::XZeta, "x-zeta")]
    {
        let r = nondegeneracy(&bilinear, &g, variant)?;
        records.push(CheckRecord::exact(
            &format!("bilinear determinant {name}"),
            "bilinear phase is nondegenerate with unit determinant",
            r.d,
            1.0,
        ));
    }
    let zz = nondegeneracy(&bilinear, &g, NondegeneracyVariant::ZetaZeta)?;
    records.push(CheckRecord::holds(
        "bilinear zeta-zeta block",
        "the zeta-zeta block of the bilinear phase vanishes",
        zz.degenerate && zz.d == 0.0,
    ));
    let zero = PhaseSpec::zero(AmplitudeLayout::new(1, 1, 1));
    let all = NondegeneracyVariant::ALL
        .iter()
        .map(|&v| nondegeneracy(&zero, &g, v).map(|r| r.degenerate))
        .collect::<Result<Vec<_>>>()?;
    records.push(CheckRecord::holds(
        "zero phase degenerate",
        "the zero phase is flagged degenerate in every variant",
        all.iter().all(|&d| d),
    ));
    Ok(records)
}

/// Scaling invariance and drift of the bound ratio on the reference
/// configuration.
pub fn bound_checks() -> Result<Vec<CheckRecord>> {
    let cfg = ExperimentConfig::default();
    let r = run_bound_experiment(&cfg)?;
    let grid = cfg.amplitude_grid()?;
    let mut worst: f64 = 0.0;
    for lambda in [2.0, 0.37] {
        let a = cfg.amplitude.sample(grid).scale(c(lambda));
        let s = bound_report(&cfg, &cfg.phase_spec(), &a, r.d)?;
        worst = worst.max((s.ratio - r.ratio).abs() / r.ratio);
    }
    Ok(vec![
        CheckRecord::below("bound ratio scaling", "ratio is invariant under amplitude scaling", worst, 1e-10),
        CheckRecord::below(
            "bound ratio calibration",
            "ratio stays at the committed constant",
            drift(r.ratio, BOUND_RATIO_REFERENCE),
            CALIBRATION_DRIFT,
        ),
    ])
}

/// Every check. The configured phase must be nondegenerate; it drives the
/// phase-dependent identities.
pub fn run_verification_suite(cfg: &ExperimentConfig) -> Result<Vec<CheckRecord>> {
    cfg.validate()?;
    let phi = cfg.phase_spec();
    nondegeneracy(&phi, &cfg.amplitude_grid()?, NondegeneracyVariant::Full)?.require()?;
    let mut records = Vec::new();
    records.extend(transform_checks()?);
    records.extend(isometry_checks()?);
    records.extend(quantization_checks()?);
    records.extend(reduction_checks(cfg.seed)?);
    records.extend(reformulation_checks(&phi)?);
    records.extend(gaussian_checks()?);
    records.extend(kernel_identity_checks(&phi, cfg.seed)?);
    records.extend(symbol_identity_checks(cfg.seed)?);
    records.extend(schatten_checks(cfg.seed)?);
    records.extend(nondegeneracy_checks()?);
    records.extend(bound_checks()?);
    Ok(records)
}
