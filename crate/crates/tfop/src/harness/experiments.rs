use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use super::bound::{analysis_window, bound_report, run_bound_experiment};
use super::calibration::{drift, BOUND_RATIO_REFERENCE, CALIBRATION_DRIFT};
use super::config::{Experiment, ExperimentConfig, GaussianFamily};
use super::report::{CheckRecord, Report};
use super::suite::{
    gaussian_family, kernel_identity_checks, kernel_symbol_ratios, monotonicity_slack, reformulation_checks,
    run_verification_suite, symbol_identity_checks, SCHATTEN_EXPONENTS,
};
use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::norms::{
    amplitude_norm, cnp_norm, embedding_ratio, modulation_norm, AmplitudeLayout, AmplitudeParams, AmplitudeVariant,
    GaussianAmplitude, NormSpec,
};
use crate::operators::op_fio;
use crate::schatten::{hs_kernel_identity, schatten_norm, singular_values, weighted_gram, SingularSpectrum};
use crate::stft::stft;
use crate::weights::{audit_moderate, audit_submultiplicative, WeightSpec};
use crate::window::{Normalization, WindowFamily, WindowSpec};

fn to_value<T: Serialize>(v: &T) -> Result<Value> {
    serde_json::to_value(v).map_err(|e| Error::Numerical(format!("serialization failed: {e}")))
}

/// Run whatever `cfg.experiment` names.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Report> {
    cfg.validate()?;
    let (records, data) = match cfg.experiment {
        Experiment::IdentitySuite => (run_verification_suite(cfg)?, json!({})),
        Experiment::Reformulation => (reformulation_checks(&cfg.phase_spec())?, json!({})),
        Experiment::Bound => bound_experiment(cfg)?,
        Experiment::SchattenDecay => {
            let r = run_schatten_experiment(cfg)?;
            (r.records(), to_value(&r)?)
        }
        Experiment::KernelIdentities => kernel_experiment(cfg)?,
        Experiment::NormAudits => norm_audits(cfg)?,
    };
    Ok(Report { config: cfg.clone(), records, data })
}

fn bound_experiment(cfg: &ExperimentConfig) -> Result<(Vec<CheckRecord>, Value)> {
    let r = run_bound_experiment(cfg)?;
    let grid = cfg.amplitude_grid()?;
    let mut worst: f64 = 0.0;
    for lambda in [2.0, 0.37] {
        let a = cfg.amplitude.sample(grid).scale(Complex64::new(lambda, 0.0));
        let s = bound_report(cfg, &cfg.phase_spec(), &a, r.d)?;
        worst = worst.max((s.ratio - r.ratio).abs() / r.ratio);
    }
    let mut records = vec![CheckRecord::below("bound ratio scaling", "ratio is invariant under amplitude scaling", worst, 1e-10)];
    let reference =
        ExperimentConfig { experiment: cfg.experiment, seed: cfg.seed, output: cfg.output.clone(), ..Default::default() };
    if *cfg == reference {
        records.push(CheckRecord::below(
            "bound ratio calibration",
            "ratio stays at the committed constant",
            drift(r.ratio, BOUND_RATIO_REFERENCE),
            CALIBRATION_DRIFT,
        ));
    }
    Ok((records, to_value(&r)?))
}

fn kernel_experiment(cfg: &ExperimentConfig) -> Result<(Vec<CheckRecord>, Value)> {
    let mut records = kernel_identity_checks(&cfg.phase_spec(), cfg.seed)?;
    records.extend(symbol_identity_checks(cfg.seed)?);
    Ok((records, json!({ "kernel_symbol_ratios": kernel_symbol_ratios()? })))
}

/// One amplitude of the decay family.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SchattenRow {
    pub spread: f64,
    /// Norms for `p = 1, 2, 4, ∞`, plain `L²` spaces.
    pub unweighted: Vec<f64>,
    /// The same between the weighted `M²` spaces.
    pub weighted: Vec<f64>,
    pub hs_kernel_discrepancy: f64,
    /// Full unweighted singular spectrum (the decay table).
    pub spectrum: Vec<f64>,
}

/// `σ₁` and `‖T‖_{I₂}` of the widest member at `points` nodes per axis.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridDependence {
    pub points: usize,
    pub largest: f64,
    pub hilbert_schmidt: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SchattenReport {
    pub exponents: Vec<f64>,
    pub rows: Vec<SchattenRow>,
    pub grid_dependence: Vec<GridDependence>,
}

impl SchattenReport {
    pub fn records(&self) -> Vec<CheckRecord> {
        let mut records = Vec::new();
        for r in &self.rows {
            let s = r.spread;
            records.push(CheckRecord::slack(
                &format!("monotone norms spread={s}"),
                "Schatten norms decrease in the exponent",
                monotonicity_slack(&r.unweighted),
                1e-12,
            ));
            let wscale = r.weighted[0].max(1.0);
            records.push(CheckRecord::slack(
                &format!("monotone weighted norms spread={s}"),
                "weighted Schatten norms decrease in the exponent",
                monotonicity_slack(&r.weighted) / wscale,
                1e-12,
            ));
            records.push(CheckRecord::below(
                &format!("hilbert-schmidt spread={s}"),
                "Hilbert-Schmidt norm is the kernel L2 norm",
                r.hs_kernel_discrepancy,
                1e-8,
            ));
        }
        let decreasing = self.rows.windows(2).all(|w| w[1].unweighted[0] < w[0].unweighted[0]);
        records.push(CheckRecord::holds("trace norm decay", "trace norm decreases as the amplitude localizes", decreasing));
        records
    }
}

pub const SCHATTEN_FAMILY_SIZE: usize = 4;

fn norms(sigma: &SingularSpectrum) -> Result<Vec<f64>> {
    SCHATTEN_EXPONENTS.iter().map(|&p| schatten_norm(sigma, p)).collect()
}

/// Spectra for the configured amplitude with its spread halved
/// [`SCHATTEN_FAMILY_SIZE`] - 1 times.
pub fn run_schatten_experiment(cfg: &ExperimentConfig) -> Result<SchattenReport> {
    cfg.validate()?;
    let phi = cfg.phase_spec();
    let grid = cfg.amplitude_grid()?;
    let g1 = grid.with_dim(1);
    let chi = analysis_window(g1)?;
    let gram1 = weighted_gram(&cfg.weights.omega1, &chi, &g1)?;
    let gram2 = weighted_gram(&cfg.weights.omega2, &chi, &g1)?;
    let mut rows = Vec::with_capacity(SCHATTEN_FAMILY_SIZE);
    for k in 0..SCHATTEN_FAMILY_SIZE {
        let fam = cfg.amplitude.with_spread(cfg.amplitude.spread / 2f64.powi(k as i32));
        let t = op_fio(&fam.sample(grid), &phi)?;
        let plain = singular_values(&t, None, None)?;
        let weighted = singular_values(&t, Some(&gram1), Some(&gram2))?;
        rows.push(SchattenRow {
            spread: fam.spread,
            unweighted: norms(&plain)?,
            weighted: norms(&weighted)?,
            hs_kernel_discrepancy: hs_kernel_identity(&t)?,
            spectrum: plain.values,
        });
    }
    let mut grid_dependence = Vec::new();
    let half = cfg.grid.points / 2;
    for points in [half, cfg.grid.points] {
        if points < 4 || points % 2 != 0 {
            continue;
        }
        let g = GridSpec::new(3, cfg.grid.half_width, points)?;
        let t = op_fio(&cfg.amplitude.sample(g), &phi)?;
        let s = singular_values(&t, None, None)?;
        grid_dependence.push(GridDependence { points, largest: s.largest(), hilbert_schmidt: schatten_norm(&s, 2.0)? });
    }
    Ok(SchattenReport { exponents: SCHATTEN_EXPONENTS.to_vec(), rows, grid_dependence })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
struct ModulationRow {
    member: usize,
    /// `(p, q, value)` with the configured `ω₁`.
    norms: Vec<(f64, f64, f64)>,
}

/// Modulation norms of a Gaussian family, amplitude norms of the configured
/// amplitude in every variant, weight audits and embedding diagnostics.
fn norm_audits(cfg: &ExperimentConfig) -> Result<(Vec<CheckRecord>, Value)> {
    let g = cfg.grid.spec(1)?;
    let chi = WindowSpec::new(WindowFamily::Gaussian { spread: 1.0 }, g, Normalization::L2)?;
    let family = gaussian_family(g);
    let (p, q) = (cfg.exponents.p, cfg.exponents.q);
    let pairs = [(p, q), (1.0, 1.0), (2.0, 2.0), (f64::INFINITY, 1.0), (1.0, f64::INFINITY)];
    let mut rows = Vec::new();
    let mut m2: f64 = 0.0;
    for (i, f) in family.iter().enumerate() {
        let v = stft(f, &chi)?;
        let norms = pairs
            .iter()
            .map(|&(p, q)| Ok((p, q, modulation_norm(&v, p, q, &cfg.weights.omega1)?)))
            .collect::<Result<Vec<_>>>()?;
        let expect = chi.norm_l2() * f.norm_l2();
        m2 = m2.max((modulation_norm(&v, 2.0, 2.0, &WeightSpec::trivial(2))? - expect).abs() / expect);
        rows.push(ModulationRow { member: i, norms });
    }
    let window = WindowFamily::Gaussian { spread: 1.0 };
    let m1 = NormSpec::Modulation { p: 1.0, q: 1.0, weight: WeightSpec::trivial(2), window };
    let m2spec = NormSpec::Modulation { p: 2.0, q: 2.0, weight: WeightSpec::trivial(2), window };
    let embedding = embedding_ratio(&family, &m1, &m2spec)?;

    // amplitude norms on a 12-point box of half width 6
    let ag = GridSpec::new(3, 6.0, 12)?;
    let lay = AmplitudeLayout::new(1, 1, 1);
    let a = cfg.amplitude.sample(ag);
    let chi3 = WindowSpec::new(WindowFamily::Gaussian { spread: 0.8 }, ag, Normalization::L2)?;
    let va = stft(&a, &chi3)?;
    let params = AmplitudeParams::new(&lay, p, q);
    let amplitude: Vec<(AmplitudeVariant, f64)> = AmplitudeVariant::ALL
        .iter()
        .map(|&var| Ok((var, amplitude_norm(&va, &lay, var, &params, &cfg.weights.omega)?)))
        .collect::<Result<_>>()?;
    let smooth = smooth_norms(&cfg.amplitude, ag, p)?;

    let ag_small = GridSpec::new(6, 3.0, 4)?;
    let moderate = audit_moderate(&cfg.weights.omega, &cfg.weights.v, &ag_small)?;
    let submult = audit_submultiplicative(&cfg.weights.v, &ag_small)?;

    let all_finite = amplitude.iter().all(|(_, v)| v.is_finite() && *v >= 0.0)
        && rows.iter().all(|r| r.norms.iter().all(|n| n.2.is_finite() && n.2 >= 0.0));
    let records = vec![
        CheckRecord::below("m2 norm", "unweighted modulation norm with p = q = 2 equals the L2 norm", m2, 1e-8),
        CheckRecord::holds("norms finite", "every audited norm is finite and non-negative", all_finite),
    ];
    let data = json!({
        "modulation": to_value(&rows)?,
        "embedding_m1_into_m2": to_value(&embedding)?,
        "amplitude": to_value(&amplitude)?,
        "smooth": to_value(&smooth)?,
        "weights": { "moderate": to_value(&moderate)?, "submultiplicative": to_value(&submult)? },
    });
    Ok((records, data))
}

/// `C^{N,p}` norms of the real Gaussian envelope for `N = 0, 1, 2`.
fn smooth_norms(amp: &GaussianFamily, grid: GridSpec, p: f64) -> Result<Vec<(usize, f64)>> {
    let oracle = GaussianAmplitude { center: amp.center.clone(), spread: amp.spread };
    let a = oracle.sample(grid);
    (0..=2).map(|order| Ok((order, cnp_norm(&a, &oracle, order, p, &WeightSpec::trivial(3))?))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schatten_rows_are_monotone_and_decay() {
        let cfg = ExperimentConfig { experiment: Experiment::SchattenDecay, ..Default::default() };
        let r = run_schatten_experiment(&cfg).unwrap();
        assert_eq!(r.rows.len(), SCHATTEN_FAMILY_SIZE);
        let recs = r.records();
        assert!(recs.iter().all(|c| c.pass), "{:?}", recs.iter().filter(|c| !c.pass).collect::<Vec<_>>());
        assert_eq!(r.grid_dependence.len(), 2);
    }

    #[test]
    fn norm_audits_run() {
        let cfg = ExperimentConfig { experiment: Experiment::NormAudits, ..Default::default() };
        let report = run_experiment(&cfg).unwrap();
        assert!(report.passed(), "{:?}", report.failures());
        assert_eq!(report.data["amplitude"].as_array().unwrap().len(), 8);
    }
}
