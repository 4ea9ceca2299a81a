use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{GridSpec, SampledFunction};
use crate::norms::AmplitudeLayout;
use crate::operators::{PhaseFamily, PhaseSpec};
use crate::weights::WeightSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    #[default]
    IdentitySuite,
    Reformulation,
    Bound,
    SchattenDecay,
    KernelIdentities,
    NormAudits,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
}

/// Signal grid: `N` nodes per axis on `[-L, L)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub half_width: f64,
    pub points: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig { half_width: 8.0, points: 16 }
    }
}

impl GridConfig {
    pub fn spec(&self, dim: usize) -> Result<GridSpec> {
        GridSpec::new(dim, self.half_width, self.points).map_err(|e| Error::Config(format!("grid: {e}")))
    }
}

/// `e^{i<modulation, X>} Π exp(-(X_a - center_a)² / (2 spread²))` on `(x, y, ζ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianFamily {
    pub center: Vec<f64>,
    pub spread: f64,
    pub modulation: Vec<f64>,
}

impl Default for GaussianFamily {
    fn default() -> Self {
        GaussianFamily { center: vec![0.3, -0.2, 0.1], spread: 1.0, modulation: vec![0.4, 0.0, 0.0] }
    }
}

impl GaussianFamily {
    pub fn with_spread(&self, spread: f64) -> Self {
        GaussianFamily { spread, ..self.clone() }
    }

    pub fn sample(&self, grid: GridSpec) -> SampledFunction {
        let s2 = 2.0 * self.spread * self.spread;
        SampledFunction::from_fn(grid, |x| {
            let r: f64 = x.iter().zip(&self.center).map(|(v, c)| (v - c).powi(2)).sum();
            let ph: f64 = x.iter().zip(&self.modulation).map(|(v, w)| v * w).sum();
            num_complex::Complex64::from_polar((-r / s2).exp(), ph)
        })
    }
}

/// Named weights: `omega` on the amplitude's phase space `R^6`, `v` the
/// submultiplicative weight for phase derivatives, `omega1`/`omega2` on the
/// source/target phase spaces `R^2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightsConfig {
    pub omega: WeightSpec,
    pub v: WeightSpec,
    pub omega1: WeightSpec,
    pub omega2: WeightSpec,
}

impl Default for WeightsConfig {
    fn default() -> Self {
        WeightsConfig {
            omega: WeightSpec::trivial(6),
            v: WeightSpec::trivial(6),
            omega1: WeightSpec::trivial(2),
            omega2: WeightSpec::trivial(2),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Exponents {
    pub p: f64,
    pub q: f64,
}

impl Default for Exponents {
    fn default() -> Self {
        Exponents { p: 2.0, q: 2.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub directory: Option<PathBuf>,
    pub formats: Vec<Format>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { directory: None, formats: vec![Format::Json] }
    }
}

fn bilinear() -> PhaseFamily {
    PhaseFamily::Bilinear
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub experiment: Experiment,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default = "bilinear")]
    pub phase: PhaseFamily,
    #[serde(default)]
    pub amplitude: GaussianFamily,
    #[serde(default)]
    pub weights: WeightsConfig,
    #[serde(default)]
    pub exponents: Exponents,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: OutputConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            experiment: Experiment::default(),
            grid: GridConfig::default(),
            phase: bilinear(),
            amplitude: GaussianFamily::default(),
            weights: WeightsConfig::default(),
            exponents: Exponents::default(),
            seed: 0,
            output: OutputConfig::default(),
        }
    }
}

fn field<T>(name: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| Error::Config(format!("{name}: {e}")))
}

impl ExperimentConfig {
    /// Parse and validate; errors carry the line/column or the field name.
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("line {}, column {}: {e}", e.line(), e.column())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let g = self.grid;
        if !(g.half_width.is_finite() && g.half_width > 0.0) {
            return Err(Error::Config(format!("grid.half_width: must be positive, got {}", g.half_width)));
        }
        if g.points < 4 || !g.points.is_multiple_of(2) {
            return Err(Error::Config(format!("grid.points: must be even and at least 4, got {}", g.points)));
        }
        field("phase", self.phase_spec().validate())?;
        let a = &self.amplitude;
        if a.center.len() != 3 || a.modulation.len() != 3 {
            return Err(Error::Config("amplitude: center and modulation need three entries (x, y, ζ)".into()));
        }
        if !(a.spread.is_finite() && a.spread > 0.0) {
            return Err(Error::Config(format!("amplitude.spread: must be positive, got {}", a.spread)));
        }
        let w = &self.weights;
        for (name, spec, dim) in [
            ("weights.omega", &w.omega, 6),
            ("weights.v", &w.v, 6),
            ("weights.omega1", &w.omega1, 2),
            ("weights.omega2", &w.omega2, 2),
        ] {
            if spec.dim != dim {
                return Err(Error::Config(format!("{name}: needs dimension {dim}, got {}", spec.dim)));
            }
            field(name, spec.validate())?;
        }
        for (name, p) in [("exponents.p", self.exponents.p), ("exponents.q", self.exponents.q)] {
            field(name, crate::norms::check_exponent(p))?;
        }
        Ok(())
    }

    /// Phase on `(x, y, ζ) ∈ R³`.
    pub fn phase_spec(&self) -> PhaseSpec {
        PhaseSpec { family: self.phase.clone(), layout: AmplitudeLayout::new(1, 1, 1) }
    }

    pub fn amplitude_grid(&self) -> Result<GridSpec> {
        self.grid.spec(3)
    }
}
