//! Mixed sup/integral norms of amplitude short-time transforms
//! `V_χ a(X, ξ, η, z)` with `X = (x, y, ζ) ∈ R^{n₂+n₁+m}`.
//!
//! Each variant is a fixed nesting of lattice maxima and quadratures, applied
//! innermost first in the order the norm is written.

use serde::{Deserialize, Serialize};

use super::reduce::{check_exponent, nested_norm, Level, SubspacePartition};
use crate::error::{Error, Result};
use crate::stft::StftArray;
use crate::weights::WeightSpec;

/// Block sizes of the amplitude variables: `x ∈ R^{n_x}` (target),
/// `y ∈ R^{n_y}` (source), `ζ ∈ R^m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AmplitudeLayout {
    pub n_x: usize,
    pub n_y: usize,
    pub m: usize,
}

impl AmplitudeLayout {
    pub fn new(n_x: usize, n_y: usize, m: usize) -> Self {
        AmplitudeLayout { n_x, n_y, m }
    }

    pub fn dim(&self) -> usize {
        self.n_x + self.n_y + self.m
    }

    fn range(lo: usize, len: usize) -> Vec<usize> {
        (lo..lo + len).collect()
    }

    pub fn x(&self) -> Vec<usize> {
        Self::range(0, self.n_x)
    }
    pub fn y(&self) -> Vec<usize> {
        Self::range(self.n_x, self.n_y)
    }
    pub fn zeta(&self) -> Vec<usize> {
        Self::range(self.n_x + self.n_y, self.m)
    }
    pub fn xi(&self) -> Vec<usize> {
        Self::range(self.dim(), self.n_x)
    }
    pub fn eta(&self) -> Vec<usize> {
        Self::range(self.dim() + self.n_x, self.n_y)
    }
    pub fn z(&self) -> Vec<usize> {
        Self::range(self.dim() + self.n_x + self.n_y, self.m)
    }

    /// `V₁ = (x, y)`, `V₂ = ζ`, `V₁' = (ξ, η)`, `V₂' = z`.
    pub fn default_partition(&self) -> SubspacePartition {
        SubspacePartition {
            v1: [self.x(), self.y()].concat(),
            v2: self.zeta(),
            v1_dual: [self.xi(), self.eta()].concat(),
            v2_dual: self.z(),
        }
    }
}

/// The amplitude norms. Written with `E = |V_χ a · ω|`:
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AmplitudeVariant {
    /// `sup_{x,y} ∫_{V₂'} sup_{ζ, V₁'} E du`.
    MixedSupIntegral,
    /// `sup_{x,y} ∫ sup_{ζ,ξ,η} E dz`.
    IntegrateZ,
    /// `sup_{x,y} ∫ sup_{ζ,η,z} E dξ`.
    IntegrateXi,
    /// `sup_{x,y} ∫ sup_{ζ,ξ,z} E dη`.
    IntegrateEta,
    /// `(∬ (∫ sup_z ‖E‖_{L^p(ξ,η)} dζ)^p dx dy)^{1/p}`.
    InnerLpSupZ,
    /// `(∬ (∫ sup_ζ ‖E‖_{L^p(ξ,η)} dz)^p dx dy)^{1/p}`.
    InnerLpSupZeta,
    /// `∫_{V₂'} ‖sup_{V₂} E‖_{L^p(V₁ × V₁')} du`.
    SupPhaseLp,
    /// `∫_{V₂'} ‖ ‖sup_{V₂} E‖_{L^p(V₁)} ‖_{L^q(V₁')} du`.
    SupPhaseLpLq,
}

impl AmplitudeVariant {
    pub const ALL: [AmplitudeVariant; 8] = [
        AmplitudeVariant::MixedSupIntegral,
        AmplitudeVariant::IntegrateZ,
        AmplitudeVariant::IntegrateXi,
        AmplitudeVariant::IntegrateEta,
        AmplitudeVariant::InnerLpSupZ,
        AmplitudeVariant::InnerLpSupZeta,
        AmplitudeVariant::SupPhaseLp,
        AmplitudeVariant::SupPhaseLpLq,
    ];
}

/// Exponents and partition for the variants that use them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeParams {
    pub p: f64,
    pub q: f64,
    pub partition: SubspacePartition,
}

impl AmplitudeParams {
    pub fn new(layout: &AmplitudeLayout, p: f64, q: f64) -> Self {
        AmplitudeParams { p, q, partition: layout.default_partition() }
    }
}

impl AmplitudeVariant {
    /// Reduction levels, innermost first.
    pub fn levels(&self, lay: &AmplitudeLayout, params: &AmplitudeParams) -> Vec<Level> {
        let cat = |a: &[Vec<usize>]| a.concat();
        let part = &params.partition;
        let (p, q) = (params.p, params.q);
        let xy = cat(&[lay.x(), lay.y()]);
        match self {
            AmplitudeVariant::MixedSupIntegral => {
                vec![Level::sup(cat(&[lay.zeta(), part.v1_dual.clone()])), Level::new(part.v2_dual.clone(), 1.0), Level::sup(xy)]
            }
            AmplitudeVariant::IntegrateZ => {
                vec![Level::sup(cat(&[lay.zeta(), lay.xi(), lay.eta()])), Level::new(lay.z(), 1.0), Level::sup(xy)]
            }
            AmplitudeVariant::IntegrateXi => {
                vec![Level::sup(cat(&[lay.zeta(), lay.eta(), lay.z()])), Level::new(lay.xi(), 1.0), Level::sup(xy)]
            }
            AmplitudeVariant::IntegrateEta => {
                vec![Level::sup(cat(&[lay.zeta(), lay.xi(), lay.z()])), Level::new(lay.eta(), 1.0), Level::sup(xy)]
            }
            AmplitudeVariant::InnerLpSupZ => vec![
                Level::new(cat(&[lay.xi(), lay.eta()]), p),
                Level::sup(lay.z()),
                Level::new(lay.zeta(), 1.0),
                Level::new(xy, p),
            ],
            AmplitudeVariant::InnerLpSupZeta => vec![
                Level::new(cat(&[lay.xi(), lay.eta()]), p),
                Level::sup(lay.zeta()),
                Level::new(lay.z(), 1.0),
                Level::new(xy, p),
            ],
            AmplitudeVariant::SupPhaseLp => vec![
                Level::sup(part.v2.clone()),
                Level::new(cat(&[part.v1.clone(), part.v1_dual.clone()]), p),
                Level::new(part.v2_dual.clone(), 1.0),
            ],
            AmplitudeVariant::SupPhaseLpLq => vec![
                Level::sup(part.v2.clone()),
                Level::new(part.v1.clone(), p),
                Level::new(part.v1_dual.clone(), q),
                Level::new(part.v2_dual.clone(), 1.0),
            ],
        }
    }
}

/// Evaluate an amplitude norm on a stored short-time transform of `a`.
pub fn amplitude_norm(
    va: &StftArray,
    layout: &AmplitudeLayout,
    variant: AmplitudeVariant,
    params: &AmplitudeParams,
    omega: &WeightSpec,
) -> Result<f64> {
    let d = layout.dim();
    if va.grid.dim != d {
        return Err(Error::DimensionMismatch { expected: d, got: va.grid.dim });
    }
    params.partition.validate(d)?;
    if params.partition.v1.len() != layout.n_x + layout.n_y {
        return Err(Error::invalid("V1 must have dimension n_x + n_y"));
    }
    check_exponent(params.p)?;
    check_exponent(params.q)?;
    let mags = va.weighted_magnitudes(omega)?;
    let weights: Vec<f64> = (0..2 * d).map(|a| if a < d { va.grid.spacing() } else { va.grid.freq_step() }).collect();
    nested_norm(&mags, &vec![va.grid.points; 2 * d], &weights, &variant.levels(layout, params))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{GridSpec, SampledFunction};
    use crate::stft::stft;
    use crate::window::WindowSpec;

    fn setup() -> (AmplitudeLayout, StftArray) {
        let g = GridSpec::new(3, 6.0, 8).unwrap();
        let chi = WindowSpec::gaussian_spread(g, 0.7).unwrap();
        let a = SampledFunction::from_real_fn(g, |x| {
            (-(x[0] - 0.3).powi(2) / 1.2 - (x[1] + 0.2).powi(2) / 0.9 - x[2].powi(2) / 1.6).exp()
        });
        (AmplitudeLayout::new(1, 1, 1), stft(&a, &chi).unwrap())
    }

    /// Independent scalar evaluator: explicit loops over the six axes for
    /// `sup_{x,y} ∫ sup_{ζ,ξ,η} |V| dz`.
    fn brute_force(va: &StftArray) -> f64 {
        let n = va.grid.points;
        let side = n * n * n;
        let dz = va.grid.freq_step();
        let mut best: f64 = 0.0;
        for x in 0..n {
            for y in 0..n {
                let mut integral = 0.0;
                for z in 0..n {
                    let mut sup: f64 = 0.0;
                    for zeta in 0..n {
                        for xi in 0..n {
                            for eta in 0..n {
                                let pos = (x * n + y) * n + zeta;
                                let fr = (xi * n + eta) * n + z;
                                sup = sup.max(va.values[pos * side + fr].norm());
                            }
                        }
                    }
                    integral += sup * dz;
                }
                best = best.max(integral);
            }
        }
        best
    }

    #[test]
    fn mixed_sup_integral_matches_nested_loops() {
        let (lay, va) = setup();
        let params = AmplitudeParams::new(&lay, 2.0, 2.0);
        let w = WeightSpec::trivial(6);
        let fast = amplitude_norm(&va, &lay, AmplitudeVariant::MixedSupIntegral, &params, &w).unwrap();
        let slow = brute_force(&va);
        assert!((fast - slow).abs() <= 1e-14 * slow);
        let z = amplitude_norm(&va, &lay, AmplitudeVariant::IntegrateZ, &params, &w).unwrap();
        assert_eq!(fast, z);
    }

    #[test]
    fn lp_lq_collapses_when_exponents_agree() {
        let (lay, va) = setup();
        let w = WeightSpec::trivial(6);
        for p in [1.0, 2.0, 3.5] {
            let params = AmplitudeParams::new(&lay, p, p);
            let a = amplitude_norm(&va, &lay, AmplitudeVariant::SupPhaseLp, &params, &w).unwrap();
            let b = amplitude_norm(&va, &lay, AmplitudeVariant::SupPhaseLpLq, &params, &w).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn zero_amplitude_and_bad_partition() {
        let (lay, va) = setup();
        let zero = StftArray { values: vec![Default::default(); va.values.len()], ..va.clone() };
        let params = AmplitudeParams::new(&lay, 2.0, 1.0);
        for v in AmplitudeVariant::ALL {
            assert_eq!(amplitude_norm(&zero, &lay, v, &params, &WeightSpec::trivial(6)).unwrap(), 0.0);
        }
        let mut bad = params.clone();
        bad.partition.v2.push(0);
        assert!(amplitude_norm(&va, &lay, AmplitudeVariant::SupPhaseLp, &bad, &WeightSpec::trivial(6)).is_err());
    }
}
