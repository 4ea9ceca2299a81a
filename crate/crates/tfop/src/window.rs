//! Real, non-negative window functions sampled on a grid.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{GridSpec, SampledFunction};

/// Window profiles. All are radial (or products of radial 1-D profiles) and
/// centered at the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WindowFamily {
    /// `exp(-|x|² / (2 s²))`.
    Gaussian { spread: f64 },
    /// `exp(-1 / (1 - |x/r|²))` inside the ball of radius `r`.
    Bump { radius: f64 },
    /// Bump profile divided by the sum of its translates over the lattice
    /// `step · Z` (per axis), so the translates form a partition of unity.
    Partition { radius: f64, step: f64 },
}

/// How the samples are scaled after evaluating the profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// `‖χ‖_{L²} = 1` (by quadrature).
    L2,
    /// `‖χ‖_{L¹} = 1` (by quadrature).
    L1,
    /// Raw profile.
    None,
}

impl Default for WindowFamily {
    fn default() -> Self {
        WindowFamily::Gaussian { spread: 1.0 }
    }
}

fn bump1(r2: f64) -> f64 {
    if r2 < 1.0 {
        (-1.0 / (1.0 - r2)).exp()
    } else {
        0.0
    }
}

impl WindowFamily {
    /// Unnormalized profile at an arbitrary point (no periodic wrap).
    pub fn profile(&self, x: &[f64]) -> f64 {
        match *self {
            WindowFamily::Gaussian { spread } => (-x.iter().map(|v| v * v).sum::<f64>() / (2.0 * spread * spread)).exp(),
            WindowFamily::Bump { radius } => bump1(x.iter().map(|v| v * v).sum::<f64>() / (radius * radius)),
            WindowFamily::Partition { radius, step } => x
                .iter()
                .map(|&t| {
                    let reach = (radius / step).ceil() as i64 + 1;
                    let total: f64 = (-reach..=reach).map(|k| bump1(((t - k as f64 * step) / radius).powi(2))).sum();
                    let b = bump1((t / radius).powi(2));
                    if b == 0.0 {
                        0.0
                    } else {
                        b / total
                    }
                })
                .product(),
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            WindowFamily::Gaussian { spread } => spread > 0.0 && spread.is_finite(),
            WindowFamily::Bump { radius } => radius > 0.0 && radius.is_finite(),
            WindowFamily::Partition { radius, step } => step > 0.0 && radius > step / 2.0 && radius.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::invalid(format!("invalid window parameters {self:?}")))
        }
    }
}

/// A window together with its samples on a fixed grid.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowSpec {
    pub family: WindowFamily,
    pub normalization: Normalization,
    /// Factor applied to the raw profile.
    pub scale: f64,
    pub values: SampledFunction,
}

/// Largest edge-to-peak ratio a window may have before the periodic wrap of
/// its translates becomes visible.
pub const WINDOW_EDGE_TOLERANCE: f64 = 1e-12;

impl WindowSpec {
    pub fn new(family: WindowFamily, grid: GridSpec, normalization: Normalization) -> Result<Self> {
        family.validate()?;
        let raw = SampledFunction::from_real_fn(grid, |x| family.profile(x));
        let norm = match normalization {
            Normalization::L2 => raw.norm_l2(),
            Normalization::L1 => raw.norm_l1(),
            Normalization::None => 1.0,
        };
        if norm <= 0.0 || !norm.is_finite() {
            return Err(Error::invalid("window vanishes on this grid"));
        }
        let w = WindowSpec { family, normalization, scale: 1.0 / norm, values: raw.scale(Complex64::new(1.0 / norm, 0.0)) };
        let edge = w.values.edge_ratio();
        if edge > WINDOW_EDGE_TOLERANCE {
            return Err(Error::Fitness(format!(
                "window {family:?} has edge ratio {edge:e} on half width {}; widen the box or narrow the window",
                grid.half_width
            )));
        }
        Ok(w)
    }

    /// L²-normalized Gaussian with spread 1.
    pub fn gaussian(grid: GridSpec) -> Result<Self> {
        Self::new(WindowFamily::Gaussian { spread: 1.0 }, grid, Normalization::L2)
    }

    pub fn gaussian_spread(grid: GridSpec, spread: f64) -> Result<Self> {
        Self::new(WindowFamily::Gaussian { spread }, grid, Normalization::L2)
    }

    pub fn bump(grid: GridSpec, radius: f64) -> Result<Self> {
        Self::new(WindowFamily::Bump { radius }, grid, Normalization::L2)
    }

    pub fn grid(&self) -> GridSpec {
        self.values.grid
    }

    /// Closed-form value at any point (no wrap), consistent with the samples.
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.scale * self.family.profile(x)
    }

    pub fn norm_l2(&self) -> f64 {
        self.values.norm_l2()
    }

    /// Real samples.
    pub fn real_values(&self) -> Vec<f64> {
        self.values.values.iter().map(|v| v.re).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalizations_hold() {
        let g = GridSpec::new(1, 8.0, 64).unwrap();
        let w = WindowSpec::gaussian(g).unwrap();
        assert!((w.norm_l2() - 1.0).abs() < 1e-14);
        let b = WindowSpec::new(WindowFamily::Bump { radius: 2.0 }, g, Normalization::L1).unwrap();
        assert!((b.values.norm_l1() - 1.0).abs() < 1e-14);
        assert!(b.values.values.iter().all(|v| v.re >= 0.0 && v.im == 0.0));
    }

    #[test]
    fn partition_translates_sum_to_one() {
        let g = GridSpec::new(1, 8.0, 64).unwrap();
        let fam = WindowFamily::Partition { radius: 1.5, step: 1.0 };
        for j in 0..g.points {
            let x = g.coord(j);
            let s: f64 = (-12..=12).map(|k| fam.profile(&[x - k as f64])).sum();
            assert!((s - 1.0).abs() < 1e-12, "x={x} sum={s}");
        }
    }

    #[test]
    fn wide_gaussian_on_small_box_is_rejected() {
        let g = GridSpec::new(1, 4.0, 32).unwrap();
        assert!(matches!(WindowSpec::gaussian(g), Err(Error::Fitness(_))));
        assert!(WindowSpec::gaussian_spread(g, 0.5).is_ok());
    }
}
