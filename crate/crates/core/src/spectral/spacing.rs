//! Nearest-neighbour spacing statistics of unfolded spectra.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::least_squares;

/// GOE nearest-neighbour spacing density in the Wigner surmise,
/// `P(s) = (π s / 2) exp(−π s² / 4)`.
pub fn wigner_surmise_pdf(s: f64) -> f64 {
    if s < 0.0 {
        0.0
    } else {
        0.5 * PI * s * (-0.25 * PI * s * s).exp()
    }
}

pub fn wigner_surmise_cdf(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else {
        1.0 - (-0.25 * PI * s * s).exp()
    }
}

/// Spacing distribution of uncorrelated levels.
pub fn poisson_cdf(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else {
        1.0 - (-s).exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpacingConfig {
    /// Number of largest eigenvalues removed from each spectrum.
    pub drop_top: usize,
    /// Degree of the polynomial fitted to the integrated level density.
    pub unfolding_degree: usize,
    pub bins: usize,
    /// Upper edge of the histogram in units of the mean spacing.
    pub max_spacing: f64,
}

impl Default for SpacingConfig {
    fn default() -> Self {
        Self {
            drop_top: 1,
            unfolding_degree: 5,
            bins: 20,
            max_spacing: 4.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpacingStatistics {
    /// Pooled unfolded spacings, normalized to unit mean.
    pub spacings: Vec<f64>,
    /// `(bin centre, empirical density, Wigner surmise density)`.
    pub histogram: Vec<(f64, f64, f64)>,
    pub ks_wigner: f64,
    pub ks_poisson: f64,
    pub levels_used: usize,
}

impl SpacingStatistics {
    pub fn closer_to_wigner(&self) -> bool {
        self.ks_wigner < self.ks_poisson
    }
}

/// Maps sorted levels to unit mean density by fitting a polynomial of the
/// given degree to the staircase `N(E)` and evaluating it at each level.
pub fn unfold(sorted_levels: &[f64], degree: usize) -> Result<Vec<f64>> {
    let n = sorted_levels.len();
    if n < degree + 2 {
        return Err(Error::Insufficient(format!(
            "unfolding with degree {degree} needs at least {} levels, got {n}",
            degree + 2
        )));
    }
    let (lo, hi) = (sorted_levels[0], sorted_levels[n - 1]);
    let half = 0.5 * (hi - lo);
    if !(half > 0.0) {
        return Err(Error::Numeric("all levels coincide; nothing to unfold".into()));
    }
    let mid = 0.5 * (hi + lo);
    let u: Vec<f64> = sorted_levels.iter().map(|e| (e - mid) / half).collect();
    let design: Vec<Vec<f64>> = (0..=degree)
        .map(|p| u.iter().map(|x| x.powi(p as i32)).collect())
        .collect();
    let staircase: Vec<f64> = (0..n).map(|i| i as f64 + 0.5).collect();
    let coeffs = least_squares(&design, &staircase)
        .ok_or_else(|| Error::Numeric("unfolding polynomial fit is rank deficient".into()))?;
    Ok(u.iter()
        .map(|x| coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c))
        .collect())
}

fn ks_distance(sorted: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &s)| {
            let f = cdf(s);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

/// Pools the bulk of several spectra (each unfolded separately) and
/// compares the spacing distribution with the Wigner surmise and with
/// Poisson statistics via Kolmogorov–Smirnov distances.
pub fn spacing_statistics(spectra: &[Vec<f64>], config: &SpacingConfig) -> Result<SpacingStatistics> {
    if config.bins == 0 || !(config.max_spacing > 0.0) {
        return Err(Error::InvalidArgument("histogram needs bins > 0 and a positive range".into()));
    }
    let bulk: Vec<Vec<f64>> = spectra
        .iter()
        .map(|levels| {
            let mut sorted = levels.clone();
            sorted.sort_by(f64::total_cmp);
            sorted.truncate(sorted.len().saturating_sub(config.drop_top));
            sorted
        })
        .collect();
    let levels_used: usize = bulk.iter().map(Vec::len).sum();
    if levels_used < 100 {
        return Err(Error::Insufficient(format!(
            "spacing statistics need at least 100 bulk levels, got {levels_used}"
        )));
    }
    let mut spacings = Vec::with_capacity(levels_used);
    for levels in &bulk {
        let unfolded = unfold(levels, config.unfolding_degree)?;
        spacings.extend(unfolded.windows(2).map(|w| w[1] - w[0]));
    }
    let mean = spacings.iter().sum::<f64>() / spacings.len() as f64;
    if !(mean > 0.0) {
        return Err(Error::Numeric("mean unfolded spacing is not positive".into()));
    }
    for s in &mut spacings {
        *s /= mean;
    }

    let width = config.max_spacing / config.bins as f64;
    let mut counts = vec![0usize; config.bins];
    for &s in &spacings {
        if (0.0..config.max_spacing).contains(&s) {
            counts[((s / width) as usize).min(config.bins - 1)] += 1;
        }
    }
    let total = spacings.len() as f64;
    let histogram = counts
        .iter()
        .enumerate()
        .map(|(b, &c)| {
            let centre = (b as f64 + 0.5) * width;
            (centre, c as f64 / (total * width), wigner_surmise_pdf(centre))
        })
        .collect();

    let mut sorted = spacings.clone();
    sorted.sort_by(f64::total_cmp);
    Ok(SpacingStatistics {
        ks_wigner: ks_distance(&sorted, wigner_surmise_cdf),
        ks_poisson: ks_distance(&sorted, poisson_cdf),
        histogram,
        spacings,
        levels_used,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn surmise_is_normalized_with_unit_mean() {
        // midpoint quadrature on [0, 10]
        let h = 1e-4;
        let (mut mass, mut first) = (0.0, 0.0);
        for i in 0..100_000 {
            let s = (i as f64 + 0.5) * h;
            mass += wigner_surmise_pdf(s) * h;
            first += s * wigner_surmise_pdf(s) * h;
        }
        assert!((mass - 1.0).abs() < 1e-8);
        assert!((first - 1.0).abs() < 1e-8);
        assert!((wigner_surmise_cdf(1.3) - (1.0 - (-PI * 1.69 / 4.0).exp())).abs() < 1e-15);
    }

    #[test]
    fn unfolding_a_linear_spectrum_gives_unit_spacings() {
        let levels: Vec<f64> = (0..40).map(|i| 3.0 + 0.25 * i as f64).collect();
        let u = unfold(&levels, 5).unwrap();
        for w in u.windows(2) {
            assert!((w[1] - w[0] - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn too_few_levels_is_an_error() {
        let err = spacing_statistics(&[vec![1.0, 2.0]], &SpacingConfig::default()).unwrap_err();
        assert!(matches!(err, Error::Insufficient(_)));
    }

    #[test]
    fn ks_distance_of_exact_quantiles_is_half_a_step() {
        let n = 200;
        let sample: Vec<f64> = (0..n)
            .map(|i| -(1.0 - (i as f64 + 0.5) / n as f64).ln())
            .collect();
        let d = ks_distance(&sample, poisson_cdf);
        assert!((d - 0.5 / n as f64).abs() < 1e-12);
    }
}
