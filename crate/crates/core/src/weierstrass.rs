//! The Weierstrass random walk.
//!
//! Each step has length `b^j a` with probability `(M−1)/M · M^{−j}` and a
//! random sign. Its characteristic function is (twice) the Weierstrass
//! function
//!
//! ```text
//! p(k) = (M−1)/(2M) · Σ_{j≥0} M^{−j} cos(k b^j a),
//! ```
//!
//! which satisfies `p(k) = p(bk)/M + (M−1)/(2M) · cos(ka)`. Near `k = 0`
//! the deviation `1/2 − p(k)` therefore scales like `k^μ`, `μ = ln M / ln b`,
//! times a function that is periodic in `ln k / ln b`: the walk is
//! self-similar under rescaling by `b` only.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::least_squares;
use crate::lppl::{self, ExtremumKind, FitConfig, Grid, Variant};

/// Generator used for every simulated walk.
pub const RNG_ALGORITHM: &str = "ChaCha8Rng (rand_chacha 0.9, seed_from_u64)";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeierstrassParams {
    /// Base step length.
    pub a: f64,
    /// Step length multiplier, `> 1`.
    pub b: f64,
    /// Probability divisor, `> 1`.
    pub m: f64,
    pub truncation_tol: f64,
}

impl Default for WeierstrassParams {
    fn default() -> Self {
        Self {
            a: 1.0,
            b: 2.0,
            m: 4.0,
            truncation_tol: 1e-12,
        }
    }
}

impl WeierstrassParams {
    pub fn new(a: f64, b: f64, m: f64, truncation_tol: f64) -> Result<Self> {
        let p = Self { a, b, m, truncation_tol };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a > 0.0 && self.a.is_finite()) {
            return Err(Error::InvalidArgument(format!("step length a must be positive, got {}", self.a)));
        }
        if !(self.b > 1.0 && self.b.is_finite()) || !(self.m > 1.0 && self.m.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "need b > 1 and M > 1, got b = {}, M = {}",
                self.b, self.m
            )));
        }
        if !(self.truncation_tol > 0.0) {
            return Err(Error::InvalidArgument("truncation tolerance must be positive".into()));
        }
        Ok(())
    }

    /// `(M−1)/(2M)`.
    pub fn prefactor(&self) -> f64 {
        (self.m - 1.0) / (2.0 * self.m)
    }

    /// Scaling exponent `ln M / ln b` of the small-`k` deviation.
    pub fn exponent(&self) -> f64 {
        self.m.ln() / self.b.ln()
    }

    /// Number of terms `J` after which the tail bound drops below the
    /// tolerance.
    pub fn terms(&self) -> usize {
        // tail after J terms: c · M^{−J} / (1 − 1/M)
        let c = self.prefactor() / (1.0 - 1.0 / self.m);
        let mut j = 0usize;
        let mut bound = c;
        while bound >= self.truncation_tol {
            j += 1;
            bound /= self.m;
        }
        j.max(1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeierstrassValue {
    pub value: f64,
    /// Terms summed.
    pub terms: usize,
}

pub fn weierstrass_p(k: f64, params: &WeierstrassParams) -> Result<WeierstrassValue> {
    params.validate()?;
    let terms = params.terms();
    let mut sum = 0.0;
    let mut weight = 1.0;
    let mut length = params.a;
    for _ in 0..terms {
        sum += weight * (k * length).cos();
        weight /= params.m;
        length *= params.b;
    }
    Ok(WeierstrassValue { value: params.prefactor() * sum, terms })
}

/// `1/2 − p(k)` summed as `Σ M^{−j} · 2 sin²(k b^j a / 2)`, which keeps full
/// relative precision for small `k`.
fn deviation_from_half(k: f64, params: &WeierstrassParams, terms: usize) -> f64 {
    let mut sum = 0.0;
    let mut weight = 1.0;
    let mut length = params.a;
    for _ in 0..terms {
        let s = (0.5 * k * length).sin();
        sum += weight * 2.0 * s * s;
        weight /= params.m;
        length *= params.b;
    }
    params.prefactor() * sum
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalkTrajectory {
    /// Positions after 0, 1, …, n steps.
    pub positions: Vec<f64>,
    /// Hierarchy level `j` of each step.
    pub levels: Vec<u32>,
    pub seed: u64,
    pub rng: String,
}

/// Simulates `n_steps` of the walk from the origin.
pub fn simulate_walk(params: &WeierstrassParams, n_steps: usize, seed: u64) -> Result<WalkTrajectory> {
    params.validate()?;
    if n_steps == 0 {
        return Err(Error::InvalidArgument("walk needs at least one step".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ln_q = -params.m.ln();
    let mut positions = Vec::with_capacity(n_steps + 1);
    let mut levels = Vec::with_capacity(n_steps);
    let mut x = 0.0;
    positions.push(x);
    for _ in 0..n_steps {
        // P(j) = (1 − 1/M) M^{−j} by inversion of a uniform on (0, 1]
        let u: f64 = 1.0 - rng.random::<f64>();
        let j = (u.ln() / ln_q).floor() as u32;
        let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
        x += sign * params.a * params.b.powi(j as i32);
        positions.push(x);
        levels.push(j);
    }
    Ok(WalkTrajectory { positions, levels, seed, rng: RNG_ALGORITHM.to_string() })
}

/// Exact probability of hierarchy level `j`.
pub fn level_probability(params: &WeierstrassParams, j: u32) -> f64 {
    (1.0 - 1.0 / params.m) * params.m.powi(-(j as i32))
}

/// Log-spaced wavenumbers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogGrid {
    pub k_min: f64,
    pub k_max: f64,
    pub points: usize,
}

impl LogGrid {
    pub fn values(&self) -> Vec<f64> {
        let (lo, hi) = (self.k_min.ln(), self.k_max.ln());
        let n = self.points.max(2);
        (0..n).map(|i| (lo + (hi - lo) * i as f64 / (n - 1) as f64).exp()).collect()
    }

    pub fn decades(&self) -> f64 {
        (self.k_max / self.k_min).log10()
    }
}

impl Default for LogGrid {
    fn default() -> Self {
        Self { k_min: 1e-4, k_max: 1e-1, points: 3000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelfSimilarity {
    /// Wavenumbers of the deepest minimum in each log-period, ascending.
    pub minima: Vec<f64>,
    pub ratios: Vec<f64>,
    /// Geometric mean of the ratios.
    pub lambda_estimate: f64,
    /// Scaling ratio from a first-harmonic log-periodic fit.
    pub lambda_fit: f64,
    /// `|λ_estimate − b| / b`.
    pub relative_deviation: f64,
    pub exponent: f64,
}

/// Recovers the preferred scaling ratio from `p(k)` alone.
///
/// The scaled deviation `(1/2 − p(k)) / k^μ` is detrended in `ln k` (for
/// `μ = 2` it drifts linearly in `ln k`; for `μ ≠ 2` a `k^{2−μ}` term is
/// removed as well), leaving a log-periodic remainder. A cosine in `ln k` is
/// fitted to it to fix the log-period; the deepest minimum inside each
/// period then gives the extrema used for the spacing ratios.
pub fn analyze_self_similarity(params: &WeierstrassParams, grid: &LogGrid) -> Result<SelfSimilarity> {
    params.validate()?;
    if !(grid.k_min > 0.0 && grid.k_max > grid.k_min) {
        return Err(Error::InvalidArgument("k grid needs 0 < k_min < k_max".into()));
    }
    if grid.decades() < 3.0 - 1e-9 {
        return Err(Error::InvalidArgument(format!(
            "k grid spans {:.2} decades, need at least 3",
            grid.decades()
        )));
    }
    let ks = grid.values();
    let mu = params.exponent();
    let terms = params.terms();
    let scaled: Vec<f64> = ks
        .iter()
        .map(|&k| deviation_from_half(k, params, terms) / k.powf(mu))
        .collect();
    let u: Vec<f64> = ks.iter().map(|k| k.ln()).collect();

    let mut design = vec![vec![1.0; ks.len()], u.clone()];
    if (2.0 - mu).abs() > 1e-6 {
        design.push(ks.iter().map(|k| k.powf(2.0 - mu)).collect());
    }
    let trend = least_squares(&design, &scaled)
        .ok_or_else(|| Error::Numeric("detrending fit is rank deficient".into()))?;
    let residual: Vec<f64> = scaled
        .iter()
        .enumerate()
        .map(|(i, s)| s - design.iter().zip(&trend).map(|(col, c)| col[i] * c).sum::<f64>())
        .collect();

    let lambda_hi = (2.0 * params.b).max(4.0);
    let fit = lppl::fit_known_distances(
        &ks,
        &residual,
        &FitConfig {
            lambda_grid: Grid::new(1.1, lambda_hi, 400),
            alpha_grid: Grid::fixed(0.0),
            variant: Variant::Cosine,
            ..FitConfig::default()
        },
    )?;
    let period = fit.lambda.ln();

    let candidates = lppl::locate_extrema(&u, &residual, ExtremumKind::Minima);
    let value_at = |x: f64| {
        let i = u.partition_point(|v| *v < x).min(u.len() - 1);
        residual[i]
    };
    // keep a minimum only if it is the deepest within half a period either side
    let minima: Vec<f64> = candidates
        .iter()
        .copied()
        .filter(|&c| {
            let depth = value_at(c);
            candidates
                .iter()
                .all(|&o| o == c || (o - c).abs() >= 0.5 * period || value_at(o) > depth)
        })
        .filter(|&c| c - u[0] > 0.25 * period && u[u.len() - 1] - c > 0.25 * period)
        .map(f64::exp)
        .collect();
    if minima.len() < 3 {
        return Err(Error::Insufficient(format!(
            "found {} log-periodic minima, need at least 3",
            minima.len()
        )));
    }
    let ratios = lppl::spacing_ratios(&minima);
    let lambda_estimate = (ratios.iter().map(|r| r.ln()).sum::<f64>() / ratios.len() as f64).exp();
    Ok(SelfSimilarity {
        relative_deviation: (lambda_estimate - params.b).abs() / params.b,
        minima,
        ratios,
        lambda_estimate,
        lambda_fit: fit.lambda,
        exponent: mu,
    })
}

/// `p(k) − p(bk)/M − (M−1)/(2M) cos(ka)`, zero up to truncation.
///
/// In floating point the terms with `k b^j a ≳ 1/ε` carry rounding noise of
/// weight `M^{−j}`, so the residual only reaches the truncation tolerance
/// when `μ = ln M / ln b` is not small (`μ ≥ 1.5` is ample for `|k| ≤ 10`).
pub fn renewal_residual(k: f64, params: &WeierstrassParams) -> Result<f64> {
    let p = weierstrass_p(k, params)?.value;
    let pb = weierstrass_p(params.b * k, params)?.value;
    Ok(p - pb / params.m - params.prefactor() * (k * params.a).cos())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn value_at_origin_is_one_half() {
        for (b, m) in [(2.0, 4.0), (3.0, 9.0), (1.5, 1.2)] {
            let p = WeierstrassParams::new(0.7, b, m, 1e-12).unwrap();
            let v = weierstrass_p(0.0, &p).unwrap();
            assert!((v.value - 0.5).abs() < 1e-12, "{b} {m}: {}", v.value);
        }
    }

    #[test]
    fn even_in_k() {
        let p = WeierstrassParams::default();
        for k in [0.1, 1.7, 33.0] {
            assert_eq!(weierstrass_p(k, &p).unwrap().value, weierstrass_p(-k, &p).unwrap().value);
        }
    }

    #[test]
    fn matches_long_direct_sum() {
        let p = WeierstrassParams::default();
        let k = PI;
        // 200-term oracle; the tail beyond j = 200 is below 4^-200
        let mut oracle = 0.0;
        for j in 0..200 {
            oracle += 4f64.powi(-j) * (k * 2f64.powi(j)).cos();
        }
        oracle *= 3.0 / 8.0;
        let got = weierstrass_p(k, &p).unwrap();
        assert!((got.value - oracle).abs() < 1e-12);
        assert!(got.terms < 200);
    }

    #[test]
    fn terms_follow_tail_bound() {
        let p = WeierstrassParams::default();
        let j = p.terms();
        let tail = |j: usize| 3.0 / 8.0 * 4f64.powi(-(j as i32)) / 0.75;
        assert!(tail(j) < 1e-12 && tail(j - 1) >= 1e-12);
    }

    #[test]
    fn invalid_params() {
        assert!(WeierstrassParams::new(1.0, 1.0, 4.0, 1e-12).is_err());
        assert!(WeierstrassParams::new(1.0, 2.0, 1.0, 1e-12).is_err());
        assert!(WeierstrassParams::new(0.0, 2.0, 4.0, 1e-12).is_err());
    }

    #[test]
    fn walk_is_reproducible() {
        let p = WeierstrassParams::default();
        let a = simulate_walk(&p, 1000, 42).unwrap();
        let b = simulate_walk(&p, 1000, 42).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.positions.len(), 1001);
        assert_eq!(a.positions[0], 0.0);
        let c = simulate_walk(&p, 1000, 43).unwrap();
        assert_ne!(a.positions, c.positions);
        assert!(simulate_walk(&p, 0, 1).is_err());
    }

    #[test]
    fn level_masses_sum_to_one() {
        let p = WeierstrassParams::default();
        let total: f64 = (0..60).map(|j| level_probability(&p, j)).sum();
        assert!((total - 1.0).abs() < 1e-15);
    }

    #[test]
    fn short_grid_is_rejected() {
        let grid = LogGrid { k_min: 1e-3, k_max: 1e-1, points: 100 };
        assert!(analyze_self_similarity(&WeierstrassParams::default(), &grid).is_err());
    }
}
