//! Log-periodic power laws.
//!
//! Near a critical point a scale-invariant observable obeys
//! `Φ(λx) = γΦ(x)`. Besides the plain power law `x^α` with
//! `α = ln γ / ln λ`, this admits `Φ(x) = x^α Π(ln x / ln λ)` for any
//! period-one `Π`: discrete scale invariance with preferred ratio `λ`.
//! Keeping the first Fourier term of `Π` gives the model fitted here,
//!
//! ```text
//! f(x) = A x^α + B x^α osc(ω ln x + φ),   ω = 2π / ln λ,
//! ```
//!
//! where `osc` is `cos` or `|cos|` and `x = |T − T_c|` is the distance to the
//! critical time. The frequency is written through `λ` directly so that
//! `f(λx) = λ^α f(x)` holds exactly for the cosine variant.

mod extrema;
mod fit;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use extrema::{extrema_progression, ExtremaOptions, ExtremaProgression, ExtremumKind};
pub use fit::{fit_model, FitConfig, FitDiagnostics, Grid, LpplFitResult};
pub(crate) use extrema::{locate_extrema, spacing_ratios};
pub(crate) use fit::fit_known_distances;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    Cosine,
    AbsCosine,
}

impl Variant {
    #[inline]
    pub fn oscillation(self, phase: f64) -> f64 {
        match self {
            Variant::Cosine => phase.cos(),
            Variant::AbsCosine => phase.cos().abs(),
        }
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cosine" | "cos" => Ok(Variant::Cosine),
            "abs-cosine" | "abs-cos" => Ok(Variant::AbsCosine),
            _ => Err(Error::InvalidArgument(format!("unknown variant {s:?}"))),
        }
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Variant::Cosine => "cosine",
            Variant::AbsCosine => "abs-cosine",
        })
    }
}

/// Which side of the critical time the data lie on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    /// Accelerating approach, `T < T_c`, `x = T_c − T`.
    Bubble,
    /// Decelerating departure, `T > T_c`, `x = T − T_c`.
    Antibubble,
}

impl Direction {
    /// Distance to `t_c`; `None` when `t` is not strictly on the proper side.
    #[inline]
    pub fn distance(self, t: f64, t_c: f64) -> Option<f64> {
        let x = match self {
            Direction::Bubble => t_c - t,
            Direction::Antibubble => t - t_c,
        };
        (x > 0.0 && x.is_finite()).then_some(x)
    }
}

impl std::str::FromStr for Direction {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bubble" => Ok(Direction::Bubble),
            "antibubble" | "anti-bubble" => Ok(Direction::Antibubble),
            _ => Err(Error::InvalidArgument(format!("unknown direction {s:?}"))),
        }
    }
}

impl std::fmt::Display for Direction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Direction::Bubble => "bubble",
            Direction::Antibubble => "antibubble",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogPeriodicModel {
    pub t_c: f64,
    pub alpha: f64,
    /// Preferred scaling ratio, `> 1`.
    pub lambda: f64,
    pub phi: f64,
    pub a: f64,
    pub b: f64,
    pub variant: Variant,
    pub direction: Direction,
}

impl LogPeriodicModel {
    /// Angular log-frequency `2π / ln λ`.
    pub fn omega(&self) -> f64 {
        2.0 * PI / self.lambda.ln()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 1.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidArgument(format!("lambda must exceed 1, got {}", self.lambda)));
        }
        let finite = [self.t_c, self.alpha, self.phi, self.a, self.b];
        if finite.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("model parameters must be finite".into()));
        }
        Ok(())
    }

    /// Model value at distance `x > 0` from the critical time.
    #[inline]
    pub fn at_distance(&self, x: f64) -> f64 {
        let power = x.powf(self.alpha);
        let phase = self.omega() * x.ln() + self.phi;
        power * (self.a + self.b * self.variant.oscillation(phase))
    }
}

pub fn evaluate_model(model: &LogPeriodicModel, times: &[f64]) -> Result<Vec<f64>> {
    model.validate()?;
    times
        .iter()
        .enumerate()
        .map(|(index, &t)| {
            model
                .direction
                .distance(t, model.t_c)
                .map(|x| model.at_distance(x))
                .ok_or(Error::WrongSide { index, time: t, t_c: model.t_c })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleInvarianceCheck {
    pub max_residual: f64,
    /// `(x, |Φ(λx) − γΦ(x)|)` over the probe grid.
    pub residuals: Vec<(f64, f64)>,
}

/// Probes `Φ(x) = x^α` against `Φ(λx) = γΦ(x)` on `x = 2^(k/4)`,
/// `k = −8..=8`. The residual vanishes exactly when `α = ln γ / ln λ`.
pub fn check_scale_invariance(alpha: f64, lambda: f64, gamma: f64) -> Result<ScaleInvarianceCheck> {
    if !(lambda > 1.0) || !(gamma > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "need lambda > 1 and gamma > 0, got lambda = {lambda}, gamma = {gamma}"
        )));
    }
    let residuals: Vec<(f64, f64)> = (-8..=8)
        .map(|k| {
            let x = 2f64.powf(k as f64 / 4.0);
            (x, ((lambda * x).powf(alpha) - gamma * x.powf(alpha)).abs())
        })
        .collect();
    Ok(ScaleInvarianceCheck {
        max_residual: residuals.iter().map(|r| r.1).fold(0.0, f64::max),
        residuals,
    })
}

/// Critical exponent implied by a rescaling `(λ, γ)`.
pub fn critical_exponent(lambda: f64, gamma: f64) -> f64 {
    gamma.ln() / lambda.ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(alpha: f64, lambda: f64, phi: f64, a: f64, b: f64) -> LogPeriodicModel {
        LogPeriodicModel {
            t_c: 0.0,
            alpha,
            lambda,
            phi,
            a,
            b,
            variant: Variant::Cosine,
            direction: Direction::Antibubble,
        }
    }

    #[test]
    fn zero_amplitude_is_power_law() {
        let m = model(0.7, 2.0, 0.3, 1.5, 0.0);
        let v = evaluate_model(&m, &[0.5, 2.0, 9.0]).unwrap();
        for (x, y) in [0.5f64, 2.0, 9.0].iter().zip(v) {
            assert!((y - 1.5 * x.powf(0.7)).abs() < 1e-14);
        }
    }

    #[test]
    fn flat_model_is_log_periodic() {
        let m = model(0.0, 2.5, 1.1, 0.3, 0.8);
        for x in [0.01, 0.7, 3.0, 40.0] {
            assert!((m.at_distance(x) - m.at_distance(2.5 * x)).abs() < 1e-12);
        }
    }

    #[test]
    fn half_log_period_flips_sign() {
        let m = model(0.0, 2.0, 0.0, 0.0, 1.0);
        assert!((m.at_distance(1.0) - 1.0).abs() < 1e-15);
        assert!((m.at_distance(2f64.sqrt()) + 1.0).abs() < 1e-14);
    }

    #[test]
    fn wrong_side_is_reported() {
        let mut m = model(0.5, 2.0, 0.0, 1.0, 0.1);
        m.t_c = 10.0;
        m.direction = Direction::Bubble;
        match evaluate_model(&m, &[1.0, 9.0, 10.0]) {
            Err(Error::WrongSide { index, .. }) => assert_eq!(index, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn scale_invariance_probe() {
        let exact = check_scale_invariance(critical_exponent(2.0, 4.0), 2.0, 4.0).unwrap();
        assert!(exact.max_residual < 1e-12);
        let off = check_scale_invariance(1.0, 2.0, 4.0).unwrap();
        // |2x − 4x| = 2x grows with x
        assert!((off.max_residual - 8.0).abs() < 1e-12);
        assert!(off.residuals.windows(2).all(|w| w[1].1 > w[0].1));
        let flat = check_scale_invariance(critical_exponent(3.0, 1.0), 3.0, 1.0).unwrap();
        assert_eq!(critical_exponent(3.0, 1.0), 0.0);
        assert!(flat.max_residual < 1e-15);
        assert!(check_scale_invariance(1.0, 1.0, 2.0).is_err());
    }

    #[test]
    fn gauge_equivalence_of_sign_and_phase() {
        let m = model(0.3, 2.0, 0.4, 1.0, 0.5);
        let flipped = model(0.3, 2.0, 0.4 + PI, 1.0, -0.5);
        for x in [0.3, 1.0, 7.5] {
            assert!((m.at_distance(x) - flipped.at_distance(x)).abs() < 1e-14);
        }
    }
}
