//! Geometric progression of log-periodic extrema.
//!
//! Successive minima of `cos(ω ln x + φ)` sit at `x_k = x_0 λ^k`, so the
//! ratio of consecutive gaps `(x_{k+1} − x_k)/(x_k − x_{k−1})` equals `λ`.
//! For `|cos|` the minima are half a log-period apart and the ratio is `√λ`.

use serde::{Deserialize, Serialize};

use super::Direction;
use crate::error::{Error, Result};
use crate::linalg::least_squares;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExtremumKind {
    Minima,
    Maxima,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtremaOptions {
    /// Centred moving-average width; 1 disables smoothing.
    pub smoothing_width: usize,
    pub kind: ExtremumKind,
    /// Subtract a least-squares polynomial in `ln x` of this degree first.
    pub detrend_degree: Option<usize>,
}

impl Default for ExtremaOptions {
    fn default() -> Self {
        Self {
            smoothing_width: 1,
            kind: ExtremumKind::Minima,
            detrend_degree: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtremaProgression {
    /// Distances `x_k` of the located extrema, ascending.
    pub positions: Vec<f64>,
    /// Consecutive gap ratios.
    pub ratios: Vec<f64>,
    /// Geometric mean of the ratios.
    pub lambda_estimate: f64,
    pub options: ExtremaOptions,
}

/// Interior extrema of `y` sampled at increasing `u`, refined by a parabola
/// through each extremal sample and its neighbours. Returns the refined `u`.
pub(crate) fn locate_extrema(u: &[f64], y: &[f64], kind: ExtremumKind) -> Vec<f64> {
    let sign = match kind {
        ExtremumKind::Minima => 1.0,
        ExtremumKind::Maxima => -1.0,
    };
    let v: Vec<f64> = y.iter().map(|x| sign * x).collect();
    let mut out = Vec::new();
    let mut i = 1;
    while i + 1 < v.len() {
        if v[i] < v[i - 1] {
            // walk across a flat bottom
            let mut j = i;
            while j + 1 < v.len() && v[j + 1] == v[i] {
                j += 1;
            }
            if j + 1 < v.len() && v[j + 1] > v[i] {
                out.push(if j == i {
                    parabola_vertex(u[i - 1], u[i], u[i + 1], v[i - 1], v[i], v[i + 1])
                } else {
                    0.5 * (u[i] + u[j])
                });
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    out
}

fn parabola_vertex(x0: f64, x1: f64, x2: f64, y0: f64, y1: f64, y2: f64) -> f64 {
    let d0 = (y1 - y0) / (x1 - x0);
    let d1 = (y2 - y1) / (x2 - x1);
    let curvature = (d1 - d0) / (x2 - x0);
    if curvature.abs() < f64::MIN_POSITIVE {
        return x1;
    }
    // vertex of the interpolating quadratic, kept within the bracket
    (0.5 * (x0 + x1) - d0 / (2.0 * curvature)).clamp(x0, x2)
}

pub(crate) fn spacing_ratios(positions: &[f64]) -> Vec<f64> {
    positions
        .windows(3)
        .map(|w| (w[2] - w[1]) / (w[1] - w[0]))
        .collect()
}

fn moving_average(y: &[f64], width: usize) -> Vec<f64> {
    if width <= 1 {
        return y.to_vec();
    }
    let half = width / 2;
    (0..y.len())
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + width - half).min(y.len());
            y[lo..hi].iter().sum::<f64>() / (hi - lo) as f64
        })
        .collect()
}

/// Locates extrema of `(time, value)` data in `x = |T − T_c|` and measures
/// how their spacings scale.
pub fn extrema_progression(
    values: &[(f64, f64)],
    t_c: f64,
    direction: Direction,
    options: &ExtremaOptions,
) -> Result<ExtremaProgression> {
    if options.smoothing_width == 0 {
        return Err(Error::InvalidArgument("smoothing width must be at least 1".into()));
    }
    let mut points: Vec<(f64, f64)> = values
        .iter()
        .enumerate()
        .map(|(index, &(t, v))| {
            direction
                .distance(t, t_c)
                .map(|x| (x.ln(), v))
                .ok_or(Error::WrongSide { index, time: t, t_c })
        })
        .collect::<Result<_>>()?;
    points.sort_by(|a, b| a.0.total_cmp(&b.0));
    points.dedup_by(|a, b| a.0 == b.0);
    let u: Vec<f64> = points.iter().map(|p| p.0).collect();
    let mut y: Vec<f64> = moving_average(&points.iter().map(|p| p.1).collect::<Vec<_>>(), options.smoothing_width);

    if let Some(degree) = options.detrend_degree {
        let design: Vec<Vec<f64>> = (0..=degree)
            .map(|p| u.iter().map(|x| x.powi(p as i32)).collect())
            .collect();
        let coeffs = least_squares(&design, &y)
            .ok_or_else(|| Error::Numeric("detrending fit is rank deficient".into()))?;
        for (yi, ui) in y.iter_mut().zip(&u) {
            *yi -= coeffs.iter().rev().fold(0.0, |acc, c| acc * ui + c);
        }
    }

    let positions: Vec<f64> = locate_extrema(&u, &y, options.kind).into_iter().map(f64::exp).collect();
    if positions.len() < 3 {
        return Err(Error::Insufficient(format!(
            "found {} interior extrema, need at least 3",
            positions.len()
        )));
    }
    let ratios = spacing_ratios(&positions);
    let lambda_estimate = (ratios.iter().map(|r| r.ln()).sum::<f64>() / ratios.len() as f64).exp();
    Ok(ExtremaProgression {
        positions,
        ratios,
        lambda_estimate,
        options: *options,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monotone_data_has_no_extrema() {
        let data: Vec<(f64, f64)> = (0..100).map(|i| (i as f64, i as f64)).collect();
        let err = extrema_progression(&data, 200.0, Direction::Bubble, &ExtremaOptions::default());
        assert!(matches!(err, Err(Error::Insufficient(_))));
    }

    #[test]
    fn parabola_vertex_is_exact_for_quadratics() {
        let f = |x: f64| 3.0 * (x - 0.37).powi(2) + 1.0;
        let v = parabola_vertex(0.1, 0.3, 0.8, f(0.1), f(0.3), f(0.8));
        assert!((v - 0.37).abs() < 1e-14);
    }

    #[test]
    fn flat_bottom_reports_its_midpoint() {
        let u = [0.0, 1.0, 2.0, 3.0, 4.0];
        let y = [2.0, 1.0, 1.0, 1.0, 2.0];
        assert_eq!(locate_extrema(&u, &y, ExtremumKind::Minima), vec![2.0]);
        assert!(locate_extrema(&u, &y, ExtremumKind::Maxima).is_empty());
    }

    #[test]
    fn smoothing_preserves_constants() {
        let y = vec![4.0; 7];
        assert_eq!(moving_average(&y, 3), y);
        assert_eq!(moving_average(&[1.0, 2.0, 3.0], 1), vec![1.0, 2.0, 3.0]);
    }
}
