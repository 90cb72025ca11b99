//! Eigenspectra of correlation matrices and what they say about collectivity.
//!
//! A correlation matrix of `N` assets has trace `N`, so its eigenvalues
//! share a fixed budget. When one eigenvalue takes most of it, the assets
//! move together along the corresponding eigenvector (the "market mode");
//! the remaining eigenvalues form a noisy bulk whose level spacings can be
//! compared with random-matrix predictions ([`spacing_statistics`]).

mod jacobi;
mod spacing;

use chrono::NaiveDate;
use ndarray::{Array1, Array2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corr::{CorrelationMatrix, Window};
use crate::error::{Error, Result};

pub use jacobi::{symmetric_eigen, SYMMETRY_TOLERANCE};
pub use spacing::{
    poisson_cdf, spacing_statistics, unfold, wigner_surmise_cdf, wigner_surmise_pdf,
    SpacingConfig, SpacingStatistics,
};

/// Eigenvalues in descending order with matching orthonormal eigenvectors
/// stored as the columns of `eigenvectors`.
///
/// Each eigenvector is signed so that its largest-magnitude component is
/// positive.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSpectrum {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Array2<f64>,
    pub window: Option<Window>,
}

impl EigenSpectrum {
    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn vector(&self, k: usize) -> ndarray::ArrayView1<'_, f64> {
        self.eigenvectors.column(k)
    }

    /// Decomposes any symmetric matrix, sorted and sign-normalized.
    pub fn of_symmetric(matrix: &Array2<f64>) -> Result<Self> {
        let (values, vectors) = symmetric_eigen(matrix)?;
        Ok(sorted_spectrum(values, vectors, None))
    }
}

fn sorted_spectrum(values: Vec<f64>, mut vectors: Array2<f64>, window: Option<Window>) -> EigenSpectrum {
    let n = values.len();
    for k in 0..n {
        let mut col = vectors.column_mut(k);
        let lead = col
            .iter()
            .copied()
            .fold(0.0_f64, |best, x| if x.abs() > best.abs() { x } else { best });
        if lead < 0.0 {
            col.mapv_inplace(|x| -x);
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        values[j].total_cmp(&values[i]).then_with(|| {
            let (ci, cj) = (vectors.column(i), vectors.column(j));
            ci.iter()
                .zip(cj.iter())
                .map(|(a, b)| b.total_cmp(a))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        })
    });
    let eigenvalues = order.iter().map(|&i| values[i]).collect();
    let mut sorted = Array2::zeros((n, n));
    for (k, &i) in order.iter().enumerate() {
        sorted.column_mut(k).assign(&vectors.column(i));
    }
    EigenSpectrum { eigenvalues, eigenvectors: sorted, window }
}

pub fn eigendecompose(c: &CorrelationMatrix) -> Result<EigenSpectrum> {
    let (values, vectors) = symmetric_eigen(&c.entries)?;
    Ok(sorted_spectrum(values, vectors, Some(c.window)))
}

/// `Σ_ij p_i C_ij p_j`, the variance of a portfolio with weights `p` in
/// units of the standardized returns.
pub fn portfolio_variance(c: &CorrelationMatrix, weights: &[f64]) -> Result<f64> {
    quadratic_form(&c.entries, weights)
}

pub(crate) fn quadratic_form(m: &Array2<f64>, weights: &[f64]) -> Result<f64> {
    if weights.len() != m.nrows() {
        return Err(Error::InvalidArgument(format!(
            "weight vector has length {}, matrix has {} assets",
            weights.len(),
            m.nrows()
        )));
    }
    let p = Array1::from(weights.to_vec());
    Ok(p.dot(&m.dot(&p)))
}

/// One window of a [`RollingSpectrumTrace`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub window_end: NaiveDate,
    pub eigenvalues: Vec<f64>,
    pub leading_vector: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RollingSpectrumTrace {
    pub assets: Vec<String>,
    pub points: Vec<TracePoint>,
}

/// Decomposes every window. Window end dates must increase strictly.
pub fn spectrum_trace(matrices: &[CorrelationMatrix]) -> Result<RollingSpectrumTrace> {
    let Some(first) = matrices.first() else {
        return Err(Error::Insufficient("spectrum trace needs at least one matrix".into()));
    };
    if let Some(w) = matrices.windows(2).find(|w| w[0].window.end >= w[1].window.end) {
        return Err(Error::InvalidArgument(format!(
            "window end dates must increase, found {} then {}",
            w[0].window.end, w[1].window.end
        )));
    }
    if let Some(m) = matrices.iter().find(|m| m.assets != first.assets) {
        return Err(Error::InvalidArgument(format!(
            "window ending {} has a different asset list",
            m.window.end
        )));
    }
    let points = matrices
        .par_iter()
        .map(|c| {
            let spec = eigendecompose(c).map_err(|e| Error::Window {
                window: c.window.end.to_string(),
                source: Box::new(e),
            })?;
            Ok(TracePoint {
                window_end: c.window.end,
                leading_vector: spec.vector(0).to_vec(),
                eigenvalues: spec.eigenvalues,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RollingSpectrumTrace { assets: first.assets.clone(), points })
}

/// How strongly one eigenstate dominates a spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollectivityMetrics {
    /// `λ₁/λ₂`; infinite when `λ₂` vanishes.
    pub gap_ratio: f64,
    /// `λ₁/N`.
    pub dominance: f64,
    /// `1/Σ v₁ᵢ⁴` of the leading eigenvector, between 1 (one asset) and N
    /// (all assets equally).
    pub participation_ratio: f64,
}

pub fn collectivity_metrics(spec: &EigenSpectrum) -> Result<CollectivityMetrics> {
    metrics(&spec.eigenvalues, spec.vector(0).iter().copied())
}

impl TracePoint {
    pub fn metrics(&self) -> Result<CollectivityMetrics> {
        metrics(&self.eigenvalues, self.leading_vector.iter().copied())
    }
}

fn metrics(eigenvalues: &[f64], leading: impl Iterator<Item = f64> + Clone) -> Result<CollectivityMetrics> {
    let n = eigenvalues.len();
    if n < 2 {
        return Err(Error::Insufficient(format!("collectivity needs N >= 2, got {n}")));
    }
    let (l1, l2) = (eigenvalues[0], eigenvalues[1]);
    let gap_ratio = if l2 <= 1e-12 * n as f64 { f64::INFINITY } else { l1 / l2 };
    let norm2: f64 = leading.clone().map(|x| x * x).sum();
    let quartic: f64 = leading.map(|x| x.powi(4)).sum();
    Ok(CollectivityMetrics {
        gap_ratio,
        dominance: l1 / n as f64,
        participation_ratio: norm2 * norm2 / quartic,
    })
}
