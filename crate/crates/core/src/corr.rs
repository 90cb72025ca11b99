//! Windowed Pearson correlation matrices.
//!
//! Entries are `C_ij = (⟨G_i G_j⟩ − ⟨G_i⟩⟨G_j⟩) / (σ_i σ_j)` with plain
//! window averages and population volatilities. Some printings of this
//! formula carry `⟨G_i⟩⟨G_i⟩` in the cross term; that form is neither
//! symmetric nor unit-diagonal, so the standard `⟨G_i⟩⟨G_j⟩` is used.

use std::ops::Range;

use chrono::NaiveDate;
use ndarray::{Array2, ArrayView1};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::marketdata::{align_calendars, shift_returns, AlignPolicy, AssetReturns, ReturnPanel};

/// Default single-market window, in trading days.
pub const DEFAULT_WINDOW: usize = 30;
/// Default window for the two-market matrix, in trading days.
pub const DEFAULT_GLOBAL_WINDOW: usize = 60;

/// The dates a matrix was estimated from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub start: NaiveDate,
    pub end: NaiveDate,
    /// Number of return observations.
    pub len: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    pub assets: Vec<String>,
    pub entries: Array2<f64>,
    pub window: Window,
    /// For a two-market matrix: the first `block_split` assets belong to
    /// market A, the rest to market B.
    pub block_split: Option<usize>,
}

impl CorrelationMatrix {
    pub fn n(&self) -> usize {
        self.assets.len()
    }

    pub fn trace(&self) -> f64 {
        self.entries.diag().sum()
    }

    /// One diagonal block of a two-market matrix.
    pub fn block(&self, market: Market) -> Option<Array2<f64>> {
        let split = self.block_split?;
        let range = match market {
            Market::A => 0..split,
            Market::B => split..self.n(),
        };
        Some(self.entries.slice(ndarray::s![range.clone(), range]).to_owned())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Market {
    A,
    B,
}

fn mean(x: ArrayView1<'_, f64>) -> f64 {
    x.sum() / x.len() as f64
}

/// Correlation matrix of `panel` over the date positions in `window`.
pub fn correlation_matrix(panel: &ReturnPanel, window: Range<usize>) -> Result<CorrelationMatrix> {
    let t = window.len();
    if t < 2 {
        return Err(Error::InvalidArgument(format!("window needs at least 2 observations, got {t}")));
    }
    if window.end > panel.n_dates() {
        return Err(Error::InvalidArgument(format!(
            "window {}..{} exceeds panel of {} dates",
            window.start,
            window.end,
            panel.n_dates()
        )));
    }
    let info = Window {
        start: panel.dates[window.start],
        end: panel.dates[window.end - 1],
        len: t,
    };
    let n = panel.n_assets();

    // centred rows; ⟨G_iG_j⟩ − ⟨G_i⟩⟨G_j⟩ equals the mean of centred products
    let mut centred = Array2::<f64>::zeros((n, t));
    let mut sigma = vec![0.0; n];
    for i in 0..n {
        let row = panel.returns.slice(ndarray::s![i, window.clone()]);
        let mu = mean(row);
        let max_abs = row.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let mut c = centred.row_mut(i);
        c.assign(&row.mapv(|v| v - mu));
        let var = c.iter().map(|v| v * v).sum::<f64>() / t as f64;
        sigma[i] = var.sqrt();
        if row.iter().all(|v| *v == row[0]) || sigma[i] <= 1e-14 * max_abs {
            return Err(Error::ZeroVolatility {
                asset: panel.assets[i].clone(),
                start: info.start.to_string(),
                end: info.end.to_string(),
            });
        }
    }

    let mut entries = Array2::<f64>::eye(n);
    for i in 0..n {
        let ci = centred.row(i);
        for j in (i + 1)..n {
            let cov = ci.dot(&centred.row(j)) / t as f64;
            let c = (cov / (sigma[i] * sigma[j])).clamp(-1.0, 1.0);
            entries[[i, j]] = c;
            entries[[j, i]] = c;
        }
    }
    Ok(CorrelationMatrix {
        assets: panel.assets.clone(),
        entries,
        window: info,
        block_split: None,
    })
}

/// Matrices over sliding windows of `window_length` dates advancing by
/// `step`, in date order.
pub fn rolling_correlation(
    panel: &ReturnPanel,
    window_length: usize,
    step: usize,
) -> Result<Vec<CorrelationMatrix>> {
    if window_length < 2 {
        return Err(Error::InvalidArgument(format!(
            "window length must be at least 2, got {window_length}"
        )));
    }
    if step == 0 {
        return Err(Error::InvalidArgument("window step must be at least 1".into()));
    }
    if panel.n_dates() < window_length {
        return Err(Error::Insufficient(format!(
            "panel has {} dates, fewer than the window length {window_length}",
            panel.n_dates()
        )));
    }
    let starts: Vec<usize> = (0..=panel.n_dates() - window_length).step_by(step).collect();
    starts
        .par_iter()
        .map(|&s| correlation_matrix(panel, s..s + window_length))
        .collect()
}

/// Joins two markets on their common dates. Market A's assets come first.
pub fn merge_markets(panel_a: &ReturnPanel, panel_b: &ReturnPanel) -> Result<(ReturnPanel, usize)> {
    if panel_a.lag_days != panel_b.lag_days {
        return Err(Error::InvalidArgument(format!(
            "markets use different return lags ({} vs {})",
            panel_a.lag_days, panel_b.lag_days
        )));
    }
    if let Some(dup) = panel_a.assets.iter().find(|a| panel_b.asset_index(a).is_some()) {
        return Err(Error::asset(dup, "present in both markets"));
    }
    let to_series = |p: &ReturnPanel| -> Vec<AssetReturns> {
        p.assets
            .iter()
            .enumerate()
            .map(|(i, a)| AssetReturns {
                asset_id: a.clone(),
                dates: p.dates.clone(),
                returns: p.row(i).to_vec(),
                lag: p.lag_days,
            })
            .collect()
    };
    let mut all = to_series(panel_a);
    all.extend(to_series(panel_b));
    let (merged, _) = align_calendars(&all, AlignPolicy::default())?;
    Ok((merged, panel_a.n_assets()))
}

/// Merges two markets and applies the cross-market shift to market A.
pub fn merged_shifted_panel(
    panel_a: &ReturnPanel,
    panel_b: &ReturnPanel,
    shift_days: i64,
) -> Result<(ReturnPanel, usize)> {
    let (merged, split) = merge_markets(panel_a, panel_b)?;
    let shifted = shift_returns(&merged, &panel_a.assets, shift_days)?;
    Ok((shifted, split))
}

/// Two-market correlation matrix over `window` positions of the merged,
/// shifted panel (see [`merged_shifted_panel`]).
pub fn global_correlation(
    panel_a: &ReturnPanel,
    panel_b: &ReturnPanel,
    window: Range<usize>,
    shift_days: i64,
) -> Result<CorrelationMatrix> {
    let (panel, split) = merged_shifted_panel(panel_a, panel_b, shift_days)?;
    let mut c = correlation_matrix(&panel, window)?;
    c.block_split = Some(split);
    Ok(c)
}

/// Rolling version of [`global_correlation`].
pub fn rolling_global_correlation(
    panel_a: &ReturnPanel,
    panel_b: &ReturnPanel,
    window_length: usize,
    step: usize,
    shift_days: i64,
) -> Result<Vec<CorrelationMatrix>> {
    let (panel, split) = merged_shifted_panel(panel_a, panel_b, shift_days)?;
    let mut out = rolling_correlation(&panel, window_length, step)?;
    for c in &mut out {
        c.block_split = Some(split);
    }
    Ok(out)
}
