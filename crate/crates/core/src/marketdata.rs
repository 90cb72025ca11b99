//! Price ingestion, log returns and calendar alignment.
//!
//! Records are `(date, asset, close)` rows in delimiter-separated text with a
//! header. Each asset becomes a [`PriceSeries`]; [`compute_returns`] turns
//! those into per-asset log-return sequences, and [`align_calendars`] joins
//! them on the trading dates they have in common. Missing days are never
//! filled in.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::io::Read;

use chrono::NaiveDate;
use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Column names and delimiter of a price file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnMapping {
    pub date: String,
    pub asset: String,
    pub price: String,
    pub delimiter: u8,
}

impl Default for ColumnMapping {
    fn default() -> Self {
        Self {
            date: "date".into(),
            asset: "asset".into(),
            price: "price".into(),
            delimiter: b',',
        }
    }
}

/// Closing prices of one asset, strictly increasing in date, all positive.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceSeries {
    asset_id: String,
    observations: Vec<(NaiveDate, f64)>,
}

impl PriceSeries {
    /// Builds a series, sorting observations by date. Duplicate dates and
    /// non-positive prices are rejected.
    pub fn new(asset_id: impl Into<String>, mut observations: Vec<(NaiveDate, f64)>) -> Result<Self> {
        let asset_id = asset_id.into();
        observations.sort_by_key(|(d, _)| *d);
        for w in observations.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::asset(&asset_id, format!("duplicate date {}", w[0].0)));
            }
        }
        if let Some((d, p)) = observations.iter().find(|(_, p)| !(*p > 0.0 && p.is_finite())) {
            return Err(Error::asset(&asset_id, format!("non-positive price {p} on {d}")));
        }
        Ok(Self {
            asset_id,
            observations,
        })
    }

    pub fn asset_id(&self) -> &str {
        &self.asset_id
    }

    pub fn observations(&self) -> &[(NaiveDate, f64)] {
        &self.observations
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }
}

/// Reads one price table. See [`load_price_sources`] for several inputs.
pub fn load_price_series<R: Read>(source: R, schema: &ColumnMapping) -> Result<Vec<PriceSeries>> {
    load_price_sources(std::iter::once(source), schema)
}

/// Reads several price tables sharing one schema and groups rows by asset.
///
/// Row numbers in errors count data rows across all sources, starting at 1
/// for the first row after the first header.
pub fn load_price_sources<R, I>(sources: I, schema: &ColumnMapping) -> Result<Vec<PriceSeries>>
where
    R: Read,
    I: IntoIterator<Item = R>,
{
    let mut grouped: BTreeMap<String, BTreeMap<NaiveDate, f64>> = BTreeMap::new();
    let mut row = 0usize;
    for source in sources {
        let mut reader = csv::ReaderBuilder::new()
            .delimiter(schema.delimiter)
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(source);
        let headers = reader
            .headers()
            .map_err(|e| Error::Record { row, message: e.to_string() })?
            .clone();
        let column = |name: &str| {
            headers.iter().position(|h| h == name).ok_or_else(|| Error::Record {
                row,
                message: format!("missing column {name:?} in header"),
            })
        };
        let (date_col, asset_col, price_col) =
            (column(&schema.date)?, column(&schema.asset)?, column(&schema.price)?);

        for record in reader.records() {
            row += 1;
            let record = record.map_err(|e| Error::Record { row, message: e.to_string() })?;
            let field = |i: usize| record.get(i).unwrap_or("");
            let date = NaiveDate::parse_from_str(field(date_col), "%Y-%m-%d").map_err(|e| {
                Error::Record {
                    row,
                    message: format!("unparseable date {:?}: {e}", field(date_col)),
                }
            })?;
            let asset = field(asset_col);
            if asset.is_empty() {
                return Err(Error::Record { row, message: "empty asset id".into() });
            }
            let price: f64 = field(price_col).parse().map_err(|_| Error::Record {
                row,
                message: format!("unparseable price {:?}", field(price_col)),
            })?;
            if !(price > 0.0 && price.is_finite()) {
                return Err(Error::Record {
                    row,
                    message: format!("price must be positive, got {price}"),
                });
            }
            let series = grouped.entry(asset.to_string()).or_default();
            if series.insert(date, price).is_some() {
                return Err(Error::Record {
                    row,
                    message: format!("duplicate row for asset {asset} on {date}"),
                });
            }
        }
    }
    if grouped.is_empty() {
        return Err(Error::EmptyInput);
    }
    grouped
        .into_iter()
        .map(|(asset, obs)| PriceSeries::new(asset, obs.into_iter().collect()))
        .collect()
}

/// Log returns of a single asset before calendar alignment.
///
/// `returns[t] = ln p(t + lag) − ln p(t)`, stamped with the date of the
/// starting price `p(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AssetReturns {
    pub asset_id: String,
    pub dates: Vec<NaiveDate>,
    pub returns: Vec<f64>,
    pub lag: usize,
}

pub fn compute_returns(series: &[PriceSeries], tau: usize) -> Result<Vec<AssetReturns>> {
    if tau == 0 {
        return Err(Error::InvalidArgument("return lag tau must be at least 1".into()));
    }
    series
        .iter()
        .map(|s| {
            let obs = s.observations();
            if obs.len() <= tau {
                return Err(Error::asset(
                    s.asset_id(),
                    format!("{} prices are too few for lag {tau}", obs.len()),
                ));
            }
            let logs: Vec<f64> = obs.iter().map(|(_, p)| p.ln()).collect();
            let n = obs.len() - tau;
            Ok(AssetReturns {
                asset_id: s.asset_id().to_string(),
                dates: obs[..n].iter().map(|(d, _)| *d).collect(),
                returns: (0..n).map(|t| logs[t + tau] - logs[t]).collect(),
                lag: tau,
            })
        })
        .collect()
}

/// How dates are chosen when joining several assets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlignPolicy {
    /// A date enters the common axis when at least this fraction of assets
    /// trade on it. Assets missing any date of the axis are dropped. The
    /// default of 1.0 is the plain intersection and never drops an asset.
    pub min_coverage: f64,
}

impl Default for AlignPolicy {
    fn default() -> Self {
        Self { min_coverage: 1.0 }
    }
}

/// Bookkeeping emitted next to an aligned panel.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AlignmentReport {
    pub policy: String,
    pub min_coverage: f64,
    pub dropped_assets: Vec<String>,
    pub dates_before: usize,
    pub dates_after: usize,
}

/// Returns of several assets on one shared date axis.
///
/// `returns` is indexed `[asset, date]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnPanel {
    pub assets: Vec<String>,
    pub dates: Vec<NaiveDate>,
    pub returns: Array2<f64>,
    pub lag_days: usize,
}

impl ReturnPanel {
    pub fn new(
        assets: Vec<String>,
        dates: Vec<NaiveDate>,
        returns: Array2<f64>,
        lag_days: usize,
    ) -> Result<Self> {
        if returns.dim() != (assets.len(), dates.len()) {
            return Err(Error::InvalidArgument(format!(
                "return matrix is {:?} but panel has {} assets and {} dates",
                returns.dim(),
                assets.len(),
                dates.len()
            )));
        }
        if dates.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument("panel dates must be strictly increasing".into()));
        }
        let mut seen = HashSet::new();
        if let Some(dup) = assets.iter().find(|a| !seen.insert(a.as_str())) {
            return Err(Error::asset(dup, "appears twice in panel"));
        }
        Ok(Self {
            assets,
            dates,
            returns,
            lag_days,
        })
    }

    pub fn n_assets(&self) -> usize {
        self.assets.len()
    }

    pub fn n_dates(&self) -> usize {
        self.dates.len()
    }

    pub fn asset_index(&self, asset: &str) -> Option<usize> {
        self.assets.iter().position(|a| a == asset)
    }

    /// Return row of one asset.
    pub fn row(&self, asset: usize) -> ndarray::ArrayView1<'_, f64> {
        self.returns.row(asset)
    }

    /// The named assets only, in the given order.
    pub fn subset(&self, assets: &[String]) -> Result<ReturnPanel> {
        let rows = assets
            .iter()
            .map(|a| self.asset_index(a).ok_or_else(|| Error::asset(a, "not in panel")))
            .collect::<Result<Vec<_>>>()?;
        ReturnPanel::new(
            assets.to_vec(),
            self.dates.clone(),
            self.returns.select(ndarray::Axis(0), &rows),
            self.lag_days,
        )
    }
}

/// Joins per-asset returns on their common trading dates.
pub fn align_calendars(
    panels: &[AssetReturns],
    policy: AlignPolicy,
) -> Result<(ReturnPanel, AlignmentReport)> {
    if panels.len() < 2 {
        return Err(Error::Insufficient(format!(
            "calendar alignment needs at least 2 assets, got {}",
            panels.len()
        )));
    }
    if !(policy.min_coverage > 0.0 && policy.min_coverage <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "min_coverage must lie in (0, 1], got {}",
            policy.min_coverage
        )));
    }
    let lag = panels[0].lag;
    if let Some(p) = panels.iter().find(|p| p.lag != lag) {
        return Err(Error::asset(&p.asset_id, format!("lag {} differs from {lag}", p.lag)));
    }

    let mut counts: BTreeMap<NaiveDate, usize> = BTreeMap::new();
    for p in panels {
        for d in &p.dates {
            *counts.entry(*d).or_default() += 1;
        }
    }
    let quorum = (policy.min_coverage * panels.len() as f64 - 1e-9).ceil() as usize;
    let axis: Vec<NaiveDate> = counts
        .iter()
        .filter(|(_, &c)| c >= quorum.max(1))
        .map(|(d, _)| *d)
        .collect();

    let mut kept = Vec::new();
    let mut dropped = Vec::new();
    for p in panels {
        let own: BTreeMap<NaiveDate, f64> = p.dates.iter().copied().zip(p.returns.iter().copied()).collect();
        match axis.iter().map(|d| own.get(d).copied()).collect::<Option<Vec<f64>>>() {
            Some(row) => kept.push((p.asset_id.clone(), row)),
            None => {
                log::warn!(
                    "dropping asset {} from alignment: it does not cover the common date axis",
                    p.asset_id
                );
                dropped.push(p.asset_id.clone());
            }
        }
    }
    if axis.is_empty() {
        return Err(Error::Insufficient("assets share no trading dates".into()));
    }
    if kept.is_empty() {
        return Err(Error::Insufficient("every asset was dropped during alignment".into()));
    }

    let mut returns = Array2::zeros((kept.len(), axis.len()));
    for (i, (_, row)) in kept.iter().enumerate() {
        for (t, v) in row.iter().enumerate() {
            returns[[i, t]] = *v;
        }
    }
    let report = AlignmentReport {
        policy: "intersection".into(),
        min_coverage: policy.min_coverage,
        dropped_assets: dropped,
        dates_before: counts.len(),
        dates_after: axis.len(),
    };
    let panel = ReturnPanel::new(kept.into_iter().map(|(a, _)| a).collect(), axis, returns, lag)?;
    Ok((panel, report))
}

/// Re-indexes the returns of `tagged` assets by `offset` positions along the
/// date axis: a tagged return observed at position `t` moves to `t + offset`.
/// Only positions where every asset has a value are kept, so the panel loses
/// `|offset|` dates.
///
/// With `offset = 1`, the tagged market's return of day `t − 1` is paired
/// with the other assets' return of day `t`.
pub fn shift_returns(panel: &ReturnPanel, tagged: &[String], offset: i64) -> Result<ReturnPanel> {
    let len = panel.n_dates();
    let shift = offset.unsigned_abs() as usize;
    if shift >= len {
        return Err(Error::InvalidArgument(format!(
            "shift of {offset} days does not fit a panel of {len} dates"
        )));
    }
    let tags: HashSet<&str> = tagged.iter().map(String::as_str).collect();
    if let Some(t) = tagged.iter().find(|t| panel.asset_index(t).is_none()) {
        return Err(Error::asset(t, "tagged for shifting but not in panel"));
    }
    let new_len = len - shift;
    // positions on the original axis read by untagged and tagged rows
    let (plain_start, tagged_start) = if offset >= 0 { (shift, 0) } else { (0, shift) };
    let mut returns = Array2::zeros((panel.n_assets(), new_len));
    for (i, asset) in panel.assets.iter().enumerate() {
        let start = if tags.contains(asset.as_str()) { tagged_start } else { plain_start };
        returns
            .row_mut(i)
            .assign(&panel.returns.row(i).slice(ndarray::s![start..start + new_len]));
    }
    ReturnPanel::new(
        panel.assets.clone(),
        panel.dates[plain_start..plain_start + new_len].to_vec(),
        returns,
        panel.lag_days,
    )
}

/// Distinct dates of a set of series, ascending.
pub fn date_union(series: &[AssetReturns]) -> Vec<NaiveDate> {
    let set: BTreeSet<NaiveDate> = series.iter().flat_map(|s| s.dates.iter().copied()).collect();
    set.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn day(n: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(2000, 1, 1).unwrap() + chrono::Days::new(n as u64)
    }

    fn series(asset: &str, prices: &[f64]) -> PriceSeries {
        PriceSeries::new(asset, prices.iter().enumerate().map(|(i, p)| (day(i as u32), *p)).collect())
            .unwrap()
    }

    #[test]
    fn loads_three_rows_for_one_asset() {
        let csv = "date,asset,price\n2000-01-03,A,10\n2000-01-04,A,11\n2000-01-05,A,12\n";
        let out = load_price_series(csv.as_bytes(), &ColumnMapping::default()).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].len(), 3);
        assert_eq!(out[0].observations()[2].1, 12.0);
    }

    #[test]
    fn zero_price_names_the_row() {
        let csv = "date,asset,price\n2000-01-03,A,10\n2000-01-04,A,0\n";
        match load_price_series(csv.as_bytes(), &ColumnMapping::default()) {
            Err(Error::Record { row, .. }) => assert_eq!(row, 2),
            other => panic!("expected record error, got {other:?}"),
        }
    }

    #[test]
    fn bad_date_and_duplicates_are_record_errors() {
        let csv = "date,asset,price\n03/01/2000,A,10\n";
        assert!(matches!(
            load_price_series(csv.as_bytes(), &ColumnMapping::default()),
            Err(Error::Record { row: 1, .. })
        ));
        let csv = "date,asset,price\n2000-01-03,A,10\n2000-01-03,A,11\n";
        assert!(matches!(
            load_price_series(csv.as_bytes(), &ColumnMapping::default()),
            Err(Error::Record { row: 2, .. })
        ));
        assert!(matches!(
            load_price_series("date,asset,price\n".as_bytes(), &ColumnMapping::default()),
            Err(Error::EmptyInput)
        ));
    }

    #[test]
    fn custom_delimiter_and_column_names() {
        let csv = "day;ticker;close\n2000-01-04;X;2.5\n2000-01-03;X;2.0\n";
        let schema = ColumnMapping {
            date: "day".into(),
            asset: "ticker".into(),
            price: "close".into(),
            delimiter: b';',
        };
        let out = load_price_series(csv.as_bytes(), &schema).unwrap();
        assert_eq!(out[0].observations()[0].1, 2.0);
    }

    #[test]
    fn returns_of_exponential_prices_are_one() {
        let e = std::f64::consts::E;
        let r = compute_returns(&[series("A", &[1.0, e, e * e])], 1).unwrap();
        assert_eq!(r[0].returns.len(), 2);
        for v in &r[0].returns {
            assert!((v - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn constant_prices_give_zero_returns() {
        let r = compute_returns(&[series("A", &[5.0; 4])], 1).unwrap();
        assert_eq!(r[0].returns, vec![0.0; 3]);
    }

    #[test]
    fn returns_match_independent_logarithms() {
        let r = compute_returns(&[series("A", &[100.0, 101.0, 99.0])], 1).unwrap();
        // ln(1.01) and ln(99/101) from a high-precision calculator
        assert!((r[0].returns[0] - 0.009_950_330_853_168_083).abs() < 1e-15);
        assert!((r[0].returns[1] - (-0.020_000_666_706_669_333)).abs() < 1e-15);
    }

    #[test]
    fn short_series_names_asset() {
        let err = compute_returns(&[series("SHORT", &[1.0, 2.0])], 2).unwrap_err();
        assert!(err.to_string().contains("SHORT"));
    }

    #[test]
    fn intersection_of_offset_calendars() {
        let a = AssetReturns {
            asset_id: "A".into(),
            dates: vec![day(1), day(2), day(3)],
            returns: vec![0.1, 0.2, 0.3],
            lag: 1,
        };
        let b = AssetReturns {
            asset_id: "B".into(),
            dates: vec![day(2), day(3), day(4)],
            returns: vec![1.2, 1.3, 1.4],
            lag: 1,
        };
        let (panel, report) = align_calendars(&[a, b], AlignPolicy::default()).unwrap();
        assert_eq!(panel.dates, vec![day(2), day(3)]);
        assert_eq!(panel.returns.row(0).to_vec(), vec![0.2, 0.3]);
        assert_eq!(panel.returns.row(1).to_vec(), vec![1.2, 1.3]);
        assert!(report.dropped_assets.is_empty());
        assert_eq!(report.dates_before, 4);
    }

    #[test]
    fn disjoint_calendars_fail() {
        let a = AssetReturns { asset_id: "A".into(), dates: vec![day(1)], returns: vec![0.0], lag: 1 };
        let b = AssetReturns { asset_id: "B".into(), dates: vec![day(2)], returns: vec![0.0], lag: 1 };
        assert!(align_calendars(&[a.clone(), b], AlignPolicy::default()).is_err());
        assert!(align_calendars(&[a], AlignPolicy::default()).is_err());
    }

    #[test]
    fn lowered_coverage_keeps_holiday_and_drops_stragglers() {
        let full: Vec<NaiveDate> = (0..5).map(day).collect();
        let mut panels: Vec<AssetReturns> = (0..9)
            .map(|i| AssetReturns {
                asset_id: format!("S{i}"),
                dates: full.clone(),
                returns: vec![i as f64; 5],
                lag: 1,
            })
            .collect();
        panels.push(AssetReturns {
            asset_id: "HOL".into(),
            dates: vec![day(0), day(1), day(3), day(4)],
            returns: vec![0.0; 4],
            lag: 1,
        });
        let (strict, _) = align_calendars(&panels, AlignPolicy::default()).unwrap();
        assert_eq!(strict.n_dates(), 4);
        assert_eq!(strict.n_assets(), 10);
        let (loose, report) = align_calendars(&panels, AlignPolicy { min_coverage: 0.9 }).unwrap();
        assert_eq!(loose.n_dates(), 5);
        assert_eq!(report.dropped_assets, vec!["HOL".to_string()]);
    }

    fn panel(rows: &[&[f64]]) -> ReturnPanel {
        let n = rows[0].len();
        let flat: Vec<f64> = rows.iter().flat_map(|r| r.iter().copied()).collect();
        ReturnPanel::new(
            (0..rows.len()).map(|i| format!("X{i}")).collect(),
            (0..n as u32).map(day).collect(),
            Array2::from_shape_vec((rows.len(), n), flat).unwrap(),
            1,
        )
        .unwrap()
    }

    #[test]
    fn zero_shift_is_identity() {
        let p = panel(&[&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]]);
        assert_eq!(shift_returns(&p, &["X0".into()], 0).unwrap(), p);
    }

    #[test]
    fn positive_shift_moves_tagged_values_later() {
        let p = panel(&[&[1.0, 2.0, 3.0, 4.0], &[10.0, 20.0, 30.0, 40.0]]);
        let s = shift_returns(&p, &["X0".into()], 1).unwrap();
        assert_eq!(s.dates, p.dates[1..].to_vec());
        assert_eq!(s.returns.row(0).to_vec(), vec![1.0, 2.0, 3.0]);
        assert_eq!(s.returns.row(1).to_vec(), vec![20.0, 30.0, 40.0]);
        let s = shift_returns(&p, &["X0".into()], -2).unwrap();
        assert_eq!(s.dates, p.dates[..2].to_vec());
        assert_eq!(s.returns.row(0).to_vec(), vec![3.0, 4.0]);
        assert_eq!(s.returns.row(1).to_vec(), vec![10.0, 20.0]);
    }

    #[test]
    fn oversized_shift_and_unknown_tag_fail() {
        let p = panel(&[&[1.0, 2.0], &[3.0, 4.0]]);
        assert!(shift_returns(&p, &["X0".into()], 2).is_err());
        assert!(shift_returns(&p, &["nope".into()], 1).is_err());
    }
}
