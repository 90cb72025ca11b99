use std::fs::File;
use std::ops::Range;
use std::path::{Path, PathBuf};

use chrono::{NaiveDate, TimeDelta};
use collectivity::corr::{self, DEFAULT_GLOBAL_WINDOW, DEFAULT_WINDOW};
use collectivity::lppl::{
    evaluate_model, extrema_progression, fit_model, Direction, ExtremaOptions, ExtremumKind, FitConfig,
    FitDiagnostics, Grid, Variant,
};
use collectivity::marketdata::{
    align_calendars, compute_returns, load_price_sources, AlignPolicy, AlignmentReport, ColumnMapping,
    PriceSeries, ReturnPanel,
};
use collectivity::report::{self, format_float as fmt, MatrixMetadata};
use collectivity::rpa::{self, SchematicRpaModel};
use collectivity::spectral::{self, RollingSpectrumTrace, SpacingConfig};
use collectivity::weierstrass::{self, LogGrid, WeierstrassParams};
use serde::Serialize;

use crate::args::{Cli, Command};
use crate::config::{parse_field, RunConfig};
use crate::output::{self, Outputs};
use crate::CliError;

const DATE_FORMAT: &str = "%Y-%m-%d";

pub fn run(cli: Cli) -> Result<(), CliError> {
    let mut cfg = cli.run_config()?;
    cfg.check_paths()?;
    let out_dir = cfg.out_dir.get_or_insert_with(|| PathBuf::from("out")).clone();
    cfg.seed.get_or_insert(0);
    let mut out = Outputs::default();
    match &cli.command {
        Command::Returns { .. } => returns(&mut cfg, &mut out)?,
        Command::Corr { .. } => correlation(&mut cfg, &mut out)?,
        Command::Spectrum { .. } => spectrum(&mut cfg, &mut out)?,
        Command::GlobalSpectrum { .. } => global_spectrum(&mut cfg, &mut out)?,
        Command::LpplFit { .. } => lppl_fit(&mut cfg, &mut out)?,
        Command::Extrema { .. } => extrema(&mut cfg, &mut out)?,
        Command::WeierstrassEval { .. } => weierstrass_eval(&mut cfg, &mut out)?,
        Command::WeierstrassWalk { .. } => weierstrass_walk(&mut cfg, &mut out)?,
        Command::RpaDemo { .. } => rpa_demo(&mut cfg, &mut out)?,
        Command::SpacingStats { .. } => spacing_stats(&mut cfg, &mut out)?,
    }
    output::write_all(&out_dir, cli.command.name(), &cfg, &out)
}

// ---------------------------------------------------------------- inputs

fn schema(cfg: &mut RunConfig) -> Result<ColumnMapping, CliError> {
    let delimiter = *cfg.delimiter.get_or_insert(',');
    if !delimiter.is_ascii() {
        return Err(CliError::usage(format!("delimiter {delimiter:?} is not a single ASCII character")));
    }
    Ok(ColumnMapping {
        date: cfg.date_column.get_or_insert_with(|| "date".into()).clone(),
        asset: cfg.asset_column.get_or_insert_with(|| "asset".into()).clone(),
        price: cfg.price_column.get_or_insert_with(|| "price".into()).clone(),
        delimiter: delimiter as u8,
    })
}

fn required<'a>(paths: &'a Option<Vec<PathBuf>>, flag: &str) -> Result<&'a [PathBuf], CliError> {
    match paths {
        Some(p) if !p.is_empty() => Ok(p),
        _ => Err(CliError::usage(format!("{flag} is required"))),
    }
}

fn open(path: &Path) -> Result<File, CliError> {
    File::open(path).map_err(|e| CliError::data(format!("cannot open {}: {e}", path.display())))
}

fn load_prices(paths: &[PathBuf], schema: &ColumnMapping) -> Result<Vec<PriceSeries>, CliError> {
    let files = paths.iter().map(|p| open(p)).collect::<Result<Vec<_>, _>>()?;
    Ok(load_price_sources(files, schema)?)
}

fn policy(cfg: &mut RunConfig) -> AlignPolicy {
    AlignPolicy { min_coverage: *cfg.min_coverage.get_or_insert(1.0) }
}

fn price_panel(cfg: &mut RunConfig) -> Result<(ReturnPanel, AlignmentReport), CliError> {
    let paths = required(&cfg.inputs, "--input")?.to_vec();
    let schema = schema(cfg)?;
    let tau = *cfg.tau.get_or_insert(1);
    let policy = policy(cfg);
    let returns = compute_returns(&load_prices(&paths, &schema)?, tau)?;
    Ok(align_calendars(&returns, policy)?)
}

/// Both markets aligned on one calendar, then split back into two panels.
struct Markets {
    a: ReturnPanel,
    b: ReturnPanel,
    report: AlignmentReport,
}

fn market_panels(cfg: &mut RunConfig) -> Result<Markets, CliError> {
    let paths_a = required(&cfg.market_a, "--market-a")?.to_vec();
    let paths_b = required(&cfg.market_b, "--market-b")?.to_vec();
    let schema = schema(cfg)?;
    let tau = *cfg.tau.get_or_insert(1);
    let policy = policy(cfg);
    let series_a = load_prices(&paths_a, &schema)?;
    let series_b = load_prices(&paths_b, &schema)?;
    let names_a: Vec<String> = series_a.iter().map(|s| s.asset_id().to_string()).collect();
    if let Some(dup) = series_b.iter().find(|s| names_a.iter().any(|a| a == s.asset_id())) {
        return Err(CliError::data(format!("asset {} appears in both markets", dup.asset_id())));
    }
    let mut returns = compute_returns(&series_a, tau)?;
    returns.extend(compute_returns(&series_b, tau)?);
    let (joint, report) = align_calendars(&returns, policy)?;
    let split = |in_a: bool| -> Result<ReturnPanel, CliError> {
        let names: Vec<String> = joint
            .assets
            .iter()
            .filter(|a| names_a.contains(a) == in_a)
            .cloned()
            .collect();
        if names.is_empty() {
            return Err(CliError::data(format!(
                "market {} has no assets left after alignment",
                if in_a { "A" } else { "B" }
            )));
        }
        Ok(joint.subset(&names)?)
    };
    Ok(Markets { a: split(true)?, b: split(false)?, report })
}

fn parse_date(name: &str, s: &str) -> Result<NaiveDate, CliError> {
    NaiveDate::parse_from_str(s, DATE_FORMAT)
        .map_err(|e| CliError::usage(format!("invalid {name} {s:?}: {e}")))
}

/// `(time, value)` points with the calendar origin when they came from prices.
struct Series {
    origin: Option<NaiveDate>,
    points: Vec<(f64, f64)>,
}

impl Series {
    fn date_of(&self, t: f64) -> Option<String> {
        let origin = self.origin?;
        let days = t.round();
        if !days.is_finite() || days.abs() > 1e6 {
            return None;
        }
        origin
            .checked_add_signed(TimeDelta::days(days as i64))
            .map(|d| d.format(DATE_FORMAT).to_string())
    }

    /// Critical time given as an ISO date or as a number of days.
    fn time_of(&self, s: &str) -> Result<f64, CliError> {
        if let Ok(d) = NaiveDate::parse_from_str(s, DATE_FORMAT) {
            let origin = self
                .origin
                .ok_or_else(|| CliError::usage("a calendar t_c needs price input, not --series"))?;
            return Ok((d - origin).num_days() as f64);
        }
        parse_field("t_c", s)
    }
}

fn load_series(cfg: &mut RunConfig) -> Result<Series, CliError> {
    if let Some(path) = cfg.series.clone() {
        let delimiter = *cfg.delimiter.get_or_insert(',');
        let mut reader = csv::ReaderBuilder::new()
            .delimiter(delimiter as u8)
            .trim(csv::Trim::All)
            .from_reader(open(&path)?);
        let bad = |row: usize, msg: String| CliError::data(format!("{} row {row}: {msg}", path.display()));
        let headers = reader.headers().map_err(|e| bad(0, e.to_string()))?.clone();
        let col = |name: &str| {
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| CliError::data(format!("{} has no {name:?} column", path.display())))
        };
        let (ti, vi) = (col("t")?, col("value")?);
        let mut points = Vec::new();
        for (row, record) in reader.records().enumerate() {
            let record = record.map_err(|e| bad(row + 1, e.to_string()))?;
            let field = |i: usize| -> Result<f64, CliError> {
                record
                    .get(i)
                    .unwrap_or_default()
                    .parse()
                    .map_err(|e| bad(row + 1, format!("{e}")))
            };
            points.push((field(ti)?, field(vi)?));
        }
        return Ok(Series { origin: None, points });
    }

    let paths = required(&cfg.inputs, "--input or --series")?.to_vec();
    let schema = schema(cfg)?;
    let all = load_prices(&paths, &schema)?;
    let series = match &cfg.asset {
        Some(id) => all
            .iter()
            .find(|s| s.asset_id() == id)
            .ok_or_else(|| CliError::data(format!("asset {id} not found in the inputs")))?,
        None if all.len() == 1 => &all[0],
        None => {
            return Err(CliError::usage(format!(
                "inputs hold {} assets; choose one with --asset",
                all.len()
            )))
        }
    };
    cfg.asset.get_or_insert_with(|| series.asset_id().to_string());
    let start = cfg.start.as_deref().map(|s| parse_date("start", s)).transpose()?;
    let end = cfg.end.as_deref().map(|s| parse_date("end", s)).transpose()?;
    let kept: Vec<(NaiveDate, f64)> = series
        .observations()
        .iter()
        .copied()
        .filter(|(d, _)| start.is_none_or(|s| *d >= s) && end.is_none_or(|e| *d <= e))
        .collect();
    let Some(&(origin, _)) = kept.first() else {
        return Err(CliError::data("no prices inside the selected date range"));
    };
    Ok(Series {
        origin: Some(origin),
        points: kept
            .iter()
            .map(|(d, p)| ((*d - origin).num_days() as f64, p.ln()))
            .collect(),
    })
}

// ---------------------------------------------------------------- tables

fn cells(values: impl IntoIterator<Item = f64>) -> Vec<String> {
    values.into_iter().map(fmt).collect()
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    match v.len() {
        0 => f64::NAN,
        n if n % 2 == 1 => v[n / 2],
        n => 0.5 * (v[n / 2 - 1] + v[n / 2]),
    }
}

/// JSON has no infinity; large but finite gap ratios are kept as numbers.
fn finite_or_none(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

#[derive(Serialize)]
struct TraceSummary<'a> {
    assets: &'a [String],
    windows: usize,
    window_length: usize,
    step: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    block_split: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    shift_days: Option<i64>,
    median_lambda_1: f64,
    median_gap_ratio: Option<f64>,
    median_dominance: f64,
    median_participation_ratio: f64,
    alignment: &'a AlignmentReport,
}

struct Medians {
    lambda_1: f64,
    gap_ratio: Option<f64>,
    dominance: f64,
    participation_ratio: f64,
}

/// Writes the trace tables and returns per-window medians.
fn trace_outputs(out: &mut Outputs, trace: &RollingSpectrumTrace) -> Result<Medians, CliError> {
    out.table("trace.tsv", |w| report::write_trace(w, trace));
    out.table("leading_vectors.tsv", |w| report::write_leading_vectors(w, trace));
    let metrics = trace
        .points
        .iter()
        .map(|p| p.metrics())
        .collect::<collectivity::Result<Vec<_>>>()?;
    let rows: Vec<Vec<String>> = trace
        .points
        .iter()
        .zip(&metrics)
        .map(|(p, m)| {
            vec![
                p.window_end.to_string(),
                fmt(m.gap_ratio),
                fmt(m.dominance),
                fmt(m.participation_ratio),
            ]
        })
        .collect();
    out.table("collectivity.tsv", |w| {
        report::write_table(w, &["window_end_date", "gap_ratio", "dominance", "participation_ratio"], &rows)
    });
    let pick = |f: fn(&spectral::CollectivityMetrics) -> f64| median(&metrics.iter().map(f).collect::<Vec<_>>());
    Ok(Medians {
        lambda_1: median(&trace.points.iter().map(|p| p.eigenvalues[0]).collect::<Vec<_>>()),
        gap_ratio: finite_or_none(pick(|m| m.gap_ratio)),
        dominance: pick(|m| m.dominance),
        participation_ratio: pick(|m| m.participation_ratio),
    })
}

// ---------------------------------------------------------------- subcommands

fn returns(cfg: &mut RunConfig, out: &mut Outputs) -> Result<(), CliError> {
    let (panel, report) = price_panel(cfg)?;
    out.table("returns.tsv", |w| report::write_returns(w, &panel));
    out.json("alignment.json", &report);
    Ok(())
}

fn window_ending(dates: &[NaiveDate], length: usize, end: Option<&str>) -> Result<Range<usize>, CliError> {
    let last = match end {
        None => dates.len().checked_sub(1).ok_or_else(|| CliError::data("no dates after alignment"))?,
        Some(s) => {
            let d = parse_date("window_end", s)?;
            dates
                .binary_search(&d)
                .map_err(|_| CliError::data(format!("{d} is not a date of the aligned panel")))?
        }
    };
    if last + 1 < length {
        return Err(CliError::data(format!(
            "window of {length} dates ending at position {} does not fit the panel",
            last + 1
        )));
    }
    Ok(last + 1 - length..last + 1)
}

fn correlation(cfg: &mut RunConfig, out: &mut Outputs) -> Result<(), CliError> {
    let global = cfg.market_a.is_some() || cfg.market_b.is_some();
    let (matrix, report) = if global {
        let length = *cfg.window_length.get_or_insert(DEFAULT_GLOBAL_WINDOW);
        let shift = *cfg.shift_days.get_or_insert(0);
        let m = market_panels(cfg)?;
        let (panel, split) = corr::merged_shifted_panel(&m.a, &m.b, shift)?;
        let range = window_ending(&panel.dates, length, cfg.window_end.as_deref())?;
        let mut c = corr::correlation_matrix(&panel, range)?;
        c.block_split = Some(split);
        (c, m.report)
    } else {
        let length = *cfg.window_length.get_or_insert(DEFAULT_WINDOW);
        let (panel, report) = price_panel(cfg)?;
        let range = window_ending(&panel.dates, length, cfg.window_end.as_deref())?;
        (corr::correlation_matrix(&panel, range)?, report)
    };
    cfg.window_end.get_or_insert_with(|| matrix.window.end.to_string());
    out.table("corr_matrix.tsv", |w| report::write_matrix(w, &matrix));
    out.json("corr_matrix.json", &MatrixMetadata::from(&matrix));
    out.json("alignment.json", &report);
    Ok(())
}

fn spectrum(cfg: &mut RunConfig, out: &mut Outputs) -> Result<(), CliError> {
    let length = *cfg.window_length.get_or_insert(DEFAULT_WINDOW);
    let step = *cfg.step.get_or_insert(1);
    let (panel, report) = price_panel(cfg)?;
    let trace = spectral::spectrum_trace(&corr::rolling_correlation(&panel, length, step)?)?;
    let m = trace_outputs(out, &trace)?;
    out.json("spectrum.json", &TraceSummary {
        assets: &trace.assets,
        windows: trace.points.len(),
        window_length: length,
        step,
        block_split: None,
        shift_days: None,
        median_lambda_1: m.lambda_1,
        median_gap_ratio: m.gap_ratio,
        median_dominance: m.dominance,
        median_participation_ratio: m.participation_ratio,
        alignment: &report,
    });
    Ok(())
}

fn global_spectrum(cfg: &mut RunConfig, out: &mut Outputs) -> Result<(), CliError> {
    let length = *cfg.window_length.get_or_insert(DEFAULT_GLOBAL_WINDOW);
    let step = *cfg.step.get_or_insert(1);
    let shift = *cfg.shift_days.get_or_insert(0);
    let markets = market_panels(cfg)?;
    let matrices = corr::rolling_global_correlation(&markets.a, &markets.b, length, step, shift)?;
    let split = matrices.first().and_then(|c| c.block_split);
    let trace = spectral::spectrum_trace(&matrices)?;
    let m = trace_outputs(out, &trace)?;
    out.json("global_spectrum.json", &TraceSummary {
        assets: &trace.assets,
        windows: trace.points.len(),
        window_length: length,
        step,
        block_split: split,
        shift_days: Some(shift),
        median_lambda_1: m.lambda_1,
        median_gap_ratio: m.gap_ratio,
        median_dominance: m.dominance,
        median_participation_ratio: m.participation_ratio,
        alignment: &markets.report,
    });
    Ok(())
}

fn variant_and_direction(cfg: &mut RunConfig) -> Result<(Variant, Direction), CliError> {
    let variant = parse_field("variant", cfg.variant.get_or_insert_with(|| "cosine".into()))?;
    let direction = parse_field("direction", cfg.direction.get_or_insert_with(|| "bubble".into()))?;
    Ok((variant, direction))
}

fn grid_string(g: &Grid) -> String {
    if g.nodes == 1 {
        g.start.to_string()
    } else {
        format!("{}:{}:{}", g.start, g.end, g.nodes)
    }
}

#[derive(Serialize)]
struct FitRecord {
    t_c: f64,
    t_c_date: Option<String>,
    origin: Option<String>,
    alpha: f64,
    lambda: f64,
    omega: f64,
    phi: f64,
    #[serde(rename = "A")]
    a: f64,
    #[serde(rename = "B")]
    b: f64,
    b_std_error: f64,
    variant: String,
    direction: String,
    sse: f64,
    mean_squared_error: f64,
    n_points: usize,
    diagnostics: FitDiagnostics,
}

fn lppl_fit(cfg: &mut RunConfig, out: &mut Outputs) -> Result<(), CliError> {
    let series = load_series(cfg)?;
    let (variant, direction) = variant_and_direction(cfg)?;
    let defaults = FitConfig::default();
    let times: Vec<f64> = series.points.iter().map(|p| p.0).collect();
    if times.is_empty() {
        return Err(CliError::data("series is empty"));
    }
    let t_c_grid: Grid = match &cfg.t_c_grid {
        Some(s) => parse_field("t_c_grid", s)?,
        None => FitConfig::default_t_c_grid(&times, direction),
    };
    cfg.t_c_grid = Some(grid_string(&t_c_grid));
    let config = FitConfig {
        t_c_grid: Some(t_c_grid),
        lambda_grid: parse_field(
            "lambda_grid",
            cfg.lambda_grid.get_or_insert_with(|| grid_string(&defaults.lambda_grid)),
        )?,
        alpha_grid: parse_field(
            "alpha_grid",
            cfg.alpha_grid.get_or_insert_with(|| grid_string(&defaults.alpha_grid)),
        )?,
        variant,
        direction,
        phase_nodes: *cfg.phase_nodes.get_or_insert(defaults.phase_nodes),
        max_iterations: *cfg.max_iterations.get_or_insert(defaults.max_iterations),
        tolerance: *cfg.tolerance.get_or_insert(defaults.tolerance),
    };
    let fit = fit_model(&series.points, &config)?;
    let fitted = evaluate_model(&fit.model, &times)?;
    let m = &fit.model;
    out.json("fit.json", &FitRecord {
        t_c: m.t_c,
        t_c_date: series.date_of(m.t_c),
        origin: series.origin.map(|d| d.to_string()),
        alpha: m.alpha,
        lambda: m.lambda,
        omega: m.omega(),
        phi: m.phi,
        a: m.a,
        b: m.b,
        b_std_error: fit.b_std_error,
        variant: m.variant.to_string(),
        direction: m.direction.to_string(),
        sse: fit.sse,
        mean_squared_error: fit.mean_squared_error(),
        n_points: fit.n_points,
        diagnostics: fit.diagnostics.clone(),
    });
    let rows: Vec<Vec<String>> = series
        .points
        .iter()
        .zip(&fitted)
        .map(|(&(t, y), f)| cells([t, y, *f]))
        .collect();
    out.table("fit_curve.tsv", |w| report::write_table(w, &["time", "observed", "fitted"], &rows));
    Ok(())
}

#[derive(Serialize)]
struct ExtremaRecord {
    t_c: f64,
    t_c_date: Option<String>,
    direction: String,
    options: ExtremaOptions,
    positions: Vec<f64>,
    ratios: Vec<f64>,
    lambda_estimate: f64,
}

fn extrema(cfg: &mut RunConfig, out: &mut Outputs) -> Result<(), CliError> {
    let series = load_series(cfg)?;
    let t_c_text = cfg.t_c.clone().ok_or_else(|| CliError::usage("--t-c is required"))?;
    let t_c = series.time_of(&t_c_text)?;
    let direction: Direction = parse_field("direction", cfg.direction.get_or_insert_with(|| "bubble".into()))?;
    let kind = match cfg.extremum.get_or_insert_with(|| "minima".into()).as_str() {
        "minima" | "min" => ExtremumKind::Minima,
        "maxima" | "max" => ExtremumKind::Maxima,
        other => return Err(CliError::usage(format!("extremum must be minima or maxima, got {other:?}"))),
    };
    let options = ExtremaOptions {
        smoothing_width: *cfg.smoothing_width.get_or_insert(1),
        kind,
        detrend_degree: cfg.detrend_degree,
    };
    let p = extrema_progression(&series.points, t_c, direction, &options)?;
    let time_at = |x: f64| match direction {
        Direction::Bubble => t_c - x,
        Direction::Antibubble => t_c + x,
    };
    let rows: Vec<Vec<String>> = p
        .positions
        .iter()
        .enumerate()
        .map(|(k, &x)| {
            let ratio = if k >= 2 { fmt(p.ratios[k - 2]) } else { String::new() };
            vec![k.to_string(), fmt(x), fmt(time_at(x)), ratio]
        })
        .collect();
    out.table("extrema.tsv", |w| report::write_table(w, &["index", "x", "time", "ratio"], &rows));
    out.json("extrema.json", &ExtremaRecord {
        t_c,
        t_c_date: series.date_of(t_c),
        direction: direction.to_string(),
        options,
        positions: p.positions.clone(),
        ratios: p.ratios.clone(),
        lambda_estimate: p.lambda_estimate,
    });
    Ok(())
}

fn weierstrass_params(cfg: &mut RunConfig) -> Result<WeierstrassParams, CliError> {
    let d = WeierstrassParams::default();
    Ok(WeierstrassParams::new(
        *cfg.a.get_or_insert(d.a),
        *cfg.b.get_or_insert(d.b),
        *cfg.m.get_or_insert(d.m),
        *cfg.truncation_tol.get_or_insert(d.truncation_tol),
    )?)
}

fn weierstrass_eval(cfg: &mut RunConfig, out: &mut Outputs) -> Result<(), CliError> {
    let params = weierstrass_params(cfg)?;
    let d = LogGrid::default();
    let grid = LogGrid {
        k_min: *cfg.k_min.get_or_insert(d.k_min),
        k_max: *cfg.k_max.get_or_insert(d.k_max),
        points: *cfg.points.get_or_insert(d.points),
    };
    if !(grid.k_min > 0.0 && grid.k_max > grid.k_min && grid.points >= 2) {
        return Err(CliError::usage("k grid needs 0 < k_min < k_max and at least 2 points"));
    }
    let rows = grid
        .values()
        .into_iter()
        .map(|k| {
            let v = weierstrass::weierstrass_p(k, &params)?;
            Ok(vec![fmt(k), fmt(v.value), v.terms.to_string()])
        })
        .collect::<collectivity::Result<Vec<_>>>()?;
    out.table("weierstrass.tsv", |w| report::write_table(w, &["k", "p", "terms"], &rows));
    if *cfg.analyze.get_or_insert(false) {
        out.json("self_similarity.json", &weierstrass::analyze_self_similarity(&params, &grid)?);
    }
    Ok(())
}

fn weierstrass_walk(cfg: &mut RunConfig, out: &mut Outputs) -> Result<(), CliError> {
    let params = weierstrass_params(cfg)?;
    let steps = *cfg.steps.get_or_insert(10_000);
    let seed = cfg.seed.unwrap_or_default();
    let walk = weierstrass::simulate_walk(&params, steps, seed)?;
    let rows: Vec<Vec<String>> = walk
        .positions
        .iter()
        .enumerate()
        .map(|(i, x)| vec![i.to_string(), fmt(*x)])
        .collect();
    out.table("walk.tsv", |w| report::write_table(w, &["step", "position"], &rows));
    let top = walk.levels.iter().copied().max().unwrap_or(0) as usize;
    let mut counts = vec![0usize; top + 1];
    for &j in &walk.levels {
        counts[j as usize] += 1;
    }
    let rows: Vec<Vec<String>> = counts
        .iter()
        .enumerate()
        .map(|(j, &c)| {
            let expected = steps as f64 * weierstrass::level_probability(&params, j as u32);
            vec![j.to_string(), c.to_string(), fmt(expected)]
        })
        .collect();
    out.table("levels.tsv", |w| report::write_table(w, &["j", "count", "expected"], &rows));
    Ok(())
}

#[derive(Serialize)]
struct RpaRecord {
    epsilon: f64,
    kappa: f64,
    n: usize,
    total_strength: f64,
    collective_energy: f64,
    analytic: rpa::RpaSolution,
    numeric: rpa::RpaSolution,
    max_energy_deviation: f64,
    max_strength_deviation: f64,
}

fn rpa_demo(cfg: &mut RunConfig, out: &mut Outputs) -> Result<(), CliError> {
    let epsilon = *cfg.epsilon.get_or_insert(1.0);
    let kappa = *cfg.kappa.get_or_insert(0.5);
    let model = match &cfg.amplitudes {
        Some(d) => SchematicRpaModel::new(epsilon, kappa, d.clone())?,
        None => {
            let n = *cfg.n.get_or_insert(10);
            let amplitude = *cfg.amplitude.get_or_insert(1.0);
            SchematicRpaModel::uniform(epsilon, kappa, n, amplitude)?
        }
    };
    let rows: Vec<Vec<String>> = rpa::two_panel_rows(&model)?
        .into_iter()
        .map(|(e, s, tag)| vec![fmt(e), fmt(s), tag.to_string()])
        .collect();
    out.table("rpa.tsv", |w| report::write_table(w, &["energy", "strength", "panel"], &rows));
    let analytic = rpa::solve_analytic(&model);
    let numeric = rpa::solve_numeric(&model)?;
    let max_dev = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    out.json("rpa.json", &RpaRecord {
        epsilon,
        kappa,
        n: model.n(),
        total_strength: model.total_strength(),
        collective_energy: model.collective_energy(),
        max_energy_deviation: max_dev(&analytic.energies, &numeric.energies),
        max_strength_deviation: max_dev(&analytic.strengths, &numeric.strengths),
        analytic,
        numeric,
    });
    Ok(())
}

#[derive(Serialize)]
struct SpacingRecord<'a> {
    windows: usize,
    levels_used: usize,
    spacings: usize,
    ks_wigner: f64,
    ks_poisson: f64,
    closer_to_wigner: bool,
    alignment: &'a AlignmentReport,
}

fn spacing_stats(cfg: &mut RunConfig, out: &mut Outputs) -> Result<(), CliError> {
    let length = *cfg.window_length.get_or_insert(DEFAULT_WINDOW);
    // non-overlapping windows keep the pooled spectra independent
    let step = *cfg.step.get_or_insert(length);
    let d = SpacingConfig::default();
    let config = SpacingConfig {
        drop_top: *cfg.drop_top.get_or_insert(d.drop_top),
        unfolding_degree: *cfg.unfolding_degree.get_or_insert(d.unfolding_degree),
        bins: *cfg.bins.get_or_insert(d.bins),
        max_spacing: *cfg.max_spacing.get_or_insert(d.max_spacing),
    };
    let (panel, report) = price_panel(cfg)?;
    let trace = spectral::spectrum_trace(&corr::rolling_correlation(&panel, length, step)?)?;
    let spectra: Vec<Vec<f64>> = trace.points.iter().map(|p| p.eigenvalues.clone()).collect();
    let stats = spectral::spacing_statistics(&spectra, &config)?;
    let rows: Vec<Vec<String>> = stats.histogram.iter().map(|&(c, e, w)| cells([c, e, w])).collect();
    out.table("spacing_histogram.tsv", |w| report::write_table(w, &["spacing", "density", "wigner"], &rows));
    let rows: Vec<Vec<String>> = stats.spacings.iter().map(|s| vec![fmt(*s)]).collect();
    out.table("spacings.tsv", |w| report::write_table(w, &["spacing"], &rows));
    out.json("spacing.json", &SpacingRecord {
        windows: spectra.len(),
        levels_used: stats.levels_used,
        spacings: stats.spacings.len(),
        ks_wigner: stats.ks_wigner,
        ks_poisson: stats.ks_poisson,
        closer_to_wigner: stats.closer_to_wigner(),
        alignment: &report,
    });
    Ok(())
}
