use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::{overlay, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "collectivity", version, about = "Collective modes in correlation spectra and log-periodic structures")]
pub struct Cli {
    /// TOML file with run settings; flags take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Output directory (created if missing) [default: out]
    #[arg(long = "out", global = true, value_name = "DIR")]
    pub out_dir: Option<PathBuf>,
    /// Seed for every random draw [default: 0]
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// More log output on stderr (repeat for debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

impl Cli {
    /// Config file contents overlaid with the global and subcommand flags.
    pub fn run_config(&self) -> Result<RunConfig, crate::CliError> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::from_file(path)?,
            None => RunConfig::default(),
        };
        overlay!(cfg, self; out_dir, seed);
        self.command.apply(&mut cfg);
        Ok(cfg)
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Log returns on the common trading calendar.
    Returns {
        #[command(flatten)]
        prices: PriceArgs,
    },
    /// Correlation matrix of one window (two-market when --market-a/--market-b are given).
    Corr {
        #[command(flatten)]
        prices: PriceArgs,
        #[command(flatten)]
        markets: MarketArgs,
        /// Window length in trading days [default: 30, or 60 for two markets]
        #[arg(long = "window")]
        window_length: Option<usize>,
        /// Last date of the window [default: last available]
        #[arg(long)]
        window_end: Option<String>,
    },
    /// Rolling eigenvalue trace of one market.
    Spectrum {
        #[command(flatten)]
        prices: PriceArgs,
        #[command(flatten)]
        window: WindowArgs,
    },
    /// Rolling eigenvalue trace of two merged markets, market A shifted by --shift-days.
    GlobalSpectrum {
        #[command(flatten)]
        columns: ColumnArgs,
        #[command(flatten)]
        markets: MarketArgs,
        #[command(flatten)]
        window: WindowArgs,
    },
    /// Fit the log-periodic power law to log-prices.
    LpplFit {
        #[command(flatten)]
        series: SeriesArgs,
        #[command(flatten)]
        fit: FitArgs,
    },
    /// Geometric progression of log-periodic extrema.
    Extrema {
        #[command(flatten)]
        series: SeriesArgs,
        #[command(flatten)]
        extrema: ExtremaArgs,
    },
    /// Tabulate the Weierstrass characteristic function on a log grid.
    WeierstrassEval {
        #[command(flatten)]
        params: WeierstrassArgs,
        /// First wavenumber [default: 1e-4]
        #[arg(long)]
        k_min: Option<f64>,
        /// Last wavenumber [default: 0.1]
        #[arg(long)]
        k_max: Option<f64>,
        /// Grid points [default: 3000]
        #[arg(long)]
        points: Option<usize>,
        /// Also estimate the scaling ratio from the tabulated function.
        #[arg(long)]
        analyze: bool,
    },
    /// Simulate the Weierstrass random walk.
    WeierstrassWalk {
        #[command(flatten)]
        params: WeierstrassArgs,
        /// Number of steps [default: 10000]
        #[arg(long)]
        steps: Option<usize>,
    },
    /// Strength distribution of the schematic separable-interaction model.
    RpaDemo {
        /// Unperturbed energy [default: 1]
        #[arg(long, allow_negative_numbers = true)]
        epsilon: Option<f64>,
        /// Coupling constant [default: 0.5]
        #[arg(long, allow_negative_numbers = true)]
        kappa: Option<f64>,
        /// Number of configurations [default: 10]
        #[arg(long)]
        n: Option<usize>,
        /// Common amplitude d_i [default: 1]
        #[arg(long, allow_negative_numbers = true)]
        amplitude: Option<f64>,
        /// Explicit amplitudes, comma separated (overrides --n and --amplitude).
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        amplitudes: Option<Vec<f64>>,
    },
    /// Nearest-neighbour spacing statistics of the bulk eigenvalues.
    SpacingStats {
        #[command(flatten)]
        prices: PriceArgs,
        #[command(flatten)]
        window: WindowArgs,
        /// Largest eigenvalues removed per window [default: 1]
        #[arg(long)]
        drop_top: Option<usize>,
        /// Polynomial degree of the unfolding [default: 5]
        #[arg(long)]
        unfolding_degree: Option<usize>,
        /// Histogram bins [default: 20]
        #[arg(long)]
        bins: Option<usize>,
        /// Histogram range in mean spacings [default: 4]
        #[arg(long)]
        max_spacing: Option<f64>,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Returns { .. } => "returns",
            Command::Corr { .. } => "corr",
            Command::Spectrum { .. } => "spectrum",
            Command::GlobalSpectrum { .. } => "global-spectrum",
            Command::LpplFit { .. } => "lppl-fit",
            Command::Extrema { .. } => "extrema",
            Command::WeierstrassEval { .. } => "weierstrass-eval",
            Command::WeierstrassWalk { .. } => "weierstrass-walk",
            Command::RpaDemo { .. } => "rpa-demo",
            Command::SpacingStats { .. } => "spacing-stats",
        }
    }

    fn apply(&self, cfg: &mut RunConfig) {
        match self {
            Command::Returns { prices } => prices.apply(cfg),
            Command::Corr { prices, markets, window_length, window_end } => {
                prices.apply(cfg);
                markets.apply(cfg);
                overlay!(cfg, (Overrides { window_length: *window_length, window_end: window_end.clone() }); window_length, window_end);
            }
            Command::Spectrum { prices, window } => {
                prices.apply(cfg);
                window.apply(cfg);
            }
            Command::GlobalSpectrum { columns, markets, window } => {
                columns.apply(cfg);
                markets.apply(cfg);
                window.apply(cfg);
            }
            Command::LpplFit { series, fit } => {
                series.apply(cfg);
                fit.apply(cfg);
            }
            Command::Extrema { series, extrema } => {
                series.apply(cfg);
                extrema.apply(cfg);
            }
            Command::WeierstrassEval { params, k_min, k_max, points, analyze } => {
                params.apply(cfg);
                overlay!(cfg, (Grid { k_min: *k_min, k_max: *k_max, points: *points }); k_min, k_max, points);
                if *analyze {
                    cfg.analyze = Some(true);
                }
            }
            Command::WeierstrassWalk { params, steps } => {
                params.apply(cfg);
                if let Some(s) = steps {
                    cfg.steps = Some(*s);
                }
            }
            Command::RpaDemo { epsilon, kappa, n, amplitude, amplitudes } => {
                let flags = Rpa {
                    epsilon: *epsilon,
                    kappa: *kappa,
                    n: *n,
                    amplitude: *amplitude,
                    amplitudes: amplitudes.clone(),
                };
                overlay!(cfg, flags; epsilon, kappa, n, amplitude, amplitudes);
            }
            Command::SpacingStats { prices, window, drop_top, unfolding_degree, bins, max_spacing } => {
                prices.apply(cfg);
                window.apply(cfg);
                let flags = Spacing {
                    drop_top: *drop_top,
                    unfolding_degree: *unfolding_degree,
                    bins: *bins,
                    max_spacing: *max_spacing,
                };
                overlay!(cfg, flags; drop_top, unfolding_degree, bins, max_spacing);
            }
        }
    }
}

// Field bundles so that inline subcommand flags can go through `overlay!`.
struct Overrides {
    window_length: Option<usize>,
    window_end: Option<String>,
}

struct Grid {
    k_min: Option<f64>,
    k_max: Option<f64>,
    points: Option<usize>,
}

struct Rpa {
    epsilon: Option<f64>,
    kappa: Option<f64>,
    n: Option<usize>,
    amplitude: Option<f64>,
    amplitudes: Option<Vec<f64>>,
}

struct Spacing {
    drop_top: Option<usize>,
    unfolding_degree: Option<usize>,
    bins: Option<usize>,
    max_spacing: Option<f64>,
}

/// Layout of the price files.
#[derive(Debug, Args)]
pub struct ColumnArgs {
    /// Date column header [default: date]
    #[arg(long)]
    pub date_column: Option<String>,
    /// Asset column header [default: asset]
    #[arg(long)]
    pub asset_column: Option<String>,
    /// Price column header [default: price]
    #[arg(long)]
    pub price_column: Option<String>,
    /// Field delimiter [default: ,]
    #[arg(long)]
    pub delimiter: Option<char>,
    /// Return horizon in trading days [default: 1]
    #[arg(long)]
    pub tau: Option<usize>,
    /// Fraction of assets that must trade on a date for it to be kept [default: 1]
    #[arg(long)]
    pub min_coverage: Option<f64>,
}

impl ColumnArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        overlay!(cfg, self; date_column, asset_column, price_column, delimiter, tau, min_coverage);
    }
}

#[derive(Debug, Args)]
pub struct PriceArgs {
    /// Price files with date, asset and price columns.
    #[arg(short, long = "input", value_name = "FILE", num_args = 1..)]
    pub inputs: Option<Vec<PathBuf>>,
    #[command(flatten)]
    pub columns: ColumnArgs,
}

impl PriceArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        overlay!(cfg, self; inputs);
        self.columns.apply(cfg);
    }
}

#[derive(Debug, Args)]
pub struct MarketArgs {
    /// Price files of market A, the one shifted.
    #[arg(long, value_name = "FILE", num_args = 1..)]
    pub market_a: Option<Vec<PathBuf>>,
    /// Price files of market B.
    #[arg(long, value_name = "FILE", num_args = 1..)]
    pub market_b: Option<Vec<PathBuf>>,
    /// Pair market A's returns with market B's returns this many trading days later [default: 0]
    #[arg(long, allow_negative_numbers = true)]
    pub shift_days: Option<i64>,
}

impl MarketArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        overlay!(cfg, self; market_a, market_b, shift_days);
    }
}

#[derive(Debug, Args)]
pub struct WindowArgs {
    /// Window length in trading days [default: 30, or 60 for two markets]
    #[arg(long = "window")]
    pub window_length: Option<usize>,
    /// Days between window starts [default: 1; spacing-stats: the window length]
    #[arg(long)]
    pub step: Option<usize>,
}

impl WindowArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        overlay!(cfg, self; window_length, step);
    }
}

/// One time series: a single asset from price files, or a `t,value` file.
#[derive(Debug, Args)]
pub struct SeriesArgs {
    /// Price files; the log-price of one asset is analysed against days since its first date.
    #[arg(short, long = "input", value_name = "FILE", num_args = 1..)]
    pub inputs: Option<Vec<PathBuf>>,
    /// CSV file with header `t,value`, used instead of --input.
    #[arg(long, value_name = "FILE", conflicts_with = "inputs")]
    pub series: Option<PathBuf>,
    /// Asset to analyse when the price files hold several.
    #[arg(long)]
    pub asset: Option<String>,
    /// First date (inclusive) of the analysed range.
    #[arg(long)]
    pub start: Option<String>,
    /// Last date (inclusive) of the analysed range.
    #[arg(long)]
    pub end: Option<String>,
    #[command(flatten)]
    pub columns: ColumnArgs,
}

impl SeriesArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        overlay!(cfg, self; inputs, series, asset, start, end);
        self.columns.apply(cfg);
    }
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Critical-time grid `start:end:nodes` in days since the first date, or one value to pin it
    /// [default: last..last+2·span, 200 nodes]
    #[arg(long, allow_hyphen_values = true)]
    pub t_c_grid: Option<String>,
    /// Scaling-ratio grid [default: 1.5:3.5:41]
    #[arg(long)]
    pub lambda_grid: Option<String>,
    /// Exponent grid [default: -1:1:21]
    #[arg(long, allow_hyphen_values = true)]
    pub alpha_grid: Option<String>,
    /// cosine or abs-cosine [default: cosine]
    #[arg(long)]
    pub variant: Option<String>,
    /// bubble or antibubble [default: bubble]
    #[arg(long)]
    pub direction: Option<String>,
    /// Phase nodes for abs-cosine [default: 64]
    #[arg(long)]
    pub phase_nodes: Option<usize>,
    /// Refinement iteration cap [default: 500]
    #[arg(long)]
    pub max_iterations: Option<usize>,
    /// Relative sse change that ends refinement at a step size [default: 1e-8]
    #[arg(long)]
    pub tolerance: Option<f64>,
}

impl FitArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        overlay!(cfg, self; t_c_grid, lambda_grid, alpha_grid, variant, direction, phase_nodes, max_iterations, tolerance);
    }
}

#[derive(Debug, Args)]
pub struct ExtremaArgs {
    /// Critical time: ISO date, or days since the first date.
    #[arg(long, allow_hyphen_values = true)]
    pub t_c: Option<String>,
    /// bubble or antibubble [default: bubble]
    #[arg(long)]
    pub direction: Option<String>,
    /// Moving-average width, 1 = off [default: 1]
    #[arg(long)]
    pub smoothing_width: Option<usize>,
    /// Remove a polynomial trend in ln x of this degree first.
    #[arg(long)]
    pub detrend_degree: Option<usize>,
    /// minima or maxima [default: minima]
    #[arg(long)]
    pub extremum: Option<String>,
}

impl ExtremaArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        overlay!(cfg, self; t_c, direction, smoothing_width, detrend_degree, extremum);
    }
}

#[derive(Debug, Args)]
pub struct WeierstrassArgs {
    /// Base step length [default: 1]
    #[arg(long)]
    pub a: Option<f64>,
    /// Step length multiplier [default: 2]
    #[arg(long)]
    pub b: Option<f64>,
    /// Probability divisor [default: 4]
    #[arg(long)]
    pub m: Option<f64>,
    /// Series truncation tolerance [default: 1e-12]
    #[arg(long)]
    pub truncation_tol: Option<f64>,
}

impl WeierstrassArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        overlay!(cfg, self; a, b, m, truncation_tol);
    }
}
