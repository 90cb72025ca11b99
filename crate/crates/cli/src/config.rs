//! Run configuration: an optional TOML file overlaid by command-line flags.
//!
//! Every field is optional. Subcommands fill in their defaults with
//! `get_or_insert`, so the manifest echoes the values actually used.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inputs: Option<Vec<PathBuf>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub market_a: Option<Vec<PathBuf>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub market_b: Option<Vec<PathBuf>>,
    /// Two-column `t,value` file used instead of price inputs.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub series: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub date_column: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub asset_column: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub price_column: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delimiter: Option<char>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub asset: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub start: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub end: Option<String>,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_coverage: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window_length: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub step: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window_end: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shift_days: Option<i64>,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_c_grid: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda_grid: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha_grid: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub variant: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub direction: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phase_nodes: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_c: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub smoothing_width: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detrend_degree: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub extremum: Option<String>,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truncation_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub analyze: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub amplitudes: Option<Vec<f64>>,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub drop_top: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub unfolding_degree: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bins: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_spacing: Option<f64>,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| {
            CliError::usage(format!("invalid config {}: {}", path.display(), e.message()))
        })
    }

    /// Paths named by the configuration, which must all exist.
    pub fn check_paths(&self) -> Result<(), CliError> {
        let lists = [&self.inputs, &self.market_a, &self.market_b];
        let singles = self.series.iter();
        for p in lists.into_iter().flatten().flatten().chain(singles) {
            if !p.is_file() {
                return Err(CliError::usage(format!("input file {} does not exist", p.display())));
            }
        }
        Ok(())
    }
}

/// Copies every `Some` flag over the matching config field.
macro_rules! overlay {
    ($cfg:expr, $args:expr; $($field:ident),+ $(,)?) => {
        $(
            if let Some(v) = $args.$field.clone() {
                $cfg.$field = Some(v);
            }
        )+
    };
}
pub(crate) use overlay;

/// Parses a configured string, reporting the field on failure.
pub fn parse_field<T: std::str::FromStr>(name: &str, value: &str) -> Result<T, CliError>
where
    T::Err: std::fmt::Display,
{
    value
        .parse()
        .map_err(|e| CliError::usage(format!("invalid {name} {value:?}: {e}")))
}
