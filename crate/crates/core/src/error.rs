use thiserror::Error;

/// Broad classification used by front ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Bad or insufficient input data.
    Data,
    /// A numerical procedure could not produce a result.
    Numeric,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("row {row}: {message}")]
    Record { row: usize, message: String },

    #[error("no records found in input")]
    EmptyInput,

    #[error("asset {asset}: {message}")]
    Asset { asset: String, message: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("asset {asset} has zero volatility in window {start}..={end}")]
    ZeroVolatility {
        asset: String,
        start: String,
        end: String,
    },

    #[error("matrix is not symmetric: |a[{row}][{col}] - a[{col}][{row}]| = {deviation:e}")]
    NotSymmetric {
        row: usize,
        col: usize,
        deviation: f64,
    },

    #[error("window ending {window}: {source}")]
    Window {
        window: String,
        #[source]
        source: Box<Error>,
    },

    #[error("point {index} (t = {time}) lies on the wrong side of the critical time {t_c}")]
    WrongSide { index: usize, time: f64, t_c: f64 },

    #[error("insufficient data: {0}")]
    Insufficient(String),

    #[error("numerical failure: {0}")]
    Numeric(String),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Numeric(_) | Error::NotSymmetric { .. } => ErrorKind::Numeric,
            Error::Window { source, .. } => source.kind(),
            _ => ErrorKind::Data,
        }
    }

    pub(crate) fn asset(asset: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Asset {
            asset: asset.into(),
            message: message.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
