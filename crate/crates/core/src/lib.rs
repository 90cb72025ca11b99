//! Collectivity in coupled systems, measured two ways.
//!
//! * [`marketdata`], [`corr`] and [`spectral`] build rolling correlation
//!   matrices of asset returns (optionally merging two markets with a
//!   time-zone shift) and follow how one collective eigenvalue separates
//!   from a noisy bulk.
//! * [`lppl`] fits log-periodic power laws near a critical time and measures
//!   the geometric progression of their extrema.
//!
//! Two exactly solvable models serve as oracles: [`rpa`], a schematic
//! separable-interaction model in which one state absorbs all strength, and
//! [`weierstrass`], a random walk whose characteristic function is
//! log-periodic.
//!
//! ```
//! use collectivity::rpa::{solve_analytic, SchematicRpaModel};
//!
//! let model = SchematicRpaModel::uniform(1.0, 0.5, 4, 1.0).unwrap();
//! let solution = solve_analytic(&model);
//! assert_eq!(solution.energies, vec![1.0, 1.0, 1.0, 3.0]);
//! assert_eq!(solution.strengths, vec![0.0, 0.0, 0.0, 4.0]);
//! ```

pub mod corr;
mod error;
mod linalg;
pub mod lppl;
pub mod marketdata;
pub mod report;
pub mod rpa;
pub mod spectral;
pub mod weierstrass;

pub use error::{Error, ErrorKind, Result};

/// Version of this library.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

// Code blocks in the guide under book/ run as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/market-data.md")]
    mod market_data {}
    #[doc = include_str!("../../../book/src/correlations.md")]
    mod correlations {}
    #[doc = include_str!("../../../book/src/spectra.md")]
    mod spectra {}
    #[doc = include_str!("../../../book/src/schematic-model.md")]
    mod schematic_model {}
    #[doc = include_str!("../../../book/src/log-periodicity.md")]
    mod log_periodicity {}
    #[doc = include_str!("../../../book/src/weierstrass.md")]
    mod weierstrass {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
