//! Finite-key feasibility toolkit for geostationary-satellite quantum key
//! distribution.
//!
//! The crate computes secure key lengths for decoy-state BB84 under three
//! receiver architectures using exact statistical bounds and
//! linear-programming decoy estimation, driven by a physically detailed
//! downlink channel and background-noise model, and runs parameter-sweep
//! studies (loss–noise maps, aperture grids, zenith scans, annual
//! cloud-weighted yield).
//!
//! Module map:
//! - [`special`], [`quad`]: special functions and quadrature primitives
//! - [`stats`]: exact confidence bounds and quantile inversions
//! - [`geometry`]: spherical-Earth viewing geometry
//! - [`channel`]: deterministic loss budget of the downlink
//! - [`background`]: sky radiance to noise-click probabilities
//! - [`receivers`]: click/error statistics of the three architectures
//! - [`security`]: decoy LPs and finite-key length formulas
//! - [`pipeline`]: scenario assembly, optimization, sweeps, annual yield,
//!   fiber benchmarks, and file I/O

pub mod background;
pub mod channel;
pub mod geometry;
pub mod pipeline;
pub mod quad;
pub mod receivers;
pub mod security;
pub mod special;
pub mod stats;

use thiserror::Error as ThisError;

/// Crate-wide error type. `Input` marks invalid arguments or configuration;
/// `Data` marks malformed or missing table entries. The CLI maps them to
/// exit codes 1 and 2 respectively.
#[derive(Debug, ThisError)]
pub enum Error {
    #[error("input error: {0}")]
    Input(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn input(msg: String) -> Self {
        Error::Input(msg)
    }

    pub fn data(msg: String) -> Self {
        Error::Data(msg)
    }
}
