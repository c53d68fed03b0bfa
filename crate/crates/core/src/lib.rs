//! Dyadic tilings of the unit square and the Markov chains that move
//! between them.
//!
//! The crate covers exact enumeration and counting of tilings, the edge-flip
//! and block-dynamics chains (simulation and exact transition matrices),
//! spectral gaps and Dirichlet forms, the coupling used to bound the block
//! chain's gap, and total-variation mixing analysis.

pub mod chains;
pub mod combinatorics;
pub mod coupling;
pub mod enumeration;
pub mod mixing;
pub mod sparse;
pub mod spectral;
pub mod surd;
pub mod tiling;

pub(crate) mod serde_util;

pub use combinatorics::{BigCount, CountTable, ExactRatio};
pub use tiling::{Axis, HalfBisectorSet, Quadrant, Side, Tiling, TilingError};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Tiling(#[from] TilingError),
    #[error("{what} is limited to k <= {max} (requested k = {k})")]
    SizeGuard { what: &'static str, k: u32, max: u32 },
    #[error("{what} requires k >= {min} (requested k = {k})")]
    TooSmall { what: &'static str, k: u32, min: u32 },
    #[error("chain is not connected")]
    Disconnected,
    #[error("power iteration did not converge in {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("test function has zero variance")]
    ZeroVariance,
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
