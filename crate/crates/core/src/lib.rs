//! Non-parametric semi-Markov tropical cyclone track simulation.
//!
//! Synthetic tracks are built by walking along historical best-track
//! segments and jumping, at random times, to kinematically similar
//! neighbouring segments chosen with a wind-conditioned product kernel.
//! Destination segments are translated onto the current position and each
//! join is smoothed over a short window.
//!
//! The crate is organised along the pipeline:
//!
//! - [`ingest`]: archive parsing, U10 conversion, 3-hour interpolation and the
//!   per-basin [`ingest::SegmentLibrary`].
//! - [`kernel`]: covariates, the bisquare product kernel and the precomputed
//!   [`kernel::TransitionTable`].
//! - [`simulate`]: the segment walk and multi-year catalog generation.
//! - [`diagnostics`]: gridded track density, P64 wind-hit probability,
//!   median-of-draws fields and field comparison.
//! - [`pipeline`]: the `ingest`/`train`/`simulate`/`validate`/`compare`
//!   commands wired to files and a [`pipeline::RunConfig`].

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
pub mod error;
pub mod fixtures;
pub mod geo;
pub mod ingest;
mod io_util;
pub mod kernel;
pub mod pipeline;
pub mod simulate;
pub mod spatial;

pub use error::{Error, Result};
pub use io_util::file_sha256;
