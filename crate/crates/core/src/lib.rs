//! Extreme learning machines trained through a Hessenberg decomposition of the
//! hidden-layer Gram matrix, with closed-form leave-one-out (PRESS) selection of
//! the ridge parameter, and region-occupancy features computed on second-order
//! difference plots of a signal.
//!
//! The crate is organised bottom-up:
//!
//! * [`linalg`] – dense kernels (Householder Hessenberg reduction, Thomas
//!   solves, Jacobi eigendecomposition, direct ridge solves).
//! * [`signal`] – waveform loading, baseline removal, notch filtering,
//!   segmentation.
//! * [`features`] – second-order difference plots and the circled, squared,
//!   inclined and grid partitions, plus min/max normalization.
//! * [`elm`] – the four ELM variants, PRESS, prediction, persistence.
//! * [`eval`] – stratified folds, confusion metrics, cross-validation and
//!   lambda sweeps.
//! * [`synth`], [`config`], [`pipeline`] – the file-based workflow driven by
//!   the `hesselm` command-line tool.

pub mod config;
pub mod elm;
mod error;
pub mod eval;
pub mod features;
pub mod linalg;
mod par;
pub mod pipeline;
pub mod signal;
pub mod synth;

pub use error::{Error, Result};
pub use linalg::DenseMatrix;
pub use par::with_threads;
