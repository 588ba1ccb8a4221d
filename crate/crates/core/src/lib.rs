//! Scoring kernels for long-form text-to-video evaluation.
//!
//! This crate is `no_std` (it needs `alloc`) and holds every pure computation
//! of the benchmark: domain types, event matching and the order-penalized
//! event alignment score, static/temporal metric arithmetic, content clarity,
//! HERD scoring, aggregation and correlation. Anything that touches files,
//! models or the network lives in the `locot2v` companion crate.
#![no_std]
#![warn(missing_debug_implementations)]
// `!(x > 0.0)` style checks are meant to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod aggregate;
pub mod alignment;
pub mod clarity;
pub mod error;
pub mod frame;
pub mod herd;
pub mod matching;
pub mod math;
pub mod model;
pub mod static_quality;
pub mod temporal;

pub use error::{Error, Result};
pub use model::{
    ActionSpec, Category, ComplexityScore, Dimension, EventSpec, HerdDimension, HerdQuestion,
    MetricId, MetricScore, MetricStatus, Polarity, PromptRecord, ScoreReport, SimilarityMatrix,
    VideoAsset,
};
