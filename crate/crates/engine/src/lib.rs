//! Evaluation engine for long-form text-to-video generation.
//!
//! Loads prompt suites and videos, drives model providers, computes every
//! metric through `locot2v-core`, and writes reports, tables and
//! correlation analyses. The `locot2v` binary is a thin CLI over this crate.

// `!(x > 0.0)` style checks are meant to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod error;
pub mod evaluate;
pub mod jsonblock;
pub mod pool;
pub mod provider;
pub mod report;
pub mod run;
pub mod suite;
pub mod suite_tools;
pub mod templates;
pub mod video;

pub use error::{Error, Result};
