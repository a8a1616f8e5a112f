//! Command-line pipeline around `optbench-core`: configuration, CSV and
//! JSON formats, staged estimation runs and a synthetic fixture generator.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calc;
pub mod config;
pub mod error;
pub mod fixture;
pub mod io;
pub mod pipeline;
pub mod reference;
pub mod report;
pub mod seeds;

pub use config::PipelineConfig;
pub use error::{CliError, Result};
pub use pipeline::{run, RunOutcome, Stage};
