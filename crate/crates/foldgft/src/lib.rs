//! Experiment harness for spectral-folding graph interpolation.
//!
//! Wraps `foldgft-core` with file formats, configuration, the Monte Carlo
//! runner behind the `foldgft` binary, and a randomized invariant checker.

pub mod config;
pub mod error;
pub mod experiment;
pub mod io;
pub mod verify;

pub use config::{Command, ConfigOverrides, ExperimentConfig, Redraw, Scheme};
pub use error::AppError;
pub use experiment::{run_experiment, run_sweep, run_table1, summarize, ExperimentResult};
