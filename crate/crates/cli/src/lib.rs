//! Batch runner for `qmg-core` experiments.
//!
//! A scenario is a JSON document naming an experiment `kind` and its
//! `parameters`. [`run_scenario`] validates it, runs the experiment and writes
//! CSV/JSON outputs plus a `manifest.json` listing every file. [`emit_plotdata`]
//! turns any of those CSVs into a self-describing plot-data JSON.

mod error;
pub mod plotdata;
pub mod scenario;

pub use error::CliError;
pub use plotdata::{emit_plotdata, PlotRequest};
pub use scenario::{run_scenario, RunOptions, RunReport};
