//! Experiment harness: TOML experiment specs, table reproduction and
//! plot-ready CSV output.

pub mod experiment;
pub mod plot;
pub mod reproduce;
pub mod spec;

pub use experiment::{run_experiment, ExperimentRecord};
pub use reproduce::{reproduce, Report, ReproduceOptions, TableId};
pub use spec::{ExperimentSpec, Method};
