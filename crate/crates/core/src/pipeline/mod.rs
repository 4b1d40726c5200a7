//! Experiment orchestration: configuration, persistence and the
//! subcommands behind the `ldon` binary.

pub mod commands;
pub mod config;
pub mod container;
pub mod report;

pub use commands::{compare, evaluate, export, export_all, fit_reducer, gen_data, init_threads, train_operator, train_run, Operator};
pub use config::{ExperimentConfig, ModelKind, Split};
pub use container::{read_tensor_container, write_tensor_container, Container, Manifest};
pub use report::RunReport;
