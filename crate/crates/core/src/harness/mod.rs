//! Configuration, reproducible streams, parallel execution and result files.

pub mod config;
pub mod exec;
pub mod rng;
pub mod run;
pub mod validate;

pub use config::{load_config, load_model, Experiment, ExperimentSpec};
pub use rng::{PathStream, RngStreamPlan};
pub use run::{render_csv, run, RunOutput};
pub use validate::{validate, validate_with_rate, ValidationTable};
