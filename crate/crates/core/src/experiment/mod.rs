//! Experiment files, figure presets, replicate execution and output.

pub mod cli;
pub mod config;
pub mod output;
pub mod presets;
pub mod runner;
pub mod snapshot;
pub mod svg;

pub use config::{load_config, parse_config, ExperimentConfig, GridSpec};
pub use presets::Preset;
pub use runner::{run_experiment, run_in_memory, sweep, ExperimentResult, PointSummary, ReplicateOutcome};
pub use snapshot::Snapshot;
