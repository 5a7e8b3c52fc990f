//! Experiment descriptions, built-in presets and the command layer used by
//! the `spinetail` binary.

pub mod commands;
pub mod config;
pub mod presets;

pub use commands::{CommandOutput, ExitStatus, RunOptions};
pub use config::ExperimentConfig;
pub use presets::{preset, reference_table, PRESET_NAMES};
