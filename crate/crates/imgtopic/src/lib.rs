//! File formats, configuration, the planted-topic generator and the
//! experiment runner behind the `imgtopic` command-line tool.

pub mod config;
pub mod error;
pub mod experiment;
pub mod formats;
pub mod synth;

pub use imgtopic_core as core;

pub use config::PipelineConfig;
pub use error::{exit, Error};
pub use experiment::{run_experiment, Workspace};
