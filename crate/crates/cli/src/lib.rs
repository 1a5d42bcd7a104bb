//! Batch driver around `bergcomp-core`: TOML experiment configs in, CSV and
//! JSON out.

pub mod config;
pub mod oracle;
pub mod output;
pub mod run;
pub mod table;

pub use config::{load, ExperimentConfig, Loaded, Overrides};
pub use run::{run, Command, Status};
