//! IO companion for `sphera-core`: biosignal file parsing, portable binary
//! formats, a worker-pool experiment runner, and the `sphera` CLI.

pub mod bench;
pub mod cli;
pub mod config;
pub mod format;
pub mod gdf;
pub mod runner;

pub use config::RunConfig;
pub use format::{read_epochs_binary, read_epochs_csv, write_epochs_binary};
pub use gdf::read_gdf_restricted;
pub use runner::ThreadedRunner;
