//! Experiment runner: TOML configuration, the learning loop with periodic
//! evaluation, maze runs of the feudal agent, and cross-run aggregation.

use std::path::{Path, PathBuf};

pub mod compare;
pub mod config;
pub mod error;
pub mod runner;
pub mod star_run;

/// Environment variable overriding the root of run directories.
pub const OUTPUT_ROOT_ENV: &str = "SGIM_OUTPUT_ROOT";

/// Root of run directories: `$SGIM_OUTPUT_ROOT`, or `runs` in the working
/// directory.
pub fn output_root() -> PathBuf {
    std::env::var_os(OUTPUT_ROOT_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("runs"))
}

/// Run directory of `config` under `root`: its `output.dir` when set, else
/// `<label>-seed<seed>`.
pub fn run_dir(config: &config::ExperimentConfig, root: &Path) -> PathBuf {
    match &config.output.dir {
        Some(d) => root.join(d),
        None => root.join(format!("{}-seed{}", config.label, config.seed)),
    }
}
