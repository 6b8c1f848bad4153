//! Command-line front end: TOML experiment configs, named experiments,
//! parameter sweeps and the acceptance report.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod experiments;
pub mod report;
pub mod sweep;

use std::path::{Path, PathBuf};

pub use config::ExperimentConfig;
pub use error::{CliError, CliResult};

/// Environment variable overriding the configured output directory.
pub const OUT_DIR_ENV: &str = "SPINCHAIN_OUT_DIR";

/// Output directory: the flag, then the environment, then the config
/// (relative to the config file), then `out`.
pub fn output_dir(flag: Option<&Path>, env: Option<&str>, cfg: &ExperimentConfig, base: &Path) -> PathBuf {
    if let Some(f) = flag {
        return f.to_path_buf();
    }
    if let Some(e) = env.filter(|e| !e.is_empty()) {
        return PathBuf::from(e);
    }
    match &cfg.experiment.output {
        Some(o) => config::resolve(base, o),
        None => base.join("out"),
    }
}

pub fn config_base(path: &Path) -> PathBuf {
    path.parent().map(Path::to_path_buf).unwrap_or_default()
}
