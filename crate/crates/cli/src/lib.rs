//! Scenario registry, configuration loading, batch execution and report emission
//! for the `oplab-core` laboratory.

pub mod config;
pub mod report;
pub mod run;
pub mod scenarios;

use std::path::Path;

use rayon::prelude::*;

pub use config::{load_config, ConfigError, ScenarioConfig};
pub use report::{emit_report, Format, RunReport};
pub use run::{run_scenario, Overrides, Verdict};

/// Environment variable bounding the worker pool.
pub const THREADS_ENV: &str = "OPLAB_THREADS";

/// A builtin scenario name, or a path to a config or saved report.
pub fn resolve_target(target: &str) -> Result<ScenarioConfig, ConfigError> {
    if let Some(b) = scenarios::builtin(target) {
        return Ok(b.config());
    }
    let path = Path::new(target);
    if path.exists() {
        return load_config(path);
    }
    Err(ConfigError::Parse(format!(
        "{target:?} is neither a builtin scenario nor a readable file (see `oplab list`)"
    )))
}

/// Worker count from [`THREADS_ENV`]; `None` leaves the choice to rayon.
pub fn threads_from_env() -> Result<Option<usize>, String> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(format!("{THREADS_ENV} must be a positive integer, got {s:?}")),
        },
    }
}

/// Runs independent scenarios on a bounded pool; results keep the input order.
pub fn run_all(configs: &[ScenarioConfig], threads: Option<usize>) -> Vec<Result<RunReport, ConfigError>> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    match builder.build() {
        Ok(pool) => pool.install(|| configs.par_iter().map(run_scenario).collect()),
        Err(_) => configs.iter().map(run_scenario).collect(),
    }
}
