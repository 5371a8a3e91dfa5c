//! Batch front end: scenario files, verification runs, artifact dumps.

pub mod config;
pub mod explain;
pub mod runner;

pub use config::{ConfigError, Overrides, Resolved, Scenario};
pub use runner::{dump_artifact, run_scenario, strip_timing, Outcome};

/// Loads, overrides and validates a scenario file.
pub fn load(path: &std::path::Path, overrides: &Overrides) -> Result<Resolved, ConfigError> {
    let mut s = Scenario::load(path)?;
    s.apply(overrides);
    s.resolve()
}
