//! Experiment runner for the energy-harvesting two-way relay models in
//! `ehrelay-core`: configuration, sweeps, CSV output, validation against
//! simulation and the figure presets.

pub mod config;
pub mod error;
pub mod plot;
pub mod presets;
pub mod report;
pub mod sweep;

use std::path::{Path, PathBuf};

pub use config::ExperimentConfig;
pub use error::{CliError, Result};

/// Writes the sweep CSV and a plot script beside it. Returns the script path.
pub fn write_outputs(cfg: &ExperimentConfig, result: &sweep::SweepResult, csv: &Path) -> Result<PathBuf> {
    sweep::write_csv(result, csv)?;
    let name = csv
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let script = csv.with_extension("plot.py");
    let title = format!("{} vs {}", format!("{:?}", cfg.metric).to_lowercase(), cfg.sweep_axis.name());
    std::fs::write(&script, plot::script(&title, cfg.metric, cfg.sweep_axis, &[(name.clone(), name)]))
        .map_err(CliError::io(&script))?;
    Ok(script)
}
