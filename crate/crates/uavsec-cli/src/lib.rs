//! Experiment runner for the `uavsec` crate: configuration files, sweeps,
//! CSV/SVG output and the closed-form validation suite.

pub mod config;
pub mod error;
pub mod experiment;
pub mod output;
pub mod validate;

use std::path::{Path, PathBuf};

pub use config::ExperimentConfig;
pub use error::CliError;
pub use experiment::{run_experiment, Perturbation, Table};
pub use validate::{validate_suite, Report, ValidateOptions};

/// Environment variable naming the default output directory.
pub const OUTPUT_ENV: &str = "UAVSEC_OUT";

/// `output_dir` from the config, else `$UAVSEC_OUT`, else `./out`.
pub fn output_dir(config: &ExperimentConfig) -> PathBuf {
    config
        .output_dir
        .as_ref()
        .map(PathBuf::from)
        .or_else(|| std::env::var_os(OUTPUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"))
}

/// Runs the experiment in `path`, writes `<name>.csv` (and `<name>.svg`
/// when charts are enabled) and returns the CSV path.
pub fn run_config(path: &Path, log: &mut dyn FnMut(String)) -> Result<PathBuf, CliError> {
    let config = ExperimentConfig::from_path(path)?;
    let mut on_row = |columns: &[String], row: &[f64]| log(experiment::summary_line(&config.name, columns, row));
    let table = run_experiment(&config, &Perturbation::default(), &mut on_row)?;
    let dir = output_dir(&config);
    std::fs::create_dir_all(&dir)?;
    let csv_path = dir.join(format!("{}.csv", config.name));
    output::write_csv(&table, &csv_path)?;
    if config.charts {
        std::fs::write(dir.join(format!("{}.svg", config.name)), output::render_svg(&table, &config.name, config.log_x))?;
    }
    Ok(csv_path)
}
