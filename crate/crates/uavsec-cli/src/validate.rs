//! Closed-form versus simulation agreement checks at the bundled
//! connection and outage configurations.

use std::fmt::Write as _;

use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::experiment::{run_experiment, Perturbation, Table};

pub const BUNDLED: [(&str, &str); 10] = [
    ("connection_vs_uav_density_h10", include_str!("../configs/connection_vs_uav_density_h10.cfg")),
    ("connection_vs_uav_density_h20", include_str!("../configs/connection_vs_uav_density_h20.cfg")),
    ("outage_vs_eve_density", include_str!("../configs/outage_vs_eve_density.cfg")),
    ("zone_outage_d10", include_str!("../configs/zone_outage_d10.cfg")),
    ("zone_outage_d20", include_str!("../configs/zone_outage_d20.cfg")),
    ("rates_vs_eve_density", include_str!("../configs/rates_vs_eve_density.cfg")),
    ("rates_vs_eve_density_zone", include_str!("../configs/rates_vs_eve_density_zone.cfg")),
    ("capacity_vs_altitude", include_str!("../configs/capacity_vs_altitude.cfg")),
    ("optimum_vs_eve_density", include_str!("../configs/optimum_vs_eve_density.cfg")),
    ("optimum_vs_uav_density", include_str!("../configs/optimum_vs_uav_density.cfg")),
];

pub fn bundled(name: &str) -> Option<ExperimentConfig> {
    BUNDLED.iter().find(|b| b.0 == name).and_then(|b| ExperimentConfig::parse(b.1).ok())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidateOptions {
    pub n_realizations: u64,
    pub seed: u64,
    /// Multiplies η_N in the closed forms only; a negative control that
    /// the suite must flag.
    pub corrupt_eta_n: Option<f64>,
}

impl Default for ValidateOptions {
    fn default() -> Self {
        Self { n_realizations: 100_000, seed: 1, corrupt_eta_n: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    /// What the check measures, for the report.
    pub statistic: &'static str,
    pub observed: f64,
    pub tolerance: f64,
    /// Sweep points that entered the check.
    pub points: usize,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub checks: Vec<CheckResult>,
}

impl Report {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{:<30} {:<6} {:<34} {:>10} {:>10} {:>6}", "check", "result", "statistic", "observed", "tolerance", "points");
        for c in &self.checks {
            let _ = writeln!(
                out,
                "{:<30} {:<6} {:<34} {:>10.4} {:>10.4} {:>6}",
                c.name,
                if c.pass { "PASS" } else { "FAIL" },
                c.statistic,
                c.observed,
                c.tolerance,
                c.points
            );
        }
        out
    }
}

fn run(name: &str, options: &ValidateOptions, log: &mut dyn FnMut(String)) -> Result<Table, CliError> {
    let mut config = bundled(name).ok_or_else(|| CliError::Config(format!("no bundled config {name}")))?;
    config.sim.n_realizations = options.n_realizations;
    config.sim.seed = options.seed;
    let perturb = Perturbation { closed_form_eta_n_factor: options.corrupt_eta_n };
    let mut on_row = |columns: &[String], row: &[f64]| log(crate::experiment::summary_line(name, columns, row));
    run_experiment(&config, &perturb, &mut on_row)
}

fn col(t: &Table, name: &str) -> Vec<f64> {
    t.column(name).unwrap_or_default()
}

/// Runs the agreement checks. Failures are report entries, not errors;
/// an error means a run could not be carried out at all.
pub fn validate_suite(options: &ValidateOptions, log: &mut dyn FnMut(String)) -> Result<Report, CliError> {
    let mut checks = Vec::new();

    // Connection: exact under all-Rayleigh fading, approximate otherwise.
    let mut inside = 0;
    let mut total = 0;
    let mut worst_exact = 0.0f64;
    for name in ["connection_vs_uav_density_h10", "connection_vs_uav_density_h20"] {
        let t = run(name, options, log)?;
        let closed = col(&t, "pc_approx");
        let (ray, ray_hw, exact) = (col(&t, "pc_mc_rayleigh"), col(&t, "pc_mc_rayleigh_hw"), col(&t, "pc_mc_exact"));
        for i in 0..closed.len() {
            let ratio = (ray[i] - closed[i]).abs() / ray_hw[i];
            inside += (ratio <= 1.0) as usize;
            total += 1;
            worst_exact = worst_exact.max((exact[i] - closed[i]).abs());
        }
    }
    let share = inside as f64 / total as f64;
    checks.push(CheckResult {
        name: "connection, all-Rayleigh",
        statistic: "share of points within half-width",
        observed: share,
        tolerance: 0.9,
        points: total,
        pass: share >= 0.9,
    });
    checks.push(CheckResult {
        name: "connection, exact LoS/NLoS",
        statistic: "max |MC - closed form|",
        observed: worst_exact,
        tolerance: 0.03,
        points: total,
        pass: worst_exact <= 0.03,
    });

    // Outage: compared where the simulated outage is small.
    for (label, name) in [
        ("outage, no zone", "outage_vs_eve_density"),
        ("outage, zone D = 10 m", "zone_outage_d10"),
        ("outage, zone D = 20 m", "zone_outage_d20"),
    ] {
        let t = run(name, options, log)?;
        let (closed, mc) = (col(&t, "pso_approx"), col(&t, "pso_mc_exact"));
        let in_regime: Vec<f64> =
            closed.iter().zip(&mc).filter(|(_, &m)| m <= 0.1).map(|(c, m)| (m - c).abs()).collect();
        let worst = in_regime.iter().copied().fold(0.0, f64::max);
        checks.push(CheckResult {
            name: label,
            statistic: "max |MC - closed form|, MC <= 0.1",
            observed: worst,
            tolerance: 0.02,
            points: in_regime.len(),
            pass: !in_regime.is_empty() && worst <= 0.02,
        });
    }
    Ok(Report { checks })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_configs_parse() {
        for (name, text) in BUNDLED {
            let c = ExperimentConfig::parse(text).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert_eq!(c.name, name);
        }
    }
}
