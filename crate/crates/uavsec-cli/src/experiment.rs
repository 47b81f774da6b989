//! Executes a configured sweep and collects the results as a table.

use uavsec::analytic::{effective_density, pc_approx, pc_simplified, pso_zone_approx};
use uavsec::model::threshold;
use uavsec::montecarlo::{sim_connection, sim_outage};
use uavsec::optimizer::{default_d_grid, default_h_grid, optimize_no_zone, optimize_zone, rt_star, solve_re_detailed};
use uavsec::{FadingModel, GuardZone, MetricEstimate, NetworkParams, SimConfig};

use crate::config::{ExperimentConfig, Metric, Mode, ZoneSetting};
use crate::error::CliError;

/// Result columns; the first column is the swept variable.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }
}

fn guard_zone(zone: ZoneSetting) -> Option<GuardZone> {
    match zone {
        ZoneSetting::Fixed(d) => Some(GuardZone { d }),
        ZoneSetting::None | ZoneSetting::Optimize => None,
    }
}

fn sim_config(cfg: &ExperimentConfig, params: &NetworkParams, fading: FadingModel) -> SimConfig {
    let mut sim = SimConfig::new(params, cfg.sim.n_realizations, cfg.sim.seed, fading);
    if let Some(w) = cfg.sim.window_radius {
        sim.window_radius = w;
    }
    sim.batch_size = cfg.sim.batch_size;
    sim
}

/// Column names produced by `config` (without the sweep column).
pub fn metric_columns(config: &ExperimentConfig) -> Vec<&'static str> {
    let zone = config.zone;
    match (config.mode, config.metric) {
        (Mode::Optimize, _) => match zone {
            ZoneSetting::Optimize => {
                vec!["h", "d", "r_e", "r_t", "r_s", "outage", "capacity", "h_no_zone", "capacity_no_zone"]
            }
            _ => vec!["h", "r_e", "r_t", "r_s", "outage", "capacity"],
        },
        (Mode::Analyze, Metric::Connection) => vec!["pc_approx", "pc_simplified"],
        (Mode::Analyze, Metric::Outage) => vec!["pso_approx"],
        (Mode::Analyze, Metric::Capacity) => vec!["pc_approx", "density", "capacity"],
        (Mode::Analyze, Metric::Design) => vec!["r_e", "r_t", "r_s", "outage", "pc_approx", "capacity"],
        (Mode::Simulate, Metric::Connection) => vec!["pc_approx", "pc_mc", "pc_mc_hw"],
        (Mode::Simulate, Metric::Outage) => vec!["pso_approx", "pso_mc", "pso_mc_hw"],
        (Mode::Simulate, Metric::Capacity) => vec!["capacity", "capacity_mc", "capacity_mc_hw"],
        (Mode::Validate, Metric::Connection) => {
            vec!["pc_approx", "pc_mc_rayleigh", "pc_mc_rayleigh_hw", "pc_mc_exact", "pc_mc_exact_hw"]
        }
        (Mode::Validate, Metric::Outage) => vec!["pso_approx", "pso_mc_exact", "pso_mc_exact_hw"],
        (Mode::Validate, Metric::Capacity) => vec![
            "capacity",
            "capacity_mc_rayleigh",
            "capacity_mc_rayleigh_hw",
            "capacity_mc_exact",
            "capacity_mc_exact_hw",
        ],
        // Rejected by config validation.
        (Mode::Simulate | Mode::Validate, Metric::Design) => Vec::new(),
    }
}

/// Options that perturb the closed forms without touching the simulator.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Perturbation {
    /// Multiplies η_N seen by the closed forms (negative control).
    pub closed_form_eta_n_factor: Option<f64>,
}

fn closed_params(params: &NetworkParams, perturb: &Perturbation) -> NetworkParams {
    match perturb.closed_form_eta_n_factor {
        Some(f) => NetworkParams { eta_n: params.eta_n * f, ..*params },
        None => *params,
    }
}

fn capacity_closed(params: &NetworkParams, r_t: f64, r_e: f64, zone: Option<GuardZone>) -> (f64, f64, f64) {
    let pc = pc_approx(params, threshold(r_t));
    let density = density(params, zone);
    (pc, density, (r_t - r_e) * pc * density)
}

fn density(params: &NetworkParams, zone: Option<GuardZone>) -> f64 {
    zone.map_or(params.lambda_u, |z| effective_density(params.lambda_u, params.lambda_e, z))
}

fn outage_closed(params: &NetworkParams, r_e: f64, zone: Option<GuardZone>) -> Result<f64, CliError> {
    Ok(pso_zone_approx(params, threshold(r_e), zone.unwrap_or(GuardZone { d: 0.0 }))?)
}

fn push_mc(row: &mut Vec<f64>, est: MetricEstimate, scale: f64) {
    row.push(est.value * scale);
    row.push(est.half_width * scale);
}

/// Metric values for one configured point, in [`metric_columns`] order.
pub fn evaluate_point(config: &ExperimentConfig, perturb: &Perturbation) -> Result<Vec<f64>, CliError> {
    let params = config.network;
    let closed = closed_params(&params, perturb);
    let zone = guard_zone(config.zone);
    let (r_t, r_e, eps) = (config.code.r_t, config.code.r_e, config.code.epsilon);
    let mut row = Vec::new();
    match (config.mode, config.metric) {
        (Mode::Optimize, _) => {
            let h_grid = default_h_grid(&params);
            let best = match config.zone {
                ZoneSetting::None => optimize_no_zone(&closed, eps, &h_grid)?,
                ZoneSetting::Fixed(d) => optimize_zone(&closed, eps, &h_grid, &[d])?,
                ZoneSetting::Optimize => optimize_zone(&closed, eps, &h_grid, &default_d_grid(&closed))?,
            };
            row.push(best.h);
            if config.zone == ZoneSetting::Optimize {
                row.push(best.d.unwrap_or(0.0));
            }
            row.extend([best.r_e, best.r_t, best.r_s, best.outage, best.capacity]);
            if config.zone == ZoneSetting::Optimize {
                let plain = optimize_no_zone(&closed, eps, &h_grid)?;
                row.extend([plain.h, plain.capacity]);
            }
        }
        (Mode::Analyze, Metric::Connection) => {
            row.extend([pc_approx(&closed, threshold(r_t)), pc_simplified(&closed, r_t)]);
        }
        (Mode::Analyze, Metric::Outage) => row.push(outage_closed(&closed, r_e, zone)?),
        (Mode::Analyze, Metric::Capacity) => {
            let (pc, density, capacity) = capacity_closed(&closed, r_t, r_e, zone);
            row.extend([pc, density, capacity]);
        }
        (Mode::Analyze, Metric::Design) => {
            let sol = solve_re_detailed(&closed, eps, zone)?;
            let rt = rt_star(&closed, sol.r_e);
            let (pc, _, capacity) = capacity_closed(&closed, rt, sol.r_e, zone);
            row.extend([sol.r_e, rt, rt - sol.r_e, sol.outage, pc, capacity]);
        }
        (Mode::Simulate, Metric::Connection) => {
            row.push(pc_approx(&closed, threshold(r_t)));
            push_mc(&mut row, sim_connection(&params, threshold(r_t), &sim_config(config, &params, config.sim.fading))?, 1.0);
        }
        (Mode::Simulate, Metric::Outage) => {
            row.push(outage_closed(&closed, r_e, zone)?);
            let sim = sim_config(config, &params, config.sim.fading);
            push_mc(&mut row, sim_outage(&params, threshold(r_e), zone, &sim)?, 1.0);
        }
        (Mode::Simulate, Metric::Capacity) => {
            row.push(capacity_closed(&closed, r_t, r_e, zone).2);
            let sim = sim_config(config, &params, config.sim.fading);
            let scale = (r_t - r_e) * density(&params, zone);
            push_mc(&mut row, sim_connection(&params, threshold(r_t), &sim)?, scale);
        }
        (Mode::Validate, Metric::Connection) => {
            row.push(pc_approx(&closed, threshold(r_t)));
            for fading in [FadingModel::AllRayleigh, FadingModel::ExactLoSNLoS] {
                push_mc(&mut row, sim_connection(&params, threshold(r_t), &sim_config(config, &params, fading))?, 1.0);
            }
        }
        (Mode::Validate, Metric::Outage) => {
            row.push(outage_closed(&closed, r_e, zone)?);
            let sim = sim_config(config, &params, FadingModel::ExactLoSNLoS);
            push_mc(&mut row, sim_outage(&params, threshold(r_e), zone, &sim)?, 1.0);
        }
        (Mode::Validate, Metric::Capacity) => {
            row.push(capacity_closed(&closed, r_t, r_e, zone).2);
            let scale = (r_t - r_e) * density(&params, zone);
            for fading in [FadingModel::AllRayleigh, FadingModel::ExactLoSNLoS] {
                push_mc(&mut row, sim_connection(&params, threshold(r_t), &sim_config(config, &params, fading))?, scale);
            }
        }
        (Mode::Simulate | Mode::Validate, Metric::Design) => {
            return Err(CliError::Config("metric = design is closed-form only".into()));
        }
    }
    Ok(row)
}

/// Runs every sweep point in order, calling `on_row` after each one.
pub fn run_experiment(
    config: &ExperimentConfig,
    perturb: &Perturbation,
    on_row: &mut dyn FnMut(&[String], &[f64]),
) -> Result<Table, CliError> {
    config.validate()?;
    let mut columns = vec![config.sweep.variable.name().to_string()];
    columns.extend(metric_columns(config).iter().map(|c| c.to_string()));
    let mut rows = Vec::with_capacity(config.sweep.values.len());
    for &value in &config.sweep.values {
        let mut row = vec![value];
        row.extend(evaluate_point(&config.at(value), perturb)?);
        on_row(&columns, &row);
        rows.push(row);
    }
    Ok(Table { columns, rows })
}

/// `name: col=value col=value …` for one row.
pub fn summary_line(name: &str, columns: &[String], row: &[f64]) -> String {
    let fields: Vec<String> = columns.iter().zip(row).map(|(c, v)| format!("{c}={v:.6e}")).collect();
    format!("{name}: {}", fields.join(" "))
}
