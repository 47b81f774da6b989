//! Experiment configuration files.
//!
//! The format is INI-style: `[section]` headers followed by `key = value`
//! lines; `;` and `#` start comments. See the README for every key.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use ini::Ini;
use uavsec::{FadingModel, NetworkParams};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Closed forms only.
    Analyze,
    /// Closed forms next to the simulator under the configured fading.
    Simulate,
    /// Closed forms next to the simulator under every fading model.
    Validate,
    /// Rate, altitude and guard-zone optimization.
    Optimize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Connection,
    Outage,
    Capacity,
    /// Outage-constrained rates at a fixed altitude and zone.
    Design,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ZoneSetting {
    None,
    Fixed(f64),
    Optimize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CodeSettings {
    pub r_t: f64,
    /// Redundancy rate `R_e = R_t − R_s`.
    pub r_e: f64,
    pub epsilon: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimSettings {
    pub n_realizations: u64,
    /// `None` selects the default window for each sweep point.
    pub window_radius: Option<f64>,
    pub seed: u64,
    pub fading: FadingModel,
    pub batch_size: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVariable {
    LambdaU,
    LambdaE,
    ThetaC,
    H,
    EtaL,
    EtaN,
    Rt,
    Re,
    Epsilon,
    D,
}

pub const SWEEP_VARIABLES: [(SweepVariable, &str); 10] = [
    (SweepVariable::LambdaU, "lambda_u"),
    (SweepVariable::LambdaE, "lambda_e"),
    (SweepVariable::ThetaC, "theta_c"),
    (SweepVariable::H, "h"),
    (SweepVariable::EtaL, "eta_l"),
    (SweepVariable::EtaN, "eta_n"),
    (SweepVariable::Rt, "r_t"),
    (SweepVariable::Re, "r_e"),
    (SweepVariable::Epsilon, "epsilon"),
    (SweepVariable::D, "d"),
];

impl SweepVariable {
    pub fn name(self) -> &'static str {
        SWEEP_VARIABLES.iter().find(|v| v.0 == self).map(|v| v.1).unwrap_or("?")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub variable: SweepVariable,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub name: String,
    pub mode: Mode,
    pub metric: Metric,
    pub charts: bool,
    pub log_x: bool,
    /// Overrides the default output directory when set.
    pub output_dir: Option<String>,
    pub network: NetworkParams,
    pub code: CodeSettings,
    pub zone: ZoneSetting,
    pub sweep: Sweep,
    pub sim: SimSettings,
}

const SECTIONS: [(&str, &[&str]); 6] = [
    ("experiment", &["name", "mode", "metric", "charts", "log_x", "output_dir"]),
    (
        "network",
        &["lambda_u", "lambda_e", "theta_c", "h", "h_min", "h_max", "eta_l", "eta_n", "alpha_l", "alpha_n", "p_t"],
    ),
    ("code", &["r_t", "r_s", "r_e", "epsilon"]),
    ("zone", &["mode", "d"]),
    ("sweep", &["variable", "values", "start", "stop", "step"]),
    ("sim", &["n_realizations", "window_radius", "seed", "fading", "batch_size"]),
];

struct Reader<'a> {
    ini: &'a Ini,
}

impl Reader<'_> {
    fn raw(&self, section: &str, key: &str) -> Option<&str> {
        self.ini.section(Some(section)).and_then(|s| s.get(key)).map(str::trim)
    }

    fn bad(section: &str, key: &str, msg: impl std::fmt::Display) -> CliError {
        CliError::Config(format!("[{section}] {key}: {msg}"))
    }

    fn string(&self, section: &str, key: &str) -> Result<Option<String>, CliError> {
        Ok(self.raw(section, key).map(str::to_owned))
    }

    fn float(&self, section: &str, key: &str) -> Result<Option<f64>, CliError> {
        self.raw(section, key).map(|v| parse_float(v).map_err(|e| Self::bad(section, key, e))).transpose()
    }

    fn float_or(&self, section: &str, key: &str, default: f64) -> Result<f64, CliError> {
        Ok(self.float(section, key)?.unwrap_or(default))
    }

    fn angle_or(&self, section: &str, key: &str, default: f64) -> Result<f64, CliError> {
        self.raw(section, key)
            .map(|v| parse_angle(v).map_err(|e| Self::bad(section, key, e)))
            .transpose()
            .map(|v| v.unwrap_or(default))
    }

    fn integer_or(&self, section: &str, key: &str, default: u64) -> Result<u64, CliError> {
        self.raw(section, key)
            .map(|v| v.parse::<u64>().map_err(|e| Self::bad(section, key, e)))
            .transpose()
            .map(|v| v.unwrap_or(default))
    }

    fn flag_or(&self, section: &str, key: &str, default: bool) -> Result<bool, CliError> {
        match self.raw(section, key) {
            None => Ok(default),
            Some("true" | "yes" | "on" | "1") => Ok(true),
            Some("false" | "no" | "off" | "0") => Ok(false),
            Some(v) => Err(Self::bad(section, key, format!("expected true or false, got {v:?}"))),
        }
    }

    fn required(&self, section: &str, key: &str) -> Result<&str, CliError> {
        self.raw(section, key).ok_or_else(|| Self::bad(section, key, "missing"))
    }
}

/// Parses a number; `deg` suffixes are only accepted through [`parse_angle`].
pub fn parse_float(text: &str) -> Result<f64, String> {
    let v: f64 = text.trim().parse().map_err(|_| format!("not a number: {text:?}"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("not a finite number: {text:?}"))
    }
}

/// Radians, or degrees with a `deg` suffix (`45 deg`, `45deg`).
pub fn parse_angle(text: &str) -> Result<f64, String> {
    match text.trim().strip_suffix("deg") {
        Some(deg) => parse_float(deg).map(|d| d * PI / 180.0),
        None => parse_float(text),
    }
}

fn parse_list(text: &str) -> Result<Vec<f64>, String> {
    text.split(',').map(str::trim).filter(|t| !t.is_empty()).map(parse_float).collect()
}

impl ExperimentConfig {
    pub fn from_path(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let ini = Ini::load_from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        for (section, props) in ini.iter() {
            let Some(name) = section else {
                if let Some((key, _)) = props.iter().next() {
                    return Err(CliError::Config(format!("key {key:?} appears before any section header")));
                }
                continue;
            };
            let Some((_, keys)) = SECTIONS.iter().find(|s| s.0 == name) else {
                return Err(CliError::Config(format!("unknown section [{name}]")));
            };
            if let Some((key, _)) = props.iter().find(|(k, _)| !keys.contains(k)) {
                return Err(CliError::Config(format!("[{name}] {key}: unknown key")));
            }
        }
        let r = Reader { ini: &ini };

        let name = r.required("experiment", "name")?.to_owned();
        if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
            return Err(CliError::Config(format!("[experiment] name: {name:?} must be nonempty [A-Za-z0-9_-]")));
        }
        let mode = match r.required("experiment", "mode")? {
            "analyze" => Mode::Analyze,
            "simulate" => Mode::Simulate,
            "validate" => Mode::Validate,
            "optimize" => Mode::Optimize,
            other => return Err(Reader::bad("experiment", "mode", format!("unknown mode {other:?}"))),
        };
        let metric = match r.raw("experiment", "metric") {
            Some("connection") => Metric::Connection,
            Some("outage") => Metric::Outage,
            Some("capacity") => Metric::Capacity,
            Some("design") => Metric::Design,
            None if mode == Mode::Optimize => Metric::Design,
            None => return Err(Reader::bad("experiment", "metric", "missing")),
            Some(other) => return Err(Reader::bad("experiment", "metric", format!("unknown metric {other:?}"))),
        };

        let d = NetworkParams::default();
        let network = NetworkParams {
            lambda_u: r.float_or("network", "lambda_u", d.lambda_u)?,
            lambda_e: r.float_or("network", "lambda_e", d.lambda_e)?,
            theta_c: r.angle_or("network", "theta_c", d.theta_c)?,
            h: r.float_or("network", "h", d.h)?,
            h_min: r.float_or("network", "h_min", d.h_min)?,
            h_max: r.float_or("network", "h_max", d.h_max)?,
            eta_l: r.float_or("network", "eta_l", d.eta_l)?,
            eta_n: r.float_or("network", "eta_n", d.eta_n)?,
            alpha_l: r.float_or("network", "alpha_l", d.alpha_l)?,
            alpha_n: r.float_or("network", "alpha_n", d.alpha_n)?,
            p_t: r.float_or("network", "p_t", d.p_t)?,
        };

        let r_t = r.float_or("code", "r_t", 5.0)?;
        let r_e = match (r.float("code", "r_s")?, r.float("code", "r_e")?) {
            (Some(_), Some(_)) => {
                return Err(CliError::Config("[code] give either r_s or r_e, not both".into()));
            }
            (Some(r_s), None) => r_t - r_s,
            (None, Some(r_e)) => r_e,
            (None, None) => 0.0,
        };
        let code = CodeSettings { r_t, r_e, epsilon: r.float_or("code", "epsilon", 0.01)? };

        let zone = match r.raw("zone", "mode").unwrap_or("none") {
            "none" => ZoneSetting::None,
            "fixed" => ZoneSetting::Fixed(
                r.float("zone", "d")?.ok_or_else(|| Reader::bad("zone", "d", "required for mode = fixed"))?,
            ),
            "optimize" => ZoneSetting::Optimize,
            other => return Err(Reader::bad("zone", "mode", format!("unknown zone mode {other:?}"))),
        };

        let variable_name = r.required("sweep", "variable")?;
        let variable = SWEEP_VARIABLES
            .iter()
            .find(|v| v.1 == variable_name)
            .map(|v| v.0)
            .ok_or_else(|| Reader::bad("sweep", "variable", format!("unknown variable {variable_name:?}")))?;
        let values = match (r.raw("sweep", "values"), r.raw("sweep", "start")) {
            (Some(_), Some(_)) => {
                return Err(CliError::Config("[sweep] give either values or start/stop/step, not both".into()));
            }
            (Some(list), None) => {
                if variable == SweepVariable::ThetaC {
                    list.split(',').map(str::trim).filter(|t| !t.is_empty()).map(parse_angle).collect()
                } else {
                    parse_list(list)
                }
                .map_err(|e| Reader::bad("sweep", "values", e))?
            }
            (None, Some(_)) => {
                let start = r.float("sweep", "start")?.unwrap_or(0.0);
                let stop = r.float("sweep", "stop")?.ok_or_else(|| Reader::bad("sweep", "stop", "missing"))?;
                let step = r.float("sweep", "step")?.ok_or_else(|| Reader::bad("sweep", "step", "missing"))?;
                linear_range(start, stop, step).map_err(|e| Reader::bad("sweep", "step", e))?
            }
            (None, None) => Vec::new(),
        };
        let sweep = Sweep { variable, values };

        let window_radius = match r.raw("sim", "window_radius") {
            None | Some("auto") => None,
            Some(_) => r.float("sim", "window_radius")?,
        };
        let fading = match r.raw("sim", "fading").unwrap_or("exact") {
            "exact" => FadingModel::ExactLoSNLoS,
            "rayleigh" => FadingModel::AllRayleigh,
            other => return Err(Reader::bad("sim", "fading", format!("unknown fading {other:?}"))),
        };
        let sim = SimSettings {
            n_realizations: r.integer_or("sim", "n_realizations", 100_000)?,
            window_radius,
            seed: r.integer_or("sim", "seed", 1)?,
            fading,
            batch_size: r.integer_or("sim", "batch_size", 10_000)?,
        };

        let config = ExperimentConfig {
            name,
            mode,
            metric,
            charts: r.flag_or("experiment", "charts", false)?,
            log_x: r.flag_or("experiment", "log_x", false)?,
            output_dir: r.string("experiment", "output_dir")?,
            network,
            code,
            zone,
            sweep,
            sim,
        };
        config.validate()?;
        Ok(config)
    }

    /// Checks cross-field constraints that a single key cannot express.
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Config(msg));
        if self.sweep.values.is_empty() {
            return bad("[sweep] the sweep has no values".into());
        }
        if let Err(e) = self.network.validate() {
            return bad(format!("[network] {e}"));
        }
        let c = &self.code;
        if !(c.r_t >= 0.0 && c.r_e >= 0.0 && c.r_e <= c.r_t) {
            return bad(format!("[code] need 0 <= r_e <= r_t, got r_t={} r_e={}", c.r_t, c.r_e));
        }
        if !(c.epsilon > 0.0 && c.epsilon < 1.0) {
            return bad(format!("[code] epsilon must be in (0, 1), got {}", c.epsilon));
        }
        if let ZoneSetting::Fixed(d) = self.zone {
            if d < 0.0 {
                return bad(format!("[zone] d must be >= 0, got {d}"));
            }
        }
        match (self.mode, self.metric, self.zone) {
            (Mode::Optimize, Metric::Design, _) => {}
            (Mode::Optimize, _, _) => return bad("[experiment] optimize mode takes metric = design".into()),
            (_, _, ZoneSetting::Optimize) => {
                return bad("[zone] mode = optimize needs [experiment] mode = optimize".into());
            }
            (Mode::Simulate | Mode::Validate, Metric::Design, _) => {
                return bad("[experiment] metric = design is closed-form only; use mode = analyze".into());
            }
            _ => {}
        }
        match self.sweep.variable {
            SweepVariable::H if self.mode == Mode::Optimize => {
                return bad("[sweep] the altitude is searched in optimize mode and cannot be swept".into());
            }
            SweepVariable::D if self.zone == ZoneSetting::None => {
                return bad("[sweep] sweeping d needs [zone] mode = fixed".into());
            }
            SweepVariable::D if self.zone == ZoneSetting::Optimize => {
                return bad("[sweep] d is searched with [zone] mode = optimize and cannot be swept".into());
            }
            _ => {}
        }
        if matches!(self.mode, Mode::Simulate | Mode::Validate) {
            if self.sim.n_realizations == 0 || self.sim.batch_size == 0 {
                return bad("[sim] n_realizations and batch_size must be positive".into());
            }
            if let Some(w) = self.sim.window_radius {
                if !(w > 0.0) {
                    return bad(format!("[sim] window_radius must be positive, got {w}"));
                }
            }
        }
        for &v in &self.sweep.values {
            if let Err(e) = self.at(v).network.validate() {
                return bad(format!("[sweep] {} = {v}: {e}", self.sweep.variable.name()));
            }
        }
        Ok(())
    }

    /// The configuration with the swept variable set to `value`.
    pub fn at(&self, value: f64) -> ExperimentConfig {
        let mut c = self.clone();
        match self.sweep.variable {
            SweepVariable::LambdaU => c.network.lambda_u = value,
            SweepVariable::LambdaE => c.network.lambda_e = value,
            SweepVariable::ThetaC => c.network.theta_c = value,
            SweepVariable::H => c.network = c.network.at_altitude(value),
            SweepVariable::EtaL => c.network.eta_l = value,
            SweepVariable::EtaN => c.network.eta_n = value,
            SweepVariable::Rt => c.code.r_t = value,
            SweepVariable::Re => c.code.r_e = value,
            SweepVariable::Epsilon => c.code.epsilon = value,
            SweepVariable::D => c.zone = ZoneSetting::Fixed(value),
        }
        c
    }

    /// Writes the configuration back in the file format; every key is
    /// explicit, so parsing the output yields an equal configuration.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        let mut section = |name: &str, entries: Vec<(&str, String)>| {
            let _ = writeln!(out, "[{name}]");
            for (k, v) in entries {
                let _ = writeln!(out, "{k} = {v}");
            }
            out.push('\n');
        };
        let mode = match self.mode {
            Mode::Analyze => "analyze",
            Mode::Simulate => "simulate",
            Mode::Validate => "validate",
            Mode::Optimize => "optimize",
        };
        let metric = match self.metric {
            Metric::Connection => "connection",
            Metric::Outage => "outage",
            Metric::Capacity => "capacity",
            Metric::Design => "design",
        };
        let mut experiment = vec![
            ("name", self.name.clone()),
            ("mode", mode.into()),
            ("metric", metric.into()),
            ("charts", self.charts.to_string()),
            ("log_x", self.log_x.to_string()),
        ];
        if let Some(dir) = &self.output_dir {
            experiment.push(("output_dir", dir.clone()));
        }
        section("experiment", experiment);
        let n = &self.network;
        section(
            "network",
            vec![
                ("lambda_u", n.lambda_u.to_string()),
                ("lambda_e", n.lambda_e.to_string()),
                ("theta_c", n.theta_c.to_string()),
                ("h", n.h.to_string()),
                ("h_min", n.h_min.to_string()),
                ("h_max", n.h_max.to_string()),
                ("eta_l", n.eta_l.to_string()),
                ("eta_n", n.eta_n.to_string()),
                ("alpha_l", n.alpha_l.to_string()),
                ("alpha_n", n.alpha_n.to_string()),
                ("p_t", n.p_t.to_string()),
            ],
        );
        section(
            "code",
            vec![
                ("r_t", self.code.r_t.to_string()),
                ("r_e", self.code.r_e.to_string()),
                ("epsilon", self.code.epsilon.to_string()),
            ],
        );
        let zone = match self.zone {
            ZoneSetting::None => vec![("mode", "none".to_string())],
            ZoneSetting::Fixed(d) => vec![("mode", "fixed".to_string()), ("d", d.to_string())],
            ZoneSetting::Optimize => vec![("mode", "optimize".to_string())],
        };
        section("zone", zone);
        let values: Vec<String> = self.sweep.values.iter().map(f64::to_string).collect();
        section("sweep", vec![("variable", self.sweep.variable.name().into()), ("values", values.join(", "))]);
        let s = &self.sim;
        section(
            "sim",
            vec![
                ("n_realizations", s.n_realizations.to_string()),
                ("window_radius", s.window_radius.map_or("auto".into(), |w| w.to_string())),
                ("seed", s.seed.to_string()),
                (
                    "fading",
                    match s.fading {
                        FadingModel::ExactLoSNLoS => "exact",
                        FadingModel::AllRayleigh => "rayleigh",
                    }
                    .into(),
                ),
                ("batch_size", s.batch_size.to_string()),
            ],
        );
        out
    }
}

/// `start, start+step, …` up to `stop` inclusive (with a relative slack of
/// 1e−9 steps so rounding does not drop the end point).
fn linear_range(start: f64, stop: f64, step: f64) -> Result<Vec<f64>, String> {
    if !(step > 0.0) {
        return Err(format!("must be positive, got {step}"));
    }
    if stop < start {
        return Ok(Vec::new());
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    if n > 1_000_000 {
        return Err(format!("range has {n} points"));
    }
    Ok((0..=n).map(|i| start + i as f64 * step).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "[experiment]\nname = t\nmode = analyze\nmetric = connection\n[sweep]\nvariable = lambda_u\nvalues = 1e-4, 1e-3\n";

    #[test]
    fn minimal_config_takes_defaults() {
        let c = ExperimentConfig::parse(MINIMAL).unwrap();
        assert_eq!(c.network, NetworkParams::default());
        assert_eq!(c.sweep.values, vec![1e-4, 1e-3]);
        assert_eq!(c.zone, ZoneSetting::None);
        assert_eq!(c.sim.window_radius, None);
    }

    #[test]
    fn degrees_are_converted() {
        assert!((parse_angle("45 deg").unwrap() - PI / 4.0).abs() < 1e-15);
        assert!((parse_angle("60deg").unwrap() - PI / 3.0).abs() < 1e-15);
        assert_eq!(parse_angle("0.5").unwrap(), 0.5);
        assert!(parse_angle("deg").is_err());
    }

    #[test]
    fn ranges() {
        assert_eq!(linear_range(10.0, 13.0, 1.0).unwrap(), vec![10.0, 11.0, 12.0, 13.0]);
        assert_eq!(linear_range(0.0, 0.3, 0.1).unwrap().len(), 4);
        assert!(linear_range(0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn rejections() {
        let with = |extra: &str| ExperimentConfig::parse(&format!("{MINIMAL}{extra}"));
        assert!(with("[bogus]\nx = 1\n").is_err());
        assert!(with("[network]\nlambda_q = 1\n").is_err());
        assert!(with("[network]\nh = 5\n").is_err());
        assert!(with("[code]\nr_s = 1\nr_e = 2\n").is_err());
        assert!(with("[code]\nr_t = 1\nr_s = 2\n").is_err());
        assert!(with("[zone]\nmode = fixed\n").is_err());
        assert!(with("[zone]\nmode = optimize\n").is_err());
        assert!(ExperimentConfig::parse(&MINIMAL.replace("1e-4, 1e-3", "")).is_err());
        assert!(ExperimentConfig::parse(&MINIMAL.replace("analyze", "dream")).is_err());
    }

    #[test]
    fn sweep_application() {
        let c = ExperimentConfig::parse(MINIMAL).unwrap();
        assert_eq!(c.at(3e-3).network.lambda_u, 3e-3);
        let h = ExperimentConfig { sweep: Sweep { variable: SweepVariable::H, values: vec![150.0] }, ..c };
        let at = h.at(150.0);
        assert_eq!(at.network.h, 150.0);
        assert!(at.network.validate().is_ok());
    }
}
