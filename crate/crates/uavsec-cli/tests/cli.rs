use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use uavsec_cli::validate::{validate_suite, ValidateOptions, BUNDLED};
use uavsec_cli::{CliError, ExperimentConfig};

fn scratch_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("uavsec-cli-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn uavsec(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_uavsec")).args(args).env("UAVSEC_OUT", out).output().unwrap()
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(format!("{name}.cfg"));
    std::fs::write(&path, body).unwrap();
    path
}

#[test]
fn bundled_configs_round_trip() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    let mut files = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let parsed = ExperimentConfig::from_path(&path).unwrap();
        let again = ExperimentConfig::parse(&parsed.serialize()).unwrap();
        assert_eq!(parsed, again, "{}", path.display());
        assert_eq!(again.serialize(), parsed.serialize());
        files += 1;
    }
    assert_eq!(files, BUNDLED.len());
}

const SIMULATE: &str = "\
[experiment]
name = determinism
mode = simulate
metric = outage
charts = true
log_x = true

[code]
r_t = 6
r_e = 4

[zone]
mode = fixed
d = 12

[sweep]
variable = lambda_e
values = 1e-4, 1e-3

[sim]
n_realizations = 3000
window_radius = 250
seed = 9
";

#[test]
fn identical_runs_write_identical_csv() {
    let dir = scratch_dir("determinism");
    let config = write_config(&dir, "determinism", SIMULATE);
    let (a, b) = (dir.join("a"), dir.join("b"));
    for out in [&a, &b] {
        let run = uavsec(&["run", config.to_str().unwrap()], out);
        assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
        let stdout = String::from_utf8_lossy(&run.stdout);
        // One summary line per sweep point, then the output path.
        assert_eq!(stdout.lines().filter(|l| l.starts_with("determinism: lambda_e=")).count(), 2);
    }
    let csv_a = std::fs::read(a.join("determinism.csv")).unwrap();
    assert_eq!(csv_a, std::fs::read(b.join("determinism.csv")).unwrap());
    assert!(a.join("determinism.svg").exists());
    let header = String::from_utf8_lossy(&csv_a).lines().next().unwrap().to_string();
    assert_eq!(header, "lambda_e,pso_approx,pso_mc,pso_mc_hw");
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn empty_sweep_exits_with_config_status() {
    let dir = scratch_dir("empty");
    let config = write_config(&dir, "empty", &SIMULATE.replace("values = 1e-4, 1e-3", "values ="));
    let run = uavsec(&["run", config.to_str().unwrap()], &dir);
    assert_eq!(run.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&run.stderr).contains("sweep has no values"));
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn unreadable_config_exits_with_config_status() {
    let dir = scratch_dir("missing");
    let run = uavsec(&["run", dir.join("nope.cfg").to_str().unwrap()], &dir);
    assert_eq!(run.status.code(), Some(2));
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn infeasible_optimization_exits_with_status_3() {
    // Without interferers every eavesdropper decodes, whatever the rates.
    let dir = scratch_dir("infeasible");
    let body = "[experiment]\nname = infeasible\nmode = optimize\n[network]\nlambda_u = 0\n[sweep]\nvariable = lambda_e\nvalues = 1e-3\n";
    let config = write_config(&dir, "infeasible", body);
    let run = uavsec(&["run", config.to_str().unwrap()], &dir);
    assert_eq!(run.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&run.stderr).contains("infeasible"));
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn exit_codes_name_the_failure() {
    let accuracy = CliError::from(uavsec::Error::Accuracy { estimate: 0.5, error: 1e-3 });
    assert_eq!((accuracy.exit_code(), accuracy.kind()), (4, "accuracy"));
    let infeasible = CliError::from(uavsec::Error::Infeasible { target: 0.01, min_outage: 0.5 });
    assert_eq!((infeasible.exit_code(), infeasible.kind()), (3, "infeasible"));
    assert_eq!(CliError::Config("x".into()).exit_code(), 2);
}

#[test]
fn version_command() {
    let dir = scratch_dir("version");
    let run = uavsec(&["version"], &dir);
    assert!(run.status.success());
    assert_eq!(String::from_utf8_lossy(&run.stdout).trim(), format!("uavsec {}", env!("CARGO_PKG_VERSION")));
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn output_dir_key_overrides_environment() {
    let dir = scratch_dir("outdir");
    let target = dir.join("chosen");
    let body = format!(
        "[experiment]\nname = analytic\nmode = analyze\nmetric = design\noutput_dir = {}\n[sweep]\nvariable = lambda_e\nvalues = 1e-4, 1e-3\n",
        target.display()
    );
    let config = write_config(&dir, "analytic", &body);
    let run = uavsec(&["run", config.to_str().unwrap()], &dir.join("env"));
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let text = std::fs::read_to_string(target.join("analytic.csv")).unwrap();
    assert!(text.starts_with("lambda_e,r_e,r_t,r_s,outage,pc_approx,capacity\n"));
    assert!(!dir.join("env").join("analytic.csv").exists());
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn corrupted_eta_ratio_is_flagged() {
    let options = ValidateOptions { n_realizations: 2_000, seed: 5, corrupt_eta_n: Some(100.0) };
    let report = validate_suite(&options, &mut |_| {}).unwrap();
    let connection = report.checks.iter().find(|c| c.name == "connection, exact LoS/NLoS").unwrap();
    assert!(!connection.pass, "{}", report.render());
    assert!(!report.all_pass());
}
