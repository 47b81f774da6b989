use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use uavsec_cli::{run_config, validate_suite, CliError, ValidateOptions};

#[derive(Parser)]
#[command(name = "uavsec", version, about = "Secrecy transmission experiments for UAV networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a configuration file.
    Run { config: PathBuf },
    /// Compare closed forms with simulation at the bundled configurations.
    Validate {
        /// Monte Carlo realizations per sweep point.
        #[arg(long, default_value_t = 100_000)]
        n: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Multiply η_N in the closed forms by this factor (negative control).
        #[arg(long)]
        corrupt_eta_n: Option<f64>,
    },
    /// Print the version.
    Version,
}

fn fail(e: CliError) -> ExitCode {
    eprintln!("error ({}): {e}", e.kind());
    ExitCode::from(e.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config } => match run_config(&config, &mut |line| println!("{line}")) {
            Ok(path) => {
                println!("wrote {}", path.display());
                ExitCode::SUCCESS
            }
            Err(e) => fail(e),
        },
        Command::Validate { n, seed, corrupt_eta_n } => {
            let options = ValidateOptions { n_realizations: n, seed, corrupt_eta_n };
            match validate_suite(&options, &mut |line| println!("{line}")) {
                Ok(report) => {
                    print!("{}", report.render());
                    if report.all_pass() {
                        ExitCode::SUCCESS
                    } else {
                        ExitCode::from(1)
                    }
                }
                Err(e) => fail(e),
            }
        }
        Command::Version => {
            println!("uavsec {}", env!("CARGO_PKG_VERSION"));
            ExitCode::SUCCESS
        }
    }
}
