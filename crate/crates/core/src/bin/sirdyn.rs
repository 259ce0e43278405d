use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use sir_dynamics::cli::sweep::{self, Grid};
use sir_dynamics::cli::verify::{run_verify, VerifyOptions};
use sir_dynamics::cli::{self, CliError, Scenario};

#[derive(Parser)]
#[command(
    name = "sirdyn",
    version,
    about = "SIR epidemic simulations, regime analysis and sweeps"
)]
struct Args {
    #[command(subcommand)]
    command: Command,
    /// Accepted for compatibility; every run is deterministic.
    #[arg(long, global = true)]
    seedless: bool,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate a scenario; writes trajectory.csv, events.csv and report.toml.
    Simulate {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Regime of a threshold scenario, from the closed forms only.
    Classify {
        #[arg(long)]
        scenario: PathBuf,
    },
    /// Run a scenario template over a parameter grid; writes sweep.csv.
    Sweep {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        grid: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Worker threads; 0 uses every core.
        #[arg(long, default_value_t = 0)]
        workers: usize,
    },
    /// Run the invariant suite.
    Verify {
        /// Also write verify.toml here.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 1.0)]
        tolerance_scale: f64,
        #[arg(long, hide = true)]
        epsilon_bar_override: Option<f64>,
    },
}

fn run(args: Args) -> Result<(), CliError> {
    match args.command {
        Command::Simulate { scenario, out } => {
            let outputs = cli::simulate(&Scenario::load(&scenario)?, &out)?;
            println!("wrote {}", outputs.report.display());
        }
        Command::Classify { scenario } => print!("{}", cli::classify(&Scenario::load(&scenario)?)?),
        Command::Sweep {
            scenario,
            grid,
            out,
            workers,
        } => {
            let rows = sweep::sweep(&Scenario::load(&scenario)?, &Grid::load(&grid)?, workers, &out)?;
            let failed = rows.iter().filter(|r| !r.error.is_empty()).count();
            println!(
                "{} rows ({failed} with errors) -> {}",
                rows.len(),
                out.join(cli::SWEEP_FILE).display()
            );
        }
        Command::Verify {
            out,
            tolerance_scale,
            epsilon_bar_override,
        } => {
            let report = run_verify(VerifyOptions {
                tolerance_scale,
                epsilon_bar_override,
            });
            for c in &report.checks {
                let mark = if c.passed { "pass" } else { "FAIL" };
                println!(
                    "{mark} {:<32} {:>12.3e} (limit {:.1e}) {}",
                    c.name, c.measured, c.limit, c.note
                );
            }
            if let Some(dir) = out {
                cli::write_atomic(&dir.join(cli::VERIFY_FILE), report.to_toml().as_bytes())?;
            }
            if !report.all_passed() {
                return Err(CliError::Verification(report.failed));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    let _ = (args.seedless, args.format);
    match run(args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("sirdyn: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
