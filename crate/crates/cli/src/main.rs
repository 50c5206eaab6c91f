use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ncphase_cli::{parse_b0_list, run, sweep, CliError};

#[derive(Parser)]
#[command(name = "ncphase", version, about = "Gaussian-state fidelity under noncommutative oscillator dynamics and thermal diffusion")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one configuration.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `output.path`.
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Simulate the configuration once per effective field.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated field values, e.g. `0,0.5,1`.
        #[arg(long, allow_hyphen_values = true)]
        b0: String,
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
}

fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run { config, output_dir } => {
            let r = run(&config, output_dir.as_deref())?;
            println!(
                "{} rows -> {}; witness measure {:e} over {} interval(s)",
                r.series.len(),
                r.config.output_path.display(),
                r.witness.measure,
                r.witness.intervals.len()
            );
        }
        Command::Sweep {
            config,
            b0,
            output_dir,
        } => {
            let list = parse_b0_list(&b0)?;
            let results = sweep(&config, &list, output_dir.as_deref())?;
            for (b0, r) in list.iter().zip(&results) {
                println!("b0 = {b0}: witness measure {:e}", r.witness.measure);
            }
            if let Some(r) = results.first() {
                println!("outputs in {}", r.config.output_path.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ncphase: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
