use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use sagnac_qfc::sweep::{self, Command, KeyValues, SweepError};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Subcommand {
    Spectrum,
    Grid2d,
    Wstate,
    Oracle,
    Design,
}

impl From<Subcommand> for Command {
    fn from(s: Subcommand) -> Self {
        match s {
            Subcommand::Spectrum => Command::Spectrum,
            Subcommand::Grid2d => Command::Grid2d,
            Subcommand::Wstate => Command::WState,
            Subcommand::Oracle => Command::Oracle,
            Subcommand::Design => Command::Design,
        }
    }
}

/// Frequency-conversion sweeps for a driven multi-Λ atom in a Sagnac loop.
///
/// Values from `--set` override the config file. All rates are in the same
/// units as `gamma1` (default 1).
#[derive(Parser, Debug)]
#[command(version)]
struct Cli {
    #[arg(value_enum)]
    command: Subcommand,
    /// Flat `key = value` config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one key, e.g. `--set rabi1=2`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// CSV destination; stdout if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for the sweep.
    #[arg(long, default_value_t = 1)]
    workers: usize,
}

fn run(cli: &Cli) -> Result<i32, SweepError> {
    let mut kv = match &cli.config {
        Some(path) => KeyValues::parse(&fs::read_to_string(path)?)?,
        None => KeyValues::default(),
    };
    for s in &cli.overrides {
        kv.set(s)?;
    }
    let report = sweep::execute(cli.command.into(), &kv, cli.workers)?;
    match &cli.out {
        Some(path) => {
            fs::write(path, &report.csv)?;
            let mut stdout = io::stdout().lock();
            for line in &report.summary {
                writeln!(stdout, "{line}")?;
            }
        }
        None => {
            io::stdout().lock().write_all(report.csv.as_bytes())?;
            for line in &report.summary {
                eprintln!("{line}");
            }
        }
    }
    Ok(report.exit_code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
