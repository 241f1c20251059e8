//! `qperg`: batch driver for time-average sweeps, joint level-set
//! partitions, boundedness reports and raster rendering.
//!
//! Exit status: 0 success, 1 validation failure, 2 numeric failure,
//! 3 I/O or malformed file.

mod commands;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use qpergodic::Error;

#[derive(Parser)]
#[command(name = "qperg", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Suite {
    Harmonic,
    Dissipative,
    Integrator,
}

#[derive(Subcommand)]
enum Command {
    /// Run the closed-form and integrator checks.
    Verify { suite: Suite },
    /// Integrate every grid vertex and write one field file per observable.
    Sweep {
        /// Configuration file, or the name of a bundled preset.
        config: String,
        /// Overrides the configuration's output directory.
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Suppress per-row progress.
        #[arg(long)]
        quiet: bool,
    },
    /// Joint level sets of field files and their boundedness report.
    Partition {
        #[arg(required = true)]
        fields: Vec<PathBuf>,
        /// `auto`, `bins:N`, or comma-separated bin widths.
        #[arg(long, default_value = "auto")]
        eps: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Render a field or partition file as a binary PPM.
    Render { input: PathBuf, output: PathBuf },
    /// Compare bounded regions across stroboscopic phase shifts.
    Phases {
        /// Configuration file, or the name of a bundled preset.
        config: String,
        /// Comma-separated shifts; `a-b` denotes a range.
        #[arg(long, value_parser = parse_k_list)]
        k: KList,
        /// Output table; defaults to `<dir>/<name>.phases.tsv`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the bundled presets.
    Presets,
}

#[derive(Clone)]
struct KList(Vec<u32>);

fn parse_k_list(s: &str) -> Result<KList, String> {
    let mut ks = Vec::new();
    for part in s.split(',') {
        let part = part.trim();
        let bad = || format!("bad k value `{part}`");
        match part.split_once('-') {
            Some((a, b)) => {
                let a: u32 = a.trim().parse().map_err(|_| bad())?;
                let b: u32 = b.trim().parse().map_err(|_| bad())?;
                if a > b {
                    return Err(bad());
                }
                ks.extend(a..=b);
            }
            None => ks.push(part.parse().map_err(|_| bad())?),
        }
    }
    Ok(KList(ks))
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io { .. } | Error::Format { .. } => 3,
        e if e.is_validation() => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match &cli.command {
        Command::Verify { suite } => {
            let name = match suite {
                Suite::Harmonic => "harmonic",
                Suite::Dissipative => "dissipative",
                Suite::Integrator => "integrator",
            };
            match commands::run_verify(name) {
                Ok(0) => Ok(()),
                Ok(n) => {
                    eprintln!("{n} check(s) failed");
                    return ExitCode::from(2);
                }
                Err(e) => Err(e),
            }
        }
        Command::Sweep {
            config,
            out_dir,
            quiet,
        } => commands::run_sweep(config, out_dir.as_deref(), *quiet).map(drop),
        Command::Partition { fields, eps, out } => {
            commands::run_partition(fields, eps, out).map(drop)
        }
        Command::Render { input, output } => commands::run_render(input, output),
        Command::Phases { config, k, out } => {
            commands::run_phases(config, &k.0, out.as_deref()).map(drop)
        }
        Command::Presets => {
            for n in qpergodic::presets::names() {
                println!("{n}");
            }
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
