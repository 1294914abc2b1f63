use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use udw::config::{Format, RunConfig};
use udw::run::{run, RunContext, EXIT_CONFIG};

#[derive(Parser)]
#[command(name = "udw", version, about = "Gapless Unruh-DeWitt detector laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify the coupling by its R_j integrals.
    Diagnose(Flags),
    /// Closed-form time series.
    Dynamics(Flags),
    /// KMS sweep over inverse temperatures.
    Thermal(Flags),
    /// Closed forms against the truncated-Fock oracle.
    Validate(Flags),
}

#[derive(clap::Args)]
struct Flags {
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<OutFormat>,
    /// Accepted for scripts; no random numbers are drawn anywhere.
    #[arg(long)]
    seedless: bool,
}

#[derive(ValueEnum, Clone, Copy, PartialEq, Eq)]
enum OutFormat {
    Json,
    Csv,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, flags) = match cli.command {
        Command::Diagnose(f) => ("diagnose", f),
        Command::Dynamics(f) => ("dynamics", f),
        Command::Thermal(f) => ("thermal", f),
        Command::Validate(f) => ("validate", f),
    };
    let Some(path) = flags.config else {
        eprintln!("error: --config PATH is required");
        return ExitCode::from(EXIT_CONFIG as u8);
    };
    let cfg = match RunConfig::load(&path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG as u8);
        }
    };
    if cfg.task.name() != name {
        eprintln!("error: config describes a {} task, not {name}", cfg.task.name());
        return ExitCode::from(EXIT_CONFIG as u8);
    }
    let base = path.parent().map(PathBuf::from).unwrap_or_default();
    let mut ctx = RunContext::from_config(&cfg, base);
    if let Some(out) = flags.out {
        ctx.out_dir = out;
    }
    if let Some(f) = flags.format {
        ctx.formats = vec![match f {
            OutFormat::Json => Format::Json,
            OutFormat::Csv => Format::Csv,
        }];
    }
    match run(&cfg, &ctx) {
        Ok(outcome) => {
            print!("{}", outcome.summary);
            for f in &outcome.files {
                println!("wrote {}", f.display());
            }
            ExitCode::from(outcome.exit_code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_CONFIG as u8)
        }
    }
}
