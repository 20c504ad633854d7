use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use regrate::harness::{self, ExperimentConfig};
use regrate::Error;

#[derive(Parser)]
#[command(name = "regrate", version, about = "Regularization rate experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a TOML file.
    Run {
        config: PathBuf,
        /// Output root (default: $REGRATE_OUT or ./regrate-out).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a named preset.
    Preset {
        name: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Print the preset names.
    ListPresets,
}

const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_)
        | Error::Domain(_)
        | Error::Precondition(_)
        | Error::DimensionMismatch { .. }
        | Error::GridMismatch(..) => EXIT_CONFIG,
        _ => EXIT_NUMERICAL,
    }
}

fn execute(config: ExperimentConfig, out: Option<PathBuf>) -> Result<(), Error> {
    let root = out.unwrap_or_else(harness::default_output_root);
    let (record, dir) = harness::run(&config, &root)?;
    println!("wrote {}", dir.display());
    for (k, v) in &record.summary {
        println!("  {k} = {v}");
    }
    for f in &record.flags {
        println!("  flag: {f}");
    }
    if let Some(p) = record.passed {
        println!("  passed = {p}");
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::ListPresets => {
            for name in harness::preset_names() {
                println!("{name}");
            }
            Ok(())
        }
        Command::Run { config, out } => std::fs::read_to_string(&config)
            .map_err(|e| Error::Config(format!("{}: {e}", config.display())))
            .and_then(|text| ExperimentConfig::from_toml(&text))
            .and_then(|cfg| execute(cfg, out)),
        Command::Preset { name, out, seed } => match harness::preset(&name) {
            None => Err(Error::Config(format!(
                "unknown preset '{name}'; available: {}",
                harness::preset_names().join(", ")
            ))),
            Some(mut cfg) => {
                if let Some(s) = seed {
                    cfg.seed = s;
                }
                execute(cfg, out)
            }
        },
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
