//! `rwald`: Monte Carlo simulator for a robust Wald-type detector on
//! correlated non-Gaussian clutter.

mod check;
mod config;
mod run;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use rwald::detector::DetectorConfig;
use rwald::disturbance::ar_psd;
use rwald::montecarlo::ClutterModel;
use rwald::presets;

use config::{load_config, run_preset, RunConfig, RUN_PRESET_NAMES};

#[derive(Parser)]
#[command(
    name = "rwald",
    version,
    about = "Robust Wald detector: clutter simulation, Monte Carlo calibration, closed-form checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte Carlo experiment from a JSON config or a built-in preset.
    Run(RunArgs),
    /// Export the clutter power spectral density of a preset scenario.
    Psd(PsdArgs),
    /// Run the fast invariant suite.
    Check,
}

#[derive(Args)]
struct RunArgs {
    /// Path to a JSON run configuration.
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    config: Option<PathBuf>,
    /// Built-in run preset name.
    #[arg(long)]
    preset: Option<String>,
    /// Override the trial count per cell.
    #[arg(long)]
    trials: Option<usize>,
    /// Override the base seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the CSV output path.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PsdArgs {
    /// Scenario preset name.
    #[arg(long)]
    preset: String,
    /// Destination for the (nu, psd) CSV.
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(args) => run_command(args),
        Command::Psd(args) => psd_command(args).map(|()| 0),
        Command::Check => check_command().map(|()| 0),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
    }
}

fn run_command(args: RunArgs) -> Result<u8, String> {
    let mut config: RunConfig = match (&args.config, &args.preset) {
        (Some(path), None) => load_config(path)?,
        (None, Some(name)) => run_preset(name).ok_or_else(|| {
            format!(
                "unknown run preset '{name}'; known presets: {}",
                RUN_PRESET_NAMES.join(", ")
            )
        })?,
        _ => unreachable!("clap enforces exactly one of --config and --preset"),
    };
    if let Some(trials) = args.trials {
        config.trials = trials;
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(out) = args.out {
        config.output_path = out;
    }
    run::execute(&config)
}

fn psd_command(args: PsdArgs) -> Result<(), String> {
    let detector = DetectorConfig::new(1e-2).expect("valid default rate");
    let scenario =
        presets::by_name(&args.preset, 0.0, None, detector).map_err(|e| e.to_string())?;
    // Compound-Gaussian clutter has unit-mean texture, so its spectral shape
    // is the speckle spectrum.
    let spec = match scenario.clutter() {
        ClutterModel::Ar(spec) => spec.clone(),
        ClutterModel::CompoundGaussian(cg) => cg.speckle().clone(),
    };
    let points = 1024usize;
    let mut text = String::from("nu,psd\n");
    for k in 0..points {
        let nu = -0.5 + k as f64 / points as f64;
        text.push_str(&format!("{nu},{}\n", ar_psd(&spec, nu)));
    }
    fs::write(&args.out, text).map_err(|e| format!("cannot write {}: {e}", args.out.display()))?;
    println!("wrote {points} spectrum points to {}", args.out.display());
    Ok(())
}

fn check_command() -> Result<(), String> {
    check::run_checks()?;
    println!("check: all invariants hold");
    Ok(())
}
