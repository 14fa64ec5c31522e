use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use coexist_cli::commands::{thresholds_report, validate};
use coexist_cli::config::{GridChoice, Overrides, RunConfig};
use coexist_cli::pipeline;
use coexist_core::risk::ThresholdSet;

#[derive(Parser)]
#[command(
    name = "coexist",
    version,
    about = "Urban 5G to satellite radiometer interference analysis"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Trace and cache rays for every transmitter and pose.
    Trace(RunArgs),
    /// Full pipeline: trace, interference, risk reports and manifest.
    Run(RunArgs),
    /// Check the config and its input files without tracing.
    Validate(RunArgs),
    /// Print the detection thresholds.
    Thresholds,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides `output`).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    grid: Option<GridChoice>,
    #[arg(long)]
    seed: Option<u64>,
    /// Added to every transmitter power.
    #[arg(long, allow_hyphen_values = true)]
    ptx_offset_db: Option<f64>,
    #[arg(long, value_parser = clap::value_parser!(u8).range(2..=3))]
    scintillation_exponent: Option<u8>,
}

impl RunArgs {
    fn load(&self) -> Result<RunConfig> {
        let mut c = RunConfig::load(&self.config)?;
        c.apply(&Overrides {
            out: self.out.clone(),
            grid: self.grid,
            seed: self.seed,
            ptx_offset_db: self.ptx_offset_db,
            scintillation_exponent: self.scintillation_exponent,
        });
        Ok(c)
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Thresholds => print!("{}", thresholds_report(&ThresholdSet::default())),
        Command::Validate(a) => {
            let v = validate(&a.load()?);
            print!("{}", v.render());
            if !v.is_ok() {
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Trace(a) => {
            let s = pipeline::trace(&a.load()?)?;
            let (hits, traced, corrupt) = s.cache;
            println!(
                "{} transmitters x {} poses: {hits} cached, {traced} traced, {corrupt} corrupt entries replaced",
                s.transmitters, s.poses
            );
        }
        Command::Run(a) => {
            let config = a.load()?;
            let s = pipeline::run(&config)?;
            let (hits, traced, corrupt) = s.cache;
            println!(
                "{} poses, {} files in {} ({hits} cached, {traced} traced, {corrupt} corrupt)",
                s.poses,
                s.files.len(),
                config.output_dir()?.display()
            );
        }
    }
    Ok(ExitCode::SUCCESS)
}
