//! Batch front end: `simulate`, `process`, `fit` and `report`.

mod commands;
mod manifest;
mod output;

pub use commands::{
    fit, process, report, simulate, CampaignSource, FitArgs, ProcessArgs, ReportArgs, SimulateArgs,
};
pub use manifest::RunManifest;

use clap::{Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "rischan", version, about = "RIS channel measurement synthesis, processing and path-loss fitting")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Synthesize raw sweeps for one or more campaigns.
    Simulate(SimulateArgs),
    /// Calibrate sweeps and derive path loss, PDPs and RMS delay spreads.
    Process(ProcessArgs),
    /// Fit a path-loss model to processed results.
    Fit(FitArgs),
    /// Emit plot-ready data files from fits and processed results.
    Report(ReportArgs),
}

pub fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Simulate(a) => simulate(&a).map(|_| ()),
        Command::Process(a) => process(&a).map(|_| ()),
        Command::Fit(a) => fit(&a).map(|_| ()),
        Command::Report(a) => report(&a).map(|_| ()),
    }
}
