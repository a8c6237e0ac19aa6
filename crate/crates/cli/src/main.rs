//! `solora`: run, sweep, compare, calibrate and size batteryless LoRa/FSK
//! node scenarios.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ColorChoice, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "solora", version, about = "Batteryless solar LoRa/FSK node simulator")]
pub struct Cli {
    /// Output directory for CSV and resolved-config files.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,

    /// Override the scenario seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Override a scenario key by dotted path, e.g. `radio.tx_power_dbm=11`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub set: Vec<String>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate one scenario and write summary, events and config echo.
    Run { scenario: PathBuf },

    /// Repeat a scenario over values of one numeric key.
    Sweep {
        scenario: PathBuf,
        /// Dotted scenario key to vary.
        #[arg(long)]
        param: String,
        /// Values: `a,b,c` and/or inclusive `start:stop:step`.
        #[arg(long)]
        values: String,
        /// Seeded runs per value (base seed + index).
        #[arg(long, default_value_t = 1)]
        seeds: usize,
    },

    /// Compare two scenarios that differ only in their radio.
    Compare {
        scenario_a: PathBuf,
        scenario_b: PathBuf,
        /// Channel JSON (e.g. from `calibrate`) replacing both scenarios' channel.
        #[arg(long)]
        channel: Option<PathBuf>,
        /// Distances to sweep, metres.
        #[arg(long, default_value = "25:5000:25")]
        distances: String,
    },

    /// Fit path-loss exponent and shadowing sigma to observed PDRs.
    Calibrate {
        targets: PathBuf,
        /// Search grid, e.g. `n=2:4:0.05,sigma=1:12:0.25`.
        #[arg(long)]
        grid: Option<String>,
    },

    /// Check whether the radio bank alone can carry one packet.
    Feasibility { scenario: PathBuf },
}

fn main() -> ExitCode {
    let color = if std::env::var_os("NO_COLOR").is_some() {
        ColorChoice::Never
    } else {
        ColorChoice::Auto
    };
    let cmd = <Cli as clap::CommandFactory>::command().color(color);
    let cli = match cmd
        .try_get_matches()
        .and_then(|m| <Cli as clap::FromArgMatches>::from_arg_matches(&m))
    {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_validation() { 1 } else { 2 })
        }
    }
}
