// Copyright 2026 The quasilinear Authors
// SPDX-License-Identifier: Apache-2.0

//! `quasilinear` command-line runner.
//!
//! Exit codes: 0 success, 2 configuration or input error, 3 numerical failure.

mod commands;
mod output;
mod svg;

use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "quasilinear", version, about = "Quasilinear selective-measurement simulator for two-level systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one branch of a scenario; writes trajectory.csv and report.toml.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the scenario seed when lambda = "sample".
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run a scenario over a parameter grid; writes sweep.csv.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// One of Theta, theta, g0, kappa, lambda, n0. Overrides the [sweep] section.
        #[arg(long, requires = "values")]
        variable: Option<String>,
        /// Comma-separated values or expressions; n0 entries are "x y z".
        #[arg(long, requires = "variable")]
        values: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Born-sample outcomes; writes ensemble.csv, outcomes.csv and deviation_histogram.csv.
    Sample {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 100_000)]
        runs: u64,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Distance-parametrized Stern–Gerlach run with the closed-form overlay.
    Sg {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Admissible (theta, Theta) cross-section at fixed alpha.
    ParamSpace {
        /// Observable polar angle; expressions such as "pi/2" are accepted.
        #[arg(long, allow_hyphen_values = true)]
        alpha: String,
        #[arg(long, default_value_t = 181)]
        resolution: usize,
        #[arg(long)]
        out: PathBuf,
        /// Also write cross_section.svg.
        #[arg(long)]
        svg: bool,
    },
    /// Render a trajectory CSV as SVG.
    Plot {
        csv: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        log_axis: bool,
    },
}

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub const CONFIG: u8 = 2;
    pub const NUMERIC: u8 = 3;

    pub fn config(message: impl Into<String>) -> Self {
        Self { code: Self::CONFIG, message: message.into() }
    }

    pub fn numeric(message: impl Into<String>) -> Self {
        Self { code: Self::NUMERIC, message: message.into() }
    }

    pub fn io(path: &Path, e: std::io::Error) -> Self {
        Self::config(format!("{}: {e}", path.display()))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<quasilinear::Error> for CliError {
    fn from(e: quasilinear::Error) -> Self {
        use quasilinear::Error as E;
        match e {
            E::Integration { .. } | E::Overflow(_) => Self::numeric(e.to_string()),
            _ => Self::config(e.to_string()),
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        Self::config(e.to_string())
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate { config, out, seed } => commands::simulate(&config, &out, seed),
        Command::Sweep { config, out, variable, values, seed } => {
            commands::sweep(&config, &out, variable.as_deref(), values.as_deref(), seed)
        }
        Command::Sample { config, out, runs, seed } => commands::sample(&config, &out, runs, seed),
        Command::Sg { config, out, seed } => commands::sg(&config, &out, seed),
        Command::ParamSpace { alpha, resolution, out, svg } => commands::param_space(&alpha, resolution, &out, svg),
        Command::Plot { csv, out, log_axis } => commands::plot(&csv, &out, log_axis),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code)
        }
    }
}
