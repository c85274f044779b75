//! Command-line front end for the sixsoid coverage library.

mod commands;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Default RNG seed for every sampled quantity; override with --seed where
/// the command exposes it.
pub const DEFAULT_SEED: u64 = 20260810;

#[derive(Parser)]
#[command(
    name = "sixsoid",
    version,
    about = "Coverage volumes, slice areas, deployment planning and model comparisons \
             for six-sphere cube cells in 3D k-coverage planning"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the 6-covered volume, the exactly-3-covered volume, or the
    /// full k-coverage volume profile of one cube cell.
    Volume(VolumeArgs),
    /// Inspect one cross-section: analytic area, sampled estimate and their
    /// discrepancy in standard errors.
    Slice(SliceArgs),
    /// Tessellate a polycubical field of interest and write the face-center
    /// sensor plan with its coverage statistics.
    Plan(PlanArgs),
    /// Emit the volume or spatial-density comparison tables (CSV).
    Tables(TablesArgs),
    /// Run the internal validation suite: continuity, symmetry, sampler
    /// equivalence and Monte-Carlo agreement.
    Validate(ValidateArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Quantity {
    /// Volume 6-covered by the cell's own spheres.
    Sixsoid,
    /// Volume covered by exactly 3 of the cell's own spheres.
    Only3,
    /// Volumes covered by at least k spheres, k = 1..=6.
    Kprofile,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TableKind {
    Volume,
    Density,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Fault {
    None,
    /// Evaluate the eight-arc slice area with a chord expression that fails
    /// to vanish at the tangency depth, to demonstrate that the equivalence
    /// checks reject a faulty formula.
    Chord,
}

#[derive(Args)]
pub struct VolumeArgs {
    /// Cube side and sensing radius.
    #[arg(long, allow_negative_numbers = true)]
    pub radius: f64,
    #[arg(long, value_enum, default_value = "sixsoid")]
    pub quantity: Quantity,
    /// Absolute integration tolerance per unit radius cubed.
    #[arg(long, default_value_t = 1e-8, allow_negative_numbers = true)]
    pub tolerance: f64,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

#[derive(Args)]
pub struct SliceArgs {
    /// Cube side and sensing radius.
    #[arg(long, allow_negative_numbers = true)]
    pub radius: f64,
    /// Slice depth from the top face.
    #[arg(long, required_unless_present = "sweep", allow_negative_numbers = true)]
    pub x: Option<f64>,
    /// Coverage level; the analytic area is reported for k = 6 (the default).
    #[arg(long)]
    pub k: Option<u32>,
    /// Monte Carlo samples for the slice estimate.
    #[arg(long, default_value_t = 1_000_000)]
    pub samples: u64,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    /// Instead of one slice, emit a plot-ready CSV of (x, area) with this
    /// many panels over [0, radius].
    #[arg(long)]
    pub sweep: Option<usize>,
}

#[derive(Args)]
pub struct PlanArgs {
    /// Field-of-interest JSON: {"cell_size": s, "cells": [[i,j,k], ...]} or
    /// {"cell_size": s, "dims": [W,H,D]}.
    #[arg(long)]
    pub foi: std::path::PathBuf,
    /// Write the deployment plan JSON here.
    #[arg(long)]
    pub out: Option<std::path::PathBuf>,
    /// Monte Carlo samples for the coverage statistics.
    #[arg(long, default_value_t = 1_000_000)]
    pub samples: u64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Re-check coverage of an existing plan file instead of enumerating
    /// sensors from the field of interest.
    #[arg(long)]
    pub verify_plan: Option<std::path::PathBuf>,
}

#[derive(Args)]
pub struct TablesArgs {
    #[arg(long, value_enum)]
    pub which: TableKind,
    /// Comma-separated sensing radii (volume table).
    #[arg(long, required_if_eq("which", "volume"))]
    pub radii: Option<String>,
    /// Sensing radius (density table).
    #[arg(long, required_if_eq("which", "density"))]
    pub r: Option<f64>,
    /// Largest coverage degree of the density table (rows k = 4..=kmax).
    #[arg(long, required_if_eq("which", "density"))]
    pub kmax: Option<u32>,
}

#[derive(Args)]
pub struct ValidateArgs {
    #[arg(long, default_value_t = 1.0)]
    pub radius: f64,
    /// 3D Monte Carlo samples.
    #[arg(long, default_value_t = 10_000_000)]
    pub samples: u64,
    /// Monte Carlo samples per slice in the equivalence checks.
    #[arg(long, default_value_t = 1_000_000)]
    pub slice_samples: u64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Deliberately inject a faulty formula; the suite must then fail.
    #[arg(long, value_enum, default_value = "none")]
    pub inject_fault: Fault,
}

/// Failure modes of a command, mapped onto exit codes: bad input is 1,
/// failed science (non-convergence, failed validation) is 2.
pub enum CliError {
    Input(String),
    Science(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 1,
            CliError::Science(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Input(m) | CliError::Science(m) => m,
        }
    }
}

impl From<sixsoid::Error> for CliError {
    fn from(err: sixsoid::Error) -> Self {
        match err {
            sixsoid::Error::ToleranceNotReached { .. } => CliError::Science(err.to_string()),
            _ => CliError::Input(err.to_string()),
        }
    }
}

fn main() -> ExitCode {
    // Map clap's own failures onto the documented exit codes: bad usage is
    // input error (1), help/version are success.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Volume(args) => commands::volume(&args),
        Command::Slice(args) => commands::slice(&args),
        Command::Plan(args) => commands::plan(&args),
        Command::Tables(args) => commands::tables(&args),
        Command::Validate(args) => commands::validate(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", err.message());
            ExitCode::from(err.exit_code())
        }
    }
}
