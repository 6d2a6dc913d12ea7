//! Library side of the `kappa` command-line tool.

pub mod commands;
pub mod format;
pub mod manifest;
pub mod report;

use clap::{Parser, Subcommand, ValueEnum};
use thiserror::Error;

pub use commands::{run, Outcome};

/// Bad flags or flag values. Exit code 1.
#[derive(Debug, Error)]
#[error("{0}")]
pub struct UsageError(pub String);

/// An engine failure at a point. Exit code 3.
#[derive(Debug, Error)]
#[error("{0}")]
pub struct NumericError(pub String);

pub const EXIT_USAGE: i32 = 1;
pub const EXIT_MANIFEST: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

/// Exit code for an error chain.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    for cause in err.chain() {
        if cause.is::<UsageError>() {
            return EXIT_USAGE;
        }
        if cause.is::<manifest::ManifestError>() {
            return EXIT_MANIFEST;
        }
    }
    EXIT_NUMERIC
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Parser)]
#[command(name = "kappa", version, about = "Curvature invariants of metric and immersed spaces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Manifest file, or the name of a built-in manifest.
    #[arg(long, global = true)]
    pub manifest: Option<String>,

    /// Evaluate at one point: `name=value,...` (all coordinates).
    #[arg(long, global = true, conflicts_with = "grid")]
    pub at: Option<String>,

    /// Evaluate on a grid: `name=lo:hi:n,...` (all coordinates).
    #[arg(long, global = true)]
    pub grid: Option<String>,

    /// Pivot pair for the intrinsic route: `auto`, `max`, or `p,q` (1-based).
    #[arg(long, global = true, default_value = "auto")]
    pub pivot: String,

    /// Output format; defaults to csv for `sweep`, text for `verify-example`
    /// and `chio-det`, json otherwise.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<std::path::PathBuf>,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Metric, Christoffel symbols, Riemann tensor and scalar curvature.
    Tensors,
    /// The kappa invariant by both routes, with residuals and flags.
    Kappa,
    /// Principal curvature directions of an immersed ambient.
    Principal,
    /// Kappa over a grid, one CSV row per point.
    Sweep,
    /// Both spherically symmetric example metrics against their closed forms.
    VerifyExample,
    /// Determinant of a matrix from a CSV file, by LU and by Chio condensation.
    ChioDet {
        /// CSV file, one matrix row per line, no header.
        input: std::path::PathBuf,
        /// Fixed first pivot `r,c` (1-based) instead of the largest entry.
        #[arg(long)]
        fixed: Option<String>,
    },
}
