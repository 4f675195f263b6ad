//! Command-line flags, the optional JSON config file, and the validated
//! run configuration.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Parser, Debug)]
#[command(
    name = "rkb",
    version,
    about = "Boundary spaces of positive definite kernels at finite resolution"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: CommandName,
    #[command(flatten)]
    pub options: Options,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandName {
    /// Positive semidefiniteness of the section Gram matrix
    PdCheck,
    /// Boundary factorization N = conj(G) on a section
    Factorize,
    /// Norm preservation of the boundary transform on random elements
    Isometry,
    /// Finite-section Carleson constant
    Carleson,
    /// Adjoint applied after the boundary transform, at probe points
    AdjointRoundtrip,
    /// Least-squares residual of an exponential on nested sections
    Project,
    /// Gaussian process marginals on a section
    Gp,
    /// Shannon reconstruction of a shifted sinc
    Shannon,
    /// Orthonormality of the Lambda_4 exponentials and Parseval defects
    CantorOnb,
    /// Pushforward check and commuting diagram on atomic boundaries
    Morphism,
}

impl CommandName {
    pub fn name(&self) -> &'static str {
        match self {
            CommandName::PdCheck => "pd-check",
            CommandName::Factorize => "factorize",
            CommandName::Isometry => "isometry",
            CommandName::Carleson => "carleson",
            CommandName::AdjointRoundtrip => "adjoint-roundtrip",
            CommandName::Project => "project",
            CommandName::Gp => "gp",
            CommandName::Shannon => "shannon",
            CommandName::CantorOnb => "cantor-onb",
            CommandName::Morphism => "morphism",
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// Every setting, as given on the command line or in a config file.
#[derive(Args, Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct Options {
    /// szego | bargmann | sinc | cantor[:L] | features:FILE | gram:FILE
    #[arg(long, global = true)]
    pub kernel: Option<String>,
    /// uniform:N | gauss-hermite:N | cantor:D | band:N | atoms
    #[arg(long, global = true)]
    pub measure: Option<String>,
    /// grid5 | disk:N:R:SEED | line:N:H:SEED | indices | FILE
    #[arg(long, global = true)]
    pub points: Option<String>,
    /// Verdict tolerance; each command has its own default
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub tol: Option<f64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Sample, trial or probe count, or the Shannon half-width
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    /// Lambda_4 level for cantor-onb
    #[arg(long, global = true)]
    pub level: Option<u32>,
    /// Factor applied to every weight of the boundary measure
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub scale: Option<f64>,
    /// Expected Carleson constant
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub target: Option<f64>,
    /// Integer frequency of the target exponential (project, cantor-onb)
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub frequency: Option<i64>,
    /// Shift of the sinc target for shannon
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub shift: Option<f64>,
    /// JSON file describing the measures and map for morphism
    #[arg(long, global = true)]
    pub map: Option<PathBuf>,
    /// Write the report here instead of standard output
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Emit only this table (CSV output)
    #[arg(long, global = true)]
    pub table: Option<String>,
    /// Worker threads; 1 gives byte-stable reports
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// JSON file with any of the settings above; flags take precedence
    #[arg(long, global = true)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

macro_rules! prefer_flags {
    ($flags:expr, $file:expr, $($field:ident),*) => {
        Options { $($field: $flags.$field.or($file.$field),)* config: $flags.config }
    };
}

impl Options {
    pub fn overlay(self, file: Options) -> Options {
        prefer_flags!(
            self, file, kernel, measure, points, tol, seed, samples, level, scale, target,
            frequency, shift, map, out, format, table, threads
        )
    }
}

fn read_config(path: &Path) -> CliResult<Options> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::usage(format!("malformed config {}: {e}", path.display())))
}

/// Settings after merging and validation. Optional values keep their
/// per-command defaults, which the command fills in.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: CommandName,
    pub kernel: Option<String>,
    pub measure: Option<String>,
    pub points: Option<String>,
    pub tol: Option<f64>,
    pub seed: u64,
    pub samples: Option<usize>,
    pub level: Option<u32>,
    pub scale: f64,
    pub target: Option<f64>,
    pub frequency: Option<i64>,
    pub shift: Option<f64>,
    pub map: Option<PathBuf>,
    #[serde(skip)]
    pub out: Option<PathBuf>,
    pub format: Format,
    pub table: Option<String>,
    #[serde(skip)]
    pub threads: usize,
}

impl RunConfig {
    /// The kernel descriptor, Szegő when none was given.
    pub fn kernel_descriptor(&self) -> &str {
        self.kernel.as_deref().unwrap_or("szego")
    }
}

fn positive(name: &str, value: Option<f64>) -> CliResult<()> {
    match value {
        Some(v) if !(v > 0.0 && v.is_finite()) => Err(CliError::usage(format!(
            "--{name} must be positive, got {v}"
        ))),
        _ => Ok(()),
    }
}

pub fn parse_config(cli: Cli) -> CliResult<RunConfig> {
    let options = match cli.options.config.clone() {
        Some(path) => cli.options.overlay(read_config(&path)?),
        None => cli.options,
    };
    positive("tol", options.tol)?;
    positive("scale", options.scale)?;
    if options.shift.is_some_and(|s| !s.is_finite()) {
        return Err(CliError::usage("--shift must be finite"));
    }
    if let Some(t) = options.target {
        positive("target", Some(t))?;
    }
    if options.samples == Some(0) {
        return Err(CliError::usage("--samples must be at least one"));
    }
    if options.table.is_some() && options.format != Some(Format::Csv) {
        return Err(CliError::usage(
            "--table selects a CSV table and needs --format csv",
        ));
    }
    Ok(RunConfig {
        command: cli.command,
        kernel: options.kernel,
        measure: options.measure,
        points: options.points,
        tol: options.tol,
        seed: options.seed.unwrap_or(42),
        samples: options.samples,
        level: options.level,
        scale: options.scale.unwrap_or(1.0),
        target: options.target,
        frequency: options.frequency,
        shift: options.shift,
        map: options.map,
        out: options.out,
        format: options.format.unwrap_or_default(),
        table: options.table,
        threads: options.threads.unwrap_or(0),
    })
}
