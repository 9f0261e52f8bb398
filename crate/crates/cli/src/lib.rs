//! Batch front end: read a JSON config, run one core operation, write a JSON report.

pub mod commands;
pub mod config;
pub mod report;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use commands::{CliError, Output};
use config::{parse_ball, RunConfig};
use report::Envelope;

#[derive(Debug, Parser)]
#[command(name = "gammalab", version, about = "Scalar-set supercyclicity experiments for shift operators")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classify a scalar set and, optionally, the density of its rotations in C.
    Classify(CommonArgs),
    /// Build a vector with dense scaled orbit under the unilateral backward shift.
    Build21(CommonArgs),
    /// Build a vector with dense scaled orbit under the doubling weighted bilateral shift.
    Build22(CommonArgs),
    /// Spiral scalar operator on C: distance from a target to the scaled orbit.
    Spiral(CommonArgs),
    /// Epsilon-density scan of a scaled orbit on a coordinate section.
    Density(DensityArgs),
    /// Check the three criterion conditions on finite data.
    Criterion(CommonArgs),
    /// Winding number of a closed curve on the unit circle.
    Winding(CommonArgs),
    /// Estimate the multiplier sets from a finite orbit.
    LambdaEst(CommonArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Also write the command's CSV tables next to the report.
    #[arg(long)]
    pub emit_csv: bool,
}

#[derive(Debug, Args)]
pub struct DensityArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Comma-separated coordinate indices.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub section: Option<Vec<i64>>,
    /// Ball as `re,im[,re,im...]:radius`.
    #[arg(long, allow_hyphen_values = true)]
    pub ball: Option<String>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub grid_step: Option<f64>,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Classify(_) => "classify",
            Command::Build21(_) => "build21",
            Command::Build22(_) => "build22",
            Command::Spiral(_) => "spiral",
            Command::Density(_) => "density",
            Command::Criterion(_) => "criterion",
            Command::Winding(_) => "winding",
            Command::LambdaEst(_) => "lambda-est",
        }
    }

    fn common(&self) -> &CommonArgs {
        match self {
            Command::Density(d) => &d.common,
            Command::Classify(c)
            | Command::Build21(c)
            | Command::Build22(c)
            | Command::Spiral(c)
            | Command::Criterion(c)
            | Command::Winding(c)
            | Command::LambdaEst(c) => c,
        }
    }
}

pub fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Precondition(format!("config file {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Precondition(format!("config file {}: {e}", path.display())))
}

fn apply_overrides(cfg: &mut RunConfig, args: &DensityArgs) -> Result<(), CliError> {
    let RunConfig::Density(d) = cfg else { return Ok(()) };
    if let Some(s) = &args.section {
        d.section = s.clone();
    }
    if let Some(b) = &args.ball {
        let (center, radius) = parse_ball(b).map_err(|e| CliError::Precondition(format!("--ball: {e}")))?;
        d.center = center;
        d.radius = radius;
    }
    if let Some(e) = args.eps {
        d.epsilon = e;
    }
    if let Some(g) = args.grid_step {
        d.grid_step = g;
    }
    Ok(())
}

pub fn execute(cfg: &RunConfig) -> Result<Output, CliError> {
    match cfg {
        RunConfig::Classify(c) => commands::run_classify(c),
        RunConfig::Build21(c) => commands::run_build21(c),
        RunConfig::Build22(c) => commands::run_build22(c),
        RunConfig::Spiral(c) => commands::run_spiral(c),
        RunConfig::Density(c) => commands::run_density(c),
        RunConfig::Criterion(c) => commands::run_criterion(c),
        RunConfig::Winding(c) => commands::run_winding(c),
        RunConfig::LambdaEst(c) => commands::run_lambda(c),
    }
}

/// Runs one subcommand and returns the paths written.
pub fn run(cli: &Cli) -> Result<Vec<PathBuf>, CliError> {
    let common = cli.command.common();
    let mut cfg = load_config(&common.config)?;
    if cfg.command_name() != cli.command.name() {
        return Err(CliError::Precondition(format!(
            "config is for `{}` but the subcommand is `{}`",
            cfg.command_name(),
            cli.command.name()
        )));
    }
    if let Command::Density(args) = &cli.command {
        apply_overrides(&mut cfg, args)?;
    }
    let out = execute(&cfg)?;
    let io_err = |e: std::io::Error| CliError::Internal(format!("writing to {}: {e}", common.out.display()));
    std::fs::create_dir_all(&common.out).map_err(io_err)?;
    let stem = cfg.command_name().replace('-', "_");
    let mut written =
        vec![report::write_json(&common.out, &format!("{stem}_report.json"), &Envelope::new(&cfg, out.result))
            .map_err(io_err)?];
    if common.emit_csv {
        for t in &out.tables {
            written.push(report::write_csv(&common.out, &t.file, &t.header, &t.rows).map_err(io_err)?);
        }
    }
    Ok(written)
}
