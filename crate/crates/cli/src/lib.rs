//! Command-line front end for the DJM and modified DJM Boussinesq solver.
//!
//! Settings are resolved in the order defaults, `DJM_DIGITS`, `--config` file,
//! flags. Every output file starts with `# key = value` lines that parse back
//! into the configuration that produced it.

pub mod commands;
pub mod config;
pub mod error;
pub mod grid;
pub mod output;

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use commands::Command;
pub use config::{config_from_header, RunConfig};
pub use error::CliError;
pub use output::Report;

#[derive(Debug, Parser)]
#[command(
    name = "djm",
    version,
    about = "DJM / modified DJM series for the Boussinesq equation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: CommandArg,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Clone, Copy, Debug, Subcommand)]
pub enum CommandArg {
    /// Print the series terms as monomial lists.
    Series,
    /// Absolute error of the k-term series against the reference.
    Table,
    /// DJM and MDJM errors side by side.
    Compare,
    /// PDE residual by finite differences.
    Residual,
    /// Curve data at one time.
    Plotdata,
}

impl From<CommandArg> for Command {
    fn from(c: CommandArg) -> Self {
        match c {
            CommandArg::Series => Command::Series,
            CommandArg::Table => Command::Table,
            CommandArg::Compare => Command::Compare,
            CommandArg::Residual => Command::Residual,
            CommandArg::Plotdata => Command::Plotdata,
        }
    }
}

#[derive(Debug, Default, Args)]
pub struct Flags {
    /// Flat `key = value` file applied before the flags.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// example1 | general
    #[arg(long, global = true)]
    pub problem: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub c: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub p: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub q: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub r: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub alpha: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub beta: Option<String>,
    /// + | -
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub sign: Option<String>,
    /// printed | negated | exact (general problem)
    #[arg(long, global = true)]
    pub amplitude: Option<String>,
    /// series | printed (example1 initial velocity)
    #[arg(long, global = true)]
    pub velocity: Option<String>,
    /// djm | mdjm
    #[arg(long, global = true)]
    pub method: Option<String>,
    #[arg(long, global = true)]
    pub terms: Option<String>,
    #[arg(long, global = true)]
    pub digits: Option<String>,
    /// Comma list or start:stop:step.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub x: Option<String>,
    /// Comma list or start:stop:step.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub t: Option<String>,
    /// csv | markdown
    #[arg(long, global = true)]
    pub format: Option<String>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// calibrated | literal | linear-time
    #[arg(long, global = true)]
    pub reference: Option<String>,
    /// series | reference | zero (residual command)
    #[arg(long, global = true)]
    pub subject: Option<String>,
}

impl Flags {
    fn pairs(&self) -> Vec<(&'static str, String)> {
        let text = [
            ("problem", &self.problem),
            ("c", &self.c),
            ("p", &self.p),
            ("q", &self.q),
            ("r", &self.r),
            ("alpha", &self.alpha),
            ("beta", &self.beta),
            ("sign", &self.sign),
            ("amplitude", &self.amplitude),
            ("velocity", &self.velocity),
            ("method", &self.method),
            ("terms", &self.terms),
            ("digits", &self.digits),
            ("x", &self.x),
            ("t", &self.t),
            ("format", &self.format),
            ("reference", &self.reference),
            ("subject", &self.subject),
        ];
        let mut pairs: Vec<(&'static str, String)> = text
            .into_iter()
            .filter_map(|(k, v)| v.clone().map(|v| (k, v)))
            .collect();
        if let Some(out) = &self.out {
            pairs.push(("out", out.display().to_string()));
        }
        pairs
    }
}

/// Applies defaults, the `DJM_DIGITS` value, the config file and the flags, in that order.
pub fn resolve(flags: &Flags, env_digits: Option<&str>) -> Result<RunConfig, CliError> {
    let mut rc = RunConfig::default();
    if let Some(d) = env_digits {
        rc.digits = config::parse_digits(d)
            .map_err(|e| CliError::Config(format!("{}: {e}", config::DIGITS_ENV)))?;
    }
    if let Some(path) = &flags.config {
        rc.apply_file(path)?;
    }
    for (k, v) in flags.pairs() {
        rc.set(k, &v)?;
    }
    Ok(rc)
}

/// Runs one command and renders it in the configured format.
pub fn execute(command: Command, rc: &RunConfig) -> Result<String, CliError> {
    commands::run(command, rc)?.render(rc.format)
}

pub fn run(cli: &Cli, env_digits: Option<&str>) -> Result<(), CliError> {
    let rc = resolve(&cli.flags, env_digits)?;
    let text = execute(cli.command.into(), &rc)?;
    match &rc.out {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}
