//! Run configuration: defaults, then `DJM_DIGITS`, then a flat `key = value`
//! file, then command-line flags.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use djm_core::boussinesq::{AmplitudeForm, Direction, Example1Velocity};
use djm_core::precision::{DEFAULT_DIGITS, MIN_DIGITS};
use djm_core::Method;

use crate::error::CliError;

pub const DIGITS_ENV: &str = "DJM_DIGITS";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProblemKind {
    Example1,
    General,
}

impl FromStr for ProblemKind {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "example1" => Ok(ProblemKind::Example1),
            "general" => Ok(ProblemKind::General),
            other => Err(CliError::Config(format!("unknown problem {other:?}"))),
        }
    }
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProblemKind::Example1 => "example1",
            ProblemKind::General => "general",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Markdown,
}

impl FromStr for Format {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "csv" => Ok(Format::Csv),
            "markdown" | "md" => Ok(Format::Markdown),
            other => Err(CliError::Config(format!("unknown format {other:?}"))),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Csv => "csv",
            Format::Markdown => "markdown",
        })
    }
}

/// Which solution the error columns are measured against.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReferenceChoice {
    /// Readings that pass the initial-data and residual checks, else the integrator.
    Calibrated,
    /// The closed form read as `sqrt(1 + c t)`, unchecked.
    Literal,
    /// The closed form read as `sqrt(1 + c) t`, unchecked.
    LinearTime,
}

impl FromStr for ReferenceChoice {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "calibrated" => Ok(ReferenceChoice::Calibrated),
            "literal" => Ok(ReferenceChoice::Literal),
            "linear-time" => Ok(ReferenceChoice::LinearTime),
            other => Err(CliError::Config(format!("unknown reference {other:?}"))),
        }
    }
}

impl fmt::Display for ReferenceChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReferenceChoice::Calibrated => "calibrated",
            ReferenceChoice::Literal => "literal",
            ReferenceChoice::LinearTime => "linear-time",
        })
    }
}

/// What `residual` substitutes into the PDE.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subject {
    Series,
    Reference,
    Zero,
}

impl FromStr for Subject {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "series" => Ok(Subject::Series),
            "reference" => Ok(Subject::Reference),
            "zero" => Ok(Subject::Zero),
            other => Err(CliError::Config(format!(
                "unknown residual subject {other:?}"
            ))),
        }
    }
}

impl fmt::Display for Subject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Subject::Series => "series",
            Subject::Reference => "reference",
            Subject::Zero => "zero",
        })
    }
}

/// Fully resolved settings. Numeric parameters stay as the decimal text the
/// user wrote and are parsed at working precision when the problem is built.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub problem: ProblemKind,
    pub c: String,
    pub p: String,
    pub q: String,
    pub r: String,
    pub alpha: String,
    pub beta: String,
    pub sign: Direction,
    pub amplitude: AmplitudeForm,
    pub velocity: Example1Velocity,
    pub method: Method,
    pub terms: usize,
    pub digits: u32,
    pub x: Option<String>,
    pub t: Option<String>,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub reference: ReferenceChoice,
    pub subject: Subject,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            problem: ProblemKind::Example1,
            c: "1".into(),
            p: "-1".into(),
            q: "3".into(),
            r: "1".into(),
            alpha: "0.6".into(),
            beta: "0".into(),
            sign: Direction::Plus,
            amplitude: AmplitudeForm::Exact,
            velocity: Example1Velocity::SeriesDisplay,
            method: Method::Mdjm,
            terms: 4,
            digits: DEFAULT_DIGITS,
            x: None,
            t: None,
            format: Format::Csv,
            out: None,
            reference: ReferenceChoice::Calibrated,
            subject: Subject::Series,
        }
    }
}

/// Keys accepted in config files, in echo order.
pub const KEYS: [&str; 19] = [
    "problem",
    "c",
    "p",
    "q",
    "r",
    "alpha",
    "beta",
    "sign",
    "amplitude",
    "velocity",
    "method",
    "terms",
    "digits",
    "x",
    "t",
    "format",
    "out",
    "reference",
    "subject",
];

fn parse_enum<T: FromStr>(key: &str, value: &str) -> Result<T, CliError>
where
    T::Err: fmt::Display,
{
    value
        .parse()
        .map_err(|e: T::Err| CliError::Config(format!("{key}: {e}")))
}

fn check_decimal(key: &str, value: &str) -> Result<String, CliError> {
    let v = value.trim();
    let ok = !v.is_empty()
        && v.chars()
            .all(|ch| ch.is_ascii_digit() || matches!(ch, '+' | '-' | '.' | 'e' | 'E'))
        && v.chars().any(|ch| ch.is_ascii_digit());
    if ok {
        Ok(v.to_string())
    } else {
        Err(CliError::Config(format!(
            "{key}: {value:?} is not a decimal number"
        )))
    }
}

impl RunConfig {
    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let value = value.trim();
        match key {
            "problem" => self.problem = value.parse()?,
            "c" => self.c = check_decimal(key, value)?,
            "p" => self.p = check_decimal(key, value)?,
            "q" => self.q = check_decimal(key, value)?,
            "r" => self.r = check_decimal(key, value)?,
            "alpha" => self.alpha = check_decimal(key, value)?,
            "beta" => self.beta = check_decimal(key, value)?,
            "sign" => self.sign = parse_enum(key, value)?,
            "amplitude" => self.amplitude = parse_enum(key, value)?,
            "velocity" => self.velocity = parse_enum(key, value)?,
            "method" => self.method = parse_enum(key, value)?,
            "terms" => {
                self.terms = value
                    .parse()
                    .ok()
                    .filter(|&k: &usize| k >= 1)
                    .ok_or_else(|| {
                        CliError::Config(format!("terms: {value:?} is not a positive integer"))
                    })?
            }
            "digits" => self.digits = parse_digits(value)?,
            "x" => self.x = non_empty(value),
            "t" => self.t = non_empty(value),
            "format" => self.format = value.parse()?,
            "out" => {
                self.out = if value.is_empty() {
                    None
                } else {
                    Some(PathBuf::from(value))
                }
            }
            "reference" => self.reference = value.parse()?,
            "subject" => self.subject = value.parse()?,
            other => return Err(CliError::Config(format!("unknown key {other:?}"))),
        }
        Ok(())
    }

    /// Applies every setting in flat `key = value` text; `#` starts a comment line.
    pub fn apply_text(&mut self, text: &str) -> Result<(), CliError> {
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {}: expected key = value", n + 1)))?;
            self.set(key.trim(), value)?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<(), CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        self.apply_text(&text)
    }

    /// `(key, value)` pairs in [`KEYS`] order, with grids resolved to what was used.
    pub fn echo(&self, x: &str, t: &str) -> Vec<(&'static str, String)> {
        KEYS.iter()
            .map(|&k| {
                let v = match k {
                    "problem" => self.problem.to_string(),
                    "c" => self.c.clone(),
                    "p" => self.p.clone(),
                    "q" => self.q.clone(),
                    "r" => self.r.clone(),
                    "alpha" => self.alpha.clone(),
                    "beta" => self.beta.clone(),
                    "sign" => self.sign.to_string(),
                    "amplitude" => self.amplitude.to_string(),
                    "velocity" => self.velocity.to_string(),
                    "method" => self.method.to_string(),
                    "terms" => self.terms.to_string(),
                    "digits" => self.digits.to_string(),
                    "x" => x.to_string(),
                    "t" => t.to_string(),
                    "format" => self.format.to_string(),
                    "out" => self
                        .out
                        .as_ref()
                        .map(|p| p.display().to_string())
                        .unwrap_or_default(),
                    "reference" => self.reference.to_string(),
                    _ => self.subject.to_string(),
                };
                (k, v)
            })
            .collect()
    }
}

fn non_empty(value: &str) -> Option<String> {
    (!value.is_empty()).then(|| value.to_string())
}

pub fn parse_digits(value: &str) -> Result<u32, CliError> {
    value
        .trim()
        .parse()
        .ok()
        .filter(|&d: &u32| d >= MIN_DIGITS)
        .ok_or_else(|| {
            CliError::Config(format!(
                "digits: {value:?} must be an integer ≥ {MIN_DIGITS}"
            ))
        })
}

/// Recovers the configuration echoed as `# key = value` lines at the top of an output file.
pub fn config_from_header(text: &str) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::default();
    for line in text.lines() {
        let Some(rest) = line.strip_prefix("# ") else {
            continue;
        };
        if let Some((key, value)) = rest.split_once(" = ") {
            if KEYS.contains(&key.trim()) {
                cfg.set(key.trim(), value)?;
            }
        }
    }
    Ok(cfg)
}
