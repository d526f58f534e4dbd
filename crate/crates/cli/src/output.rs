//! Rendering of command results as CSV or Markdown.

use djm_core::Real;

use crate::config::Format;
use crate::error::CliError;

/// A command result: echoed settings, free-form info lines, then a table.
#[derive(Clone, Debug, Default)]
pub struct Report {
    pub echo: Vec<(&'static str, String)>,
    pub info: Vec<String>,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Report {
    pub fn new(echo: Vec<(&'static str, String)>, columns: Vec<&'static str>) -> Self {
        Self {
            echo,
            columns,
            ..Self::default()
        }
    }

    pub fn info(&mut self, line: impl Into<String>) {
        self.info.push(line.into());
    }

    pub fn render(&self, format: Format) -> Result<String, CliError> {
        match format {
            Format::Csv => self.csv(),
            Format::Markdown => Ok(self.markdown()),
        }
    }

    fn preamble(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.echo {
            out.push_str(&format!("# {k} = {v}\n"));
        }
        for line in &self.info {
            out.push_str(&format!("#: {line}\n"));
        }
        out
    }

    fn csv(&self) -> Result<String, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        let body = w.into_inner().map_err(|e| CliError::Io(e.into_error()))?;
        let body = String::from_utf8(body).expect("csv output is utf-8");
        Ok(self.preamble() + &body)
    }

    fn markdown(&self) -> String {
        let mut out = format!("```text\n{}```\n\n", self.preamble());
        out.push_str(&format!("| {} |\n", self.columns.join(" | ")));
        out.push_str(&format!("|{}\n", "---|".repeat(self.columns.len())));
        for row in &self.rows {
            out.push_str(&format!("| {} |\n", row.join(" | ")));
        }
        out
    }
}

/// Scientific notation with `digits` significant digits.
pub fn sci(v: &Real, digits: u32) -> String {
    format!("{:.*e}", digits as usize, v)
}

/// Short scientific notation for f64 summaries.
pub fn sci_f64(v: f64) -> String {
    format!("{v:.6e}")
}
