//! Grid specifications: `a,b,c` lists or inclusive `start:stop:step` ranges.

use djm_core::{PrecisionConfig, Real};

use crate::error::CliError;

/// One grid value at working precision plus its short label for output columns.
#[derive(Clone, Debug)]
pub struct GridPoint {
    pub value: Real,
    pub label: String,
}

const MAX_POINTS: usize = 100_000;

fn label(v: &Real) -> String {
    let f = v.to_f64();
    if f == 0.0 {
        "0".to_string()
    } else {
        format!("{f}")
    }
}

pub fn parse_grid(spec: &str, cfg: &PrecisionConfig) -> Result<Vec<GridPoint>, CliError> {
    let spec = spec.trim();
    let bad = |msg: &str| CliError::Config(format!("grid {spec:?}: {msg}"));
    let number = |s: &str| cfg.parse(s).map_err(|e| bad(&e.to_string()));
    let values: Vec<Real> = if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        let [start, stop, step] = parts.as_slice() else {
            return Err(bad("expected start:stop:step"));
        };
        let (start, stop, step) = (number(start)?, number(stop)?, number(step)?);
        if step <= 0 {
            return Err(bad("step must be positive"));
        }
        if stop < start {
            return Err(bad("stop lies before start"));
        }
        // count = floor((stop - start) / step + slack) + 1, tolerant of decimal steps
        let span = Real::with_val(cfg.bits(), &stop - &start) / &step;
        let count = (span.to_f64() + 1e-9).floor() as usize + 1;
        if count > MAX_POINTS {
            return Err(bad("too many points"));
        }
        (0..count)
            .map(|i| Real::with_val(cfg.bits(), &step * i as u64) + &start)
            .collect()
    } else {
        spec.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(number)
            .collect::<Result<_, _>>()?
    };
    if values.is_empty() {
        return Err(bad("grid is empty"));
    }
    Ok(values
        .into_iter()
        .map(|value| GridPoint {
            label: label(&value),
            value,
        })
        .collect())
}
