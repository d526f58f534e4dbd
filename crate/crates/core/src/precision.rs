//! Working precision and the arbitrary-precision real type.

use rug::Float;

use crate::error::{Error, Result};

/// Arbitrary-precision binary float used for every coefficient and evaluation.
pub type Real = Float;

pub const DEFAULT_DIGITS: u32 = 100;
pub const MIN_DIGITS: u32 = 30;

/// Guard bits added on top of the decimal-digit request.
const GUARD_BITS: u32 = 16;

/// Decimal working precision plus the coefficient pruning threshold used
/// during canonicalization.
#[derive(Clone, Debug)]
pub struct PrecisionConfig {
    digits: u32,
    prune_threshold: Real,
}

impl PrecisionConfig {
    /// Precision with the default pruning threshold `10^(5 - digits)`.
    pub fn new(digits: u32) -> Result<Self> {
        if digits < MIN_DIGITS {
            return Err(Error::Precision(format!(
                "at least {MIN_DIGITS} digits required, got {digits}"
            )));
        }
        let prune_threshold = pow10(bits_for(digits), 5 - digits as i32);
        Ok(Self {
            digits,
            prune_threshold,
        })
    }

    pub fn with_prune_threshold(digits: u32, prune_threshold: Real) -> Result<Self> {
        let mut cfg = Self::new(digits)?;
        let ceiling = pow10(cfg.bits(), -((digits / 2) as i32));
        if prune_threshold.is_sign_negative() || prune_threshold >= ceiling {
            return Err(Error::Precision(format!(
                "prune threshold must lie in [0, 1e-{})",
                digits / 2
            )));
        }
        cfg.prune_threshold = Real::with_val(cfg.bits(), prune_threshold);
        Ok(cfg)
    }

    pub fn digits(&self) -> u32 {
        self.digits
    }

    /// Binary precision matching `digits` decimal digits plus guard bits.
    pub fn bits(&self) -> u32 {
        bits_for(self.digits)
    }

    pub fn prune_threshold(&self) -> &Real {
        &self.prune_threshold
    }

    pub fn real(&self, value: f64) -> Real {
        Real::with_val(self.bits(), value)
    }

    pub fn int(&self, value: i64) -> Real {
        Real::with_val(self.bits(), value)
    }

    /// Parses a decimal literal directly at working precision (no `f64` round trip).
    pub fn parse(&self, text: &str) -> Result<Real> {
        parse_real(text.trim(), self.bits())
    }

    /// `10^exp` at working precision.
    pub fn pow10(&self, exp: i32) -> Real {
        pow10(self.bits(), exp)
    }

    /// Comparison tolerance `10^(10 - digits)` used by the property suites.
    pub fn loose_epsilon(&self) -> Real {
        self.pow10(10 - self.digits as i32)
    }
}

impl Default for PrecisionConfig {
    fn default() -> Self {
        Self::new(DEFAULT_DIGITS).expect("default precision is valid")
    }
}

pub(crate) fn bits_for(digits: u32) -> u32 {
    (f64::from(digits) * std::f64::consts::LOG2_10).ceil() as u32 + GUARD_BITS
}

pub(crate) fn pow10(bits: u32, exp: i32) -> Real {
    let p = Real::with_val(bits, Real::i_pow_u(10, exp.unsigned_abs()));
    if exp < 0 {
        p.recip()
    } else {
        p
    }
}

pub fn parse_real(text: &str, bits: u32) -> Result<Real> {
    let parsed = Real::parse(text).map_err(|e| Error::Parse(format!("{text:?}: {e}")))?;
    Ok(Real::with_val(bits, parsed))
}
