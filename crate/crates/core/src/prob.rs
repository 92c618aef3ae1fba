//! Edge probabilities carried as exact decimals.
//!
//! The Phase-I thresholds compare integer counts against expressions such as
//! `(a+b)^2 (|S|-2) / 4`. Keeping `a` and `b` as `numerator / 10^scale` lets
//! those comparisons run in integer arithmetic with no rounding slack.

use std::fmt;
use std::str::FromStr;

use crate::error::{invalid, GsbmError, Result};

/// Maximum number of fractional digits accepted.
pub const MAX_SCALE: u32 = 12;

#[derive(Debug, Clone, Copy)]
pub struct Prob {
    numer: u64,
    scale: u32,
    value: f64,
}

impl Prob {
    pub const ZERO: Prob = Prob { numer: 0, scale: 0, value: 0.0 };
    pub const ONE: Prob = Prob { numer: 1, scale: 0, value: 1.0 };

    /// Parses the shortest round-trip decimal form of `x`.
    pub fn from_f64(x: f64) -> Result<Self> {
        if !x.is_finite() {
            return invalid(format!("probability must be finite, got {x}"));
        }
        format!("{x}").parse()
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    /// Numerator after rescaling to `10^scale`; `scale` must be >= `self.scale`.
    fn numer_at(&self, scale: u32) -> u128 {
        self.numer as u128 * 10u128.pow(scale - self.scale)
    }

    /// `(a + b)` as `(numerator, denominator)` over a shared power of ten.
    pub fn sum_ratio(a: Prob, b: Prob) -> (u128, u128) {
        let scale = a.scale.max(b.scale);
        (a.numer_at(scale) + b.numer_at(scale), 10u128.pow(scale))
    }
}

impl FromStr for Prob {
    type Err = GsbmError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (int_part, frac_part) = match s.split_once('.') {
            Some((i, f)) => (i, f),
            None => (s, ""),
        };
        let int_part = if int_part.is_empty() { "0" } else { int_part };
        if !int_part.bytes().all(|c| c.is_ascii_digit()) || !frac_part.bytes().all(|c| c.is_ascii_digit()) {
            return invalid(format!("probability must be a plain decimal, got {s:?}"));
        }
        let frac_part = frac_part.trim_end_matches('0');
        let scale = frac_part.len() as u32;
        if scale > MAX_SCALE {
            return invalid(format!("probability {s:?} has more than {MAX_SCALE} fractional digits"));
        }
        let int_val: u64 = int_part.parse().map_err(|_| GsbmError::InvalidInput(format!("bad probability {s:?}")))?;
        let frac_val: u64 = if frac_part.is_empty() { 0 } else { frac_part.parse().expect("digits checked above") };
        let denom = 10u64.pow(scale);
        let numer = int_val
            .checked_mul(denom)
            .and_then(|v| v.checked_add(frac_val))
            .ok_or_else(|| GsbmError::InvalidInput(format!("probability {s:?} overflows")))?;
        if numer > denom {
            return invalid(format!("probability must lie in [0, 1], got {s}"));
        }
        let value: f64 = s.parse().unwrap_or(numer as f64 / denom as f64);
        Ok(Prob { numer, scale, value })
    }
}

impl fmt::Display for Prob {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.scale == 0 {
            return write!(f, "{}", self.numer);
        }
        let denom = 10u64.pow(self.scale);
        write!(f, "{}.{:0width$}", self.numer / denom, self.numer % denom, width = self.scale as usize)
    }
}

impl PartialEq for Prob {
    fn eq(&self, other: &Self) -> bool {
        let scale = self.scale.max(other.scale);
        self.numer_at(scale) == other.numer_at(scale)
    }
}

impl Eq for Prob {}

impl PartialOrd for Prob {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Prob {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        let scale = self.scale.max(other.scale);
        self.numer_at(scale).cmp(&other.numer_at(scale))
    }
}
