//! Time values.
//!
//! Every duration in the knowledge base is an integer number of
//! milliseconds. Schedule allocations are exact rationals of milliseconds so
//! that they sum to the budget with no rounding.

use num_rational::Ratio;

use crate::error::{Error, Result};

/// Exact millisecond quantity.
pub type ExactMs = Ratio<u64>;

/// Parses a non-negative decimal number of seconds into milliseconds,
/// rounding to the nearest millisecond.
pub fn parse_seconds(text: &str) -> Result<u64> {
    let value: f64 = text.trim().parse().map_err(|_| Error::Parse(format!("invalid seconds value `{text}`")))?;
    seconds_to_ms(value)
}

pub fn seconds_to_ms(value: f64) -> Result<u64> {
    if !value.is_finite() || value < 0.0 {
        return Err(Error::Parse(format!("invalid seconds value `{value}`")));
    }
    Ok((value * 1000.0).round() as u64)
}

/// Renders milliseconds as decimal seconds with exactly three fractional digits.
pub fn format_ms(ms: u64) -> String {
    format!("{}.{:03}", ms / 1000, ms % 1000)
}

pub fn ms_to_seconds(ms: u64) -> f64 {
    ms as f64 / 1000.0
}

pub fn exact_to_seconds(ms: ExactMs) -> f64 {
    *ms.numer() as f64 / *ms.denom() as f64 / 1000.0
}

/// `"600000"` for integral values, `"1800000/7"` otherwise.
pub fn format_exact(ms: ExactMs) -> String {
    if ms.is_integer() {
        ms.numer().to_string()
    } else {
        format!("{}/{}", ms.numer(), ms.denom())
    }
}

pub fn parse_exact(text: &str) -> Result<ExactMs> {
    let bad = || Error::Parse(format!("invalid exact millisecond value `{text}`"));
    match text.split_once('/') {
        None => text.trim().parse::<u64>().map(Ratio::from_integer).map_err(|_| bad()),
        Some((n, d)) => {
            let n: u64 = n.trim().parse().map_err(|_| bad())?;
            let d: u64 = d.trim().parse().map_err(|_| bad())?;
            if d == 0 {
                return Err(bad());
            }
            Ok(Ratio::new(n, d))
        }
    }
}
