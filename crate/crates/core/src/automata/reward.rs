use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::AutomatonError;

const SCALE: i64 = 1_000_000_000;
const FRAC_DIGITS: usize = 9;

/// A reward value held as a fixed-point decimal with nine fractional digits.
///
/// Equality and hashing are exact, which is what the learner needs when
/// rewards become part of an automaton alphabet.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct RewardValue(i64);

impl RewardValue {
    pub const ZERO: RewardValue = RewardValue(0);
    pub const ONE: RewardValue = RewardValue(SCALE);

    /// Rounds to the nearest representable value.
    pub fn from_f64(x: f64) -> Self {
        RewardValue((x * SCALE as f64).round() as i64)
    }

    pub fn from_int(n: i64) -> Self {
        RewardValue(n * SCALE)
    }

    pub fn to_f64(self) -> f64 {
        self.0 as f64 / SCALE as f64
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for RewardValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        let abs = self.0.unsigned_abs();
        let int = abs / SCALE as u64;
        let frac = abs % SCALE as u64;
        if frac == 0 {
            write!(f, "{sign}{int}")
        } else {
            let digits = format!("{frac:0width$}", width = FRAC_DIGITS);
            write!(f, "{sign}{int}.{}", digits.trim_end_matches('0'))
        }
    }
}

impl fmt::Debug for RewardValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for RewardValue {
    type Err = AutomatonError;

    /// Parses a decimal literal exactly; more than nine fractional digits is an error.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || AutomatonError::Parse(format!("bad reward literal `{s}`"));
        let t = s.trim();
        let (neg, body) = match t.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, t),
        };
        let (int_part, frac_part) = match body.split_once('.') {
            Some((i, f)) => (i, f),
            None => (body, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(bad());
        }
        if !int_part.chars().all(|c| c.is_ascii_digit())
            || !frac_part.chars().all(|c| c.is_ascii_digit())
            || frac_part.len() > FRAC_DIGITS
        {
            return Err(bad());
        }
        let int: i64 = if int_part.is_empty() { 0 } else { int_part.parse().map_err(|_| bad())? };
        let frac: i64 = if frac_part.is_empty() {
            0
        } else {
            let padded = format!("{frac_part:0<width$}", width = FRAC_DIGITS);
            padded.parse().map_err(|_| bad())?
        };
        let v = int.checked_mul(SCALE).and_then(|v| v.checked_add(frac)).ok_or_else(bad)?;
        Ok(RewardValue(if neg { -v } else { v }))
    }
}

impl TryFrom<String> for RewardValue {
    type Error = AutomatonError;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<RewardValue> for String {
    fn from(r: RewardValue) -> String {
        r.to_string()
    }
}
