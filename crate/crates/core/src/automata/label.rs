use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::AutomatonError;

/// A set of atomic propositions emitted by one environment transition.
///
/// Propositions are the lowercase letters `a..=z`; the set is stored as a
/// bitmask so labels are `Copy` and order deterministically.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Label(u32);

impl Label {
    pub const EMPTY: Label = Label(0);

    pub fn single(prop: char) -> Result<Self, AutomatonError> {
        Ok(Label(1 << prop_bit(prop)?))
    }

    pub fn from_props<I: IntoIterator<Item = char>>(props: I) -> Result<Self, AutomatonError> {
        let mut bits = 0u32;
        for p in props {
            bits |= 1 << prop_bit(p)?;
        }
        Ok(Label(bits))
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, prop: char) -> bool {
        prop_bit(prop).map(|b| self.0 & (1 << b) != 0).unwrap_or(false)
    }

    pub fn props(self) -> impl Iterator<Item = char> {
        (0..26u32)
            .filter(move |b| self.0 & (1 << b) != 0)
            .map(|b| (b'a' + b as u8) as char)
    }

    pub fn bits(self) -> u32 {
        self.0
    }
}

fn prop_bit(prop: char) -> Result<u32, AutomatonError> {
    if prop.is_ascii_lowercase() {
        Ok(prop as u32 - 'a' as u32)
    } else {
        Err(AutomatonError::UnknownProposition(prop))
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, p) in self.props().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{p}")?;
        }
        f.write_str("}")
    }
}

impl fmt::Debug for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Label {
    type Err = AutomatonError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let inner = s
            .trim()
            .strip_prefix('{')
            .and_then(|r| r.strip_suffix('}'))
            .ok_or_else(|| AutomatonError::Parse(format!("label `{s}` is not of the form {{a,b}}")))?;
        if inner.trim().is_empty() {
            return Ok(Label::EMPTY);
        }
        let mut props = Vec::new();
        for tok in inner.split(',') {
            let tok = tok.trim();
            let mut chars = tok.chars();
            match (chars.next(), chars.next()) {
                (Some(c), None) => props.push(c),
                _ => return Err(AutomatonError::Parse(format!("bad proposition `{tok}` in `{s}`"))),
            }
        }
        Label::from_props(props)
    }
}

impl TryFrom<String> for Label {
    type Error = AutomatonError;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<Label> for String {
    fn from(l: Label) -> String {
        l.to_string()
    }
}
