use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::{Error, Result};

/// Gate labels of the standard and extended gate sets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GateLabel {
    Gi,
    Gx,
    Gy,
    MinusGx,
    MinusGy,
}

impl GateLabel {
    pub const STANDARD: [GateLabel; 3] = [GateLabel::Gi, GateLabel::Gx, GateLabel::Gy];
    pub const EXTENDED: [GateLabel; 5] = [
        GateLabel::Gi,
        GateLabel::Gx,
        GateLabel::Gy,
        GateLabel::MinusGx,
        GateLabel::MinusGy,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            GateLabel::Gi => "Gi",
            GateLabel::Gx => "Gx",
            GateLabel::Gy => "Gy",
            GateLabel::MinusGx => "-Gx",
            GateLabel::MinusGy => "-Gy",
        }
    }

    /// `Gx ↔ −Gx`, `Gy ↔ −Gy`, `Gi` fixed.
    pub fn sign_flipped(self) -> Self {
        match self {
            GateLabel::Gi => GateLabel::Gi,
            GateLabel::Gx => GateLabel::MinusGx,
            GateLabel::Gy => GateLabel::MinusGy,
            GateLabel::MinusGx => GateLabel::Gx,
            GateLabel::MinusGy => GateLabel::Gy,
        }
    }

    pub fn is_negative(self) -> bool {
        matches!(self, GateLabel::MinusGx | GateLabel::MinusGy)
    }
}

impl fmt::Display for GateLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for GateLabel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        GateLabel::EXTENDED
            .into_iter()
            .find(|l| l.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown gate label {s:?}")))
    }
}

impl Serialize for GateLabel {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for GateLabel {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A time-ordered gate string; the first label acts first.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GateString(pub Vec<GateLabel>);

impl GateString {
    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn labels(&self) -> &[GateLabel] {
        &self.0
    }

    pub fn concat(parts: &[&GateString]) -> Self {
        Self(parts.iter().flat_map(|p| p.0.iter().copied()).collect())
    }

    pub fn repeat(&self, n: usize) -> Self {
        Self(self.0.repeat(n))
    }
}

impl fmt::Display for GateString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("{}");
        }
        for l in &self.0 {
            f.write_str(l.as_str())?;
        }
        Ok(())
    }
}

impl FromStr for GateString {
    type Err = Error;
    /// Parses concatenated labels such as `GxGy-GxGi`; `{}` is empty.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "{}" || s.is_empty() {
            return Ok(Self::empty());
        }
        let mut out = Vec::new();
        let mut rest = s;
        while !rest.is_empty() {
            let take = if rest.starts_with('-') { 3 } else { 2 };
            let head = rest
                .get(..take)
                .ok_or_else(|| Error::InvalidArgument(format!("truncated gate string {s:?}")))?;
            out.push(head.parse()?);
            rest = &rest[take..];
        }
        Ok(Self(out))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn string_round_trip() {
        for s in ["{}", "Gx", "GxGy-GxGi-Gy"] {
            let g: GateString = s.parse().unwrap();
            assert_eq!(g.to_string(), s);
        }
        assert!("Gz".parse::<GateString>().is_err());
        assert!("G".parse::<GateString>().is_err());
        let json = serde_json::to_string(&"Gx-Gy".parse::<GateString>().unwrap()).unwrap();
        assert_eq!(json, r#"["Gx","-Gy"]"#);
    }
}
