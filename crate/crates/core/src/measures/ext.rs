use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A real number that may also be written as the string `"inf"` or `"-inf"`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Ext(pub f64);

impl Ext {
    pub const INF: Ext = Ext(f64::INFINITY);
}

impl From<f64> for Ext {
    fn from(v: f64) -> Self {
        Ext(v)
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Raw {
    Num(f64),
    Int(i64),
    Str(String),
}

pub(crate) fn parse_ext(s: &str) -> Option<f64> {
    match s.trim().to_ascii_lowercase().as_str() {
        "inf" | "+inf" | "infinity" | "+infinity" => Some(f64::INFINITY),
        "-inf" | "-infinity" => Some(f64::NEG_INFINITY),
        other => other.parse().ok(),
    }
}

impl<'de> Deserialize<'de> for Ext {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(Ext(v)),
            Raw::Int(v) => Ok(Ext(v as f64)),
            Raw::Str(s) => parse_ext(&s)
                .map(Ext)
                .ok_or_else(|| serde::de::Error::custom(format!("expected a number or \"inf\", got {s:?}"))),
        }
    }
}

impl Serialize for Ext {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        serde_f64::serialize(&self.0, s)
    }
}

/// Serialize non-finite floats as strings so JSON output stays valid.
pub mod serde_f64 {
    use super::*;

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ext::deserialize(d).map(|e| e.0)
    }
}
