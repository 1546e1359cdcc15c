use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

/// Rate of the common randomness shared by encoder and decoder, in bits per
/// symbol. Serialized as a JSON number, or the string `"inf"` for an
/// unlimited supply.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CommonRate {
    Finite(f64),
    Infinite,
}

impl CommonRate {
    pub const ZERO: CommonRate = CommonRate::Finite(0.0);

    pub fn new(bits: f64) -> Result<Self, Error> {
        if bits.is_nan() || bits < 0.0 {
            return Err(Error::Domain(format!("common rate must be nonnegative, got {bits}")));
        }
        if bits.is_infinite() {
            return Ok(CommonRate::Infinite);
        }
        Ok(CommonRate::Finite(bits))
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, CommonRate::Infinite)
    }

    /// Rate as an `f64`, `+inf` for the unlimited case.
    pub fn bits(self) -> f64 {
        match self {
            CommonRate::Finite(r) => r,
            CommonRate::Infinite => f64::INFINITY,
        }
    }

    /// `2^(-2 R_c)`, exactly zero in the unlimited case.
    pub fn shrink_factor(self) -> f64 {
        match self {
            CommonRate::Finite(r) => (-2.0 * r).exp2(),
            CommonRate::Infinite => 0.0,
        }
    }
}

impl fmt::Display for CommonRate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CommonRate::Finite(r) => write!(f, "{r}"),
            CommonRate::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for CommonRate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "+inf" => Ok(CommonRate::Infinite),
            other => other
                .parse::<f64>()
                .map_err(|_| Error::Domain(format!("cannot parse common rate {s:?}")))
                .and_then(CommonRate::new),
        }
    }
}

impl Serialize for CommonRate {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            CommonRate::Finite(r) => serializer.serialize_f64(*r),
            CommonRate::Infinite => serializer.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for CommonRate {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Num(r) => CommonRate::new(r),
            Raw::Text(s) => s.parse(),
        }
        .map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sentinel_and_numbers() {
        assert_eq!("inf".parse::<CommonRate>().unwrap(), CommonRate::Infinite);
        assert_eq!("0.5".parse::<CommonRate>().unwrap(), CommonRate::Finite(0.5));
        assert!("-1".parse::<CommonRate>().is_err());
        let v: Vec<CommonRate> = serde_json::from_str(r#"[0, "inf", 1.5]"#).unwrap();
        assert_eq!(v, vec![CommonRate::ZERO, CommonRate::Infinite, CommonRate::Finite(1.5)]);
        assert_eq!(serde_json::to_string(&v).unwrap(), r#"[0.0,"inf",1.5]"#);
    }
}
