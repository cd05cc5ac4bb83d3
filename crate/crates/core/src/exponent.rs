//! Extended positive exponents and the (p, q, r, beta) tuple.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// An exponent in (0, inf].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Infinite,
}

impl Exponent {
    pub const INF: Exponent = Exponent::Infinite;

    pub fn new(v: f64) -> Result<Self> {
        let e = Exponent::from(v);
        e.validate()?;
        Ok(e)
    }

    pub fn validate(self) -> Result<()> {
        match self {
            Exponent::Finite(v) if !(v > 0.0 && v.is_finite()) => {
                Err(Error::Parameter(format!("exponent must lie in (0, inf], got {v}")))
            }
            _ => Ok(()),
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Exponent::Infinite)
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            Exponent::Finite(v) => Some(v),
            Exponent::Infinite => None,
        }
    }

    /// 1/p, with 1/inf = 0.
    pub fn recip(self) -> f64 {
        match self {
            Exponent::Finite(v) => 1.0 / v,
            Exponent::Infinite => 0.0,
        }
    }

    /// Hölder conjugate: p/(p-1) on (1, inf), inf on (0, 1], 1 at inf.
    pub fn conjugate(self) -> Exponent {
        match self {
            Exponent::Infinite => Exponent::Finite(1.0),
            Exponent::Finite(v) if v <= 1.0 => Exponent::Infinite,
            Exponent::Finite(v) => Exponent::Finite(v / (v - 1.0)),
        }
    }

    /// p / m for m > 0 (inf stays inf).
    pub fn div(self, m: f64) -> Exponent {
        match self {
            Exponent::Finite(v) => Exponent::Finite(v / m),
            Exponent::Infinite => Exponent::Infinite,
        }
    }

    /// Value as `f64`, with inf mapped to `f64::INFINITY`.
    pub fn as_f64(self) -> f64 {
        self.finite().unwrap_or(f64::INFINITY)
    }

    pub fn min(self, other: Exponent) -> Exponent {
        if self.as_f64() <= other.as_f64() {
            self
        } else {
            other
        }
    }

    pub fn max(self, other: Exponent) -> Exponent {
        if self.as_f64() >= other.as_f64() {
            self
        } else {
            other
        }
    }
}

impl From<f64> for Exponent {
    fn from(v: f64) -> Self {
        if v == f64::INFINITY {
            Exponent::Infinite
        } else {
            Exponent::Finite(v)
        }
    }
}

impl FromStr for Exponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        match t.to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "∞" => Ok(Exponent::Infinite),
            _ => {
                let v = parse_number(t)
                    .ok_or_else(|| Error::Parameter(format!("cannot parse exponent '{s}'")))?;
                Exponent::new(v)
            }
        }
    }
}

/// Parses a decimal number or a fraction such as `1/2`.
pub(crate) fn parse_number(s: &str) -> Option<f64> {
    if let Some((a, b)) = s.split_once('/') {
        let a: f64 = a.trim().parse().ok()?;
        let b: f64 = b.trim().parse().ok()?;
        Some(a / b)
    } else {
        s.parse().ok()
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(v) => write!(f, "{v}"),
            Exponent::Infinite => write!(f, "inf"),
        }
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Exponent::Finite(v) => s.serialize_f64(*v),
            Exponent::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Str(String),
        }
        let e = match Repr::deserialize(d)? {
            Repr::Num(v) => Exponent::from(v),
            Repr::Str(s) => s.parse().map_err(serde::de::Error::custom)?,
        };
        e.validate().map_err(serde::de::Error::custom)?;
        Ok(e)
    }
}

/// Norm parameters (p, q, r, beta).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentTuple {
    pub p: Exponent,
    pub q: Exponent,
    pub r: Exponent,
    pub beta: f64,
}

impl ExponentTuple {
    pub fn new(
        p: impl Into<Exponent>,
        q: impl Into<Exponent>,
        r: impl Into<Exponent>,
        beta: f64,
    ) -> Result<Self> {
        let e = ExponentTuple { p: p.into(), q: q.into(), r: r.into(), beta };
        e.validate()?;
        Ok(e)
    }

    pub fn validate(&self) -> Result<()> {
        self.p.validate()?;
        self.q.validate()?;
        self.r.validate()?;
        if !self.beta.is_finite() {
            return Err(Error::Parameter(format!("beta must be finite, got {}", self.beta)));
        }
        Ok(())
    }

    /// min{1, p, q, r}, the exponent of the quasi-triangle inequality.
    pub fn mu(&self) -> f64 {
        1.0_f64.min(self.p.as_f64()).min(self.q.as_f64()).min(self.r.as_f64())
    }

    pub fn with_p(mut self, p: impl Into<Exponent>) -> Self {
        self.p = p.into();
        self
    }

    pub fn with_q(mut self, q: impl Into<Exponent>) -> Self {
        self.q = q.into();
        self
    }

    pub fn with_r(mut self, r: impl Into<Exponent>) -> Self {
        self.r = r.into();
        self
    }

    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta = beta;
        self
    }
}

impl fmt::Display for ExponentTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(p={}, q={}, r={}, beta={})", self.p, self.q, self.r, self.beta)
    }
}
