use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A heuristic estimate: a non-negative finite number or `+∞`.
///
/// NaN and negative values cannot be constructed, so the ordering is total
/// and comparisons are exact.
#[derive(Clone, Copy)]
pub struct HeuristicValue(f64);

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("invalid heuristic value {0}")]
pub struct InvalidValue(pub f64);

impl HeuristicValue {
    pub const ZERO: HeuristicValue = HeuristicValue(0.0);
    pub const INFINITY: HeuristicValue = HeuristicValue(f64::INFINITY);

    pub fn new(v: f64) -> Result<Self, InvalidValue> {
        if v.is_nan() || v < 0.0 {
            return Err(InvalidValue(v));
        }
        // normalizes -0.0
        Ok(HeuristicValue(v + 0.0))
    }

    pub fn finite(n: u64) -> Self {
        HeuristicValue(n as f64)
    }

    pub fn is_infinite(self) -> bool {
        self.0.is_infinite()
    }

    pub fn is_finite(self) -> bool {
        self.0.is_finite()
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// The value as an integer, if it is a finite whole number.
    pub fn as_integer(self) -> Option<u64> {
        (self.0.is_finite() && self.0.fract() == 0.0 && self.0 <= u64::MAX as f64).then_some(self.0 as u64)
    }
}

impl PartialEq for HeuristicValue {
    fn eq(&self, other: &Self) -> bool {
        self.0 == other.0
    }
}

impl Eq for HeuristicValue {}

impl PartialOrd for HeuristicValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HeuristicValue {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.partial_cmp(&other.0).expect("NaN is never stored")
    }
}

impl Hash for HeuristicValue {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.0.to_bits().hash(state);
    }
}

impl fmt::Debug for HeuristicValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for HeuristicValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_infinite() {
            write!(f, "inf")
        } else if let Some(n) = self.as_integer() {
            write!(f, "{n}")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl From<u32> for HeuristicValue {
    fn from(n: u32) -> Self {
        HeuristicValue(n as f64)
    }
}

impl Serialize for HeuristicValue {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        if self.is_infinite() {
            serializer.serialize_str("inf")
        } else if let Some(n) = self.as_integer() {
            serializer.serialize_u64(n)
        } else {
            serializer.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for HeuristicValue {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct ValueVisitor;

        impl Visitor<'_> for ValueVisitor {
            type Value = HeuristicValue;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                write!(f, "a non-negative number or \"inf\"")
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Self::Value, E> {
                Ok(HeuristicValue(v as f64))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Self::Value, E> {
                HeuristicValue::new(v as f64).map_err(E::custom)
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Self::Value, E> {
                HeuristicValue::new(v).map_err(E::custom)
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Self::Value, E> {
                match v {
                    "inf" | "infinity" | "Infinity" => Ok(HeuristicValue::INFINITY),
                    _ => Err(E::invalid_value(de::Unexpected::Str(v), &self)),
                }
            }
        }

        deserializer.deserialize_any(ValueVisitor)
    }
}
