//! Serde helpers that write integers above `2^53` as decimal strings and accept
//! either form on input.

use std::collections::BTreeMap;

use serde::de::{self, Deserializer, Visitor};
use serde::ser::{SerializeMap, SerializeSeq, Serializer};
use serde::{Deserialize, Serialize};

/// Largest integer a binary64 consumer can hold exactly.
pub const SAFE_INT: u128 = 1 << 53;

/// A `u128` in lenient JSON form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Wide(pub u128);

impl Serialize for Wide {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0 > SAFE_INT {
            s.serialize_str(&self.0.to_string())
        } else {
            s.serialize_u64(self.0 as u64)
        }
    }
}

impl<'de> Deserialize<'de> for Wide {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = Wide;
            fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
                f.write_str("a non-negative integer or a decimal string")
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Wide, E> {
                Ok(Wide(v as u128))
            }
            fn visit_u128<E: de::Error>(self, v: u128) -> Result<Wide, E> {
                Ok(Wide(v))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Wide, E> {
                u128::try_from(v).map(Wide).map_err(|_| E::custom("negative integer"))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<Wide, E> {
                v.parse().map(Wide).map_err(|_| E::custom(format!("bad integer {v:?}")))
            }
        }
        d.deserialize_any(V)
    }
}

/// The same convention for signed values.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WideSigned(pub i128);

impl Serialize for WideSigned {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0.unsigned_abs() > SAFE_INT {
            s.serialize_str(&self.0.to_string())
        } else {
            s.serialize_i64(self.0 as i64)
        }
    }
}

impl<'de> Deserialize<'de> for WideSigned {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = WideSigned;
            fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
                f.write_str("an integer or a decimal string")
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<WideSigned, E> {
                Ok(WideSigned(v as i128))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<WideSigned, E> {
                Ok(WideSigned(v as i128))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<WideSigned, E> {
                v.parse()
                    .map(WideSigned)
                    .map_err(|_| E::custom(format!("bad integer {v:?}")))
            }
        }
        d.deserialize_any(V)
    }
}

/// `#[serde(with = "wide")]` for `u128` fields.
pub mod wide {
    use super::*;
    pub fn serialize<S: Serializer>(v: &u128, s: S) -> Result<S::Ok, S::Error> {
        Wide(*v).serialize(s)
    }
    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<u128, D::Error> {
        Wide::deserialize(d).map(|w| w.0)
    }
}

/// `#[serde(with = "wide_signed")]` for `i128` fields.
pub mod wide_signed {
    use super::*;
    pub fn serialize<S: Serializer>(v: &i128, s: S) -> Result<S::Ok, S::Error> {
        WideSigned(*v).serialize(s)
    }
    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<i128, D::Error> {
        WideSigned::deserialize(d).map(|w| w.0)
    }
}

/// `#[serde(with = "wide_vec")]` for `Vec<u128>` fields.
pub mod wide_vec {
    use super::*;
    pub fn serialize<S: Serializer>(v: &[u128], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for x in v {
            seq.serialize_element(&Wide(*x))?;
        }
        seq.end()
    }
    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<u128>, D::Error> {
        Vec::<Wide>::deserialize(d).map(|v| v.into_iter().map(|w| w.0).collect())
    }
}

/// `#[serde(with = "wide_pairs")]` for `Vec<(u128, u128)>` fields.
pub mod wide_pairs {
    use super::*;
    pub fn serialize<S: Serializer>(v: &[(u128, u128)], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for &(a, b) in v {
            seq.serialize_element(&(Wide(a), Wide(b)))?;
        }
        seq.end()
    }
    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<(u128, u128)>, D::Error> {
        Vec::<(Wide, Wide)>::deserialize(d).map(|v| v.into_iter().map(|(a, b)| (a.0, b.0)).collect())
    }
}

/// `#[serde(with = "wide_map")]` for `BTreeMap<u64, u128>` fields; keys are
/// always strings in JSON.
pub mod wide_map {
    use super::*;
    pub fn serialize<S: Serializer>(v: &BTreeMap<u64, u128>, s: S) -> Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(v.len()))?;
        for (k, x) in v {
            m.serialize_entry(&k.to_string(), &Wide(*x))?;
        }
        m.end()
    }
    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<u64, u128>, D::Error> {
        let raw = BTreeMap::<String, Wide>::deserialize(d)?;
        raw.into_iter()
            .map(|(k, w)| {
                k.parse::<u64>()
                    .map(|k| (k, w.0))
                    .map_err(|_| de::Error::custom(format!("bad key {k:?}")))
            })
            .collect()
    }
}

/// A [`BigRational`](num_rational::BigRational) as the string `"num/den"`.
pub mod ratio {
    use num_bigint::BigInt;
    use num_rational::BigRational;

    use super::*;

    pub fn serialize<S: Serializer>(v: &BigRational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format!("{}/{}", v.numer(), v.denom()))
    }

    pub fn parse(text: &str) -> Option<BigRational> {
        let (n, d) = text.split_once('/').unwrap_or((text, "1"));
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d == BigInt::from(0) {
            return None;
        }
        Some(BigRational::new(n, d))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigRational, D::Error> {
        let text = String::deserialize(d)?;
        parse(&text).ok_or_else(|| de::Error::custom(format!("bad rational {text:?}")))
    }
}
