//! JSON has no infinities; bucket boundaries carry them at both ends.

use alloc::vec::Vec;
use serde::de::{self, Deserializer};
use serde::ser::{SerializeSeq, Serializer};
use serde::{Deserialize, Serialize};

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum Bound<'a> {
    Finite(f64),
    #[serde(borrow)]
    Named(&'a str),
}

pub fn serialize<S: Serializer>(values: &[f64], serializer: S) -> Result<S::Ok, S::Error> {
    let mut seq = serializer.serialize_seq(Some(values.len()))?;
    for &v in values {
        if v == f64::INFINITY {
            seq.serialize_element(&Bound::Named("inf"))?;
        } else if v == f64::NEG_INFINITY {
            seq.serialize_element(&Bound::Named("-inf"))?;
        } else {
            seq.serialize_element(&Bound::Finite(v))?;
        }
    }
    seq.end()
}

pub fn deserialize<'de, D: Deserializer<'de>>(deserializer: D) -> Result<Vec<f64>, D::Error> {
    let raw: Vec<Bound<'de>> = Vec::deserialize(deserializer)?;
    raw.into_iter()
        .map(|b| match b {
            Bound::Finite(v) => Ok(v),
            Bound::Named("inf") => Ok(f64::INFINITY),
            Bound::Named("-inf") => Ok(f64::NEG_INFINITY),
            Bound::Named(other) => Err(de::Error::custom(alloc::format!("bad bound '{other}'"))),
        })
        .collect()
}
