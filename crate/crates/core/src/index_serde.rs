//! Serde adapters writing 0-based covariate indices as 1-based numbers.

use serde::{Deserialize, Deserializer, Serializer};

pub mod one_based {
    use super::*;

    pub fn serialize<S: Serializer>(index: &usize, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u64(*index as u64 + 1)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<usize, D::Error> {
        let v = u64::deserialize(d)?;
        if v == 0 {
            return Err(serde::de::Error::custom("covariate indices are 1-based"));
        }
        Ok((v - 1) as usize)
    }
}

pub mod one_based_vec {
    use super::*;
    use serde::ser::SerializeSeq;

    pub fn serialize<S: Serializer>(indices: &[usize], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(indices.len()))?;
        for i in indices {
            seq.serialize_element(&(*i as u64 + 1))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<usize>, D::Error> {
        let v = Vec::<u64>::deserialize(d)?;
        v.into_iter()
            .map(|i| {
                if i == 0 {
                    Err(serde::de::Error::custom("covariate indices are 1-based"))
                } else {
                    Ok((i - 1) as usize)
                }
            })
            .collect()
    }
}
