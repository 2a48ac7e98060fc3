//! Plain-text fixtures: one object per line as `name: i1,i2,...`.
//!
//! ```text
//! r: 13
//! h0: 0,1,3
//! h1: 0,2,7
//! e: 4,19
//! ```
//!
//! `h0`/`h1` are key supports in `[0, r)`, `e` an error vector in `[0, 2r)`
//! and `s` a syndrome in `[0, r)`. Blank lines and `#` comments are ignored.

use std::collections::BTreeMap;

use crate::bitvec::BitVector;
use crate::error::{Error, Result};
use crate::gf2::SparseKey;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Fixture {
    fields: BTreeMap<String, Vec<usize>>,
}

impl Fixture {
    pub fn parse(text: &str) -> Result<Self> {
        let mut fields = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (name, list) = line
                .split_once(':')
                .ok_or_else(|| Error::Parse(format!("line {}: expected `name: indices`", lineno + 1)))?;
            let values = list
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| {
                    s.parse::<usize>()
                        .map_err(|_| Error::Parse(format!("line {}: bad index {s:?}", lineno + 1)))
                })
                .collect::<Result<Vec<_>>>()?;
            if fields.insert(name.trim().to_string(), values).is_some() {
                return Err(Error::Parse(format!("line {}: duplicate field {name:?}", lineno + 1)));
            }
        }
        Ok(Self { fields })
    }

    pub fn get(&self, name: &str) -> Option<&[usize]> {
        self.fields.get(name).map(Vec::as_slice)
    }

    fn require(&self, name: &str) -> Result<&[usize]> {
        self.get(name)
            .ok_or_else(|| Error::Parse(format!("missing field {name:?}")))
    }

    pub fn r(&self) -> Result<usize> {
        match self.require("r")? {
            [r] => Ok(*r),
            _ => Err(Error::Parse("field \"r\" must hold one value".into())),
        }
    }

    pub fn key(&self) -> Result<SparseKey> {
        SparseKey::new(self.r()?, self.require("h0")?.to_vec(), self.require("h1")?.to_vec())
    }

    /// Error vector `e` of length `2r`, if present.
    pub fn error(&self) -> Result<Option<BitVector>> {
        let r = self.r()?;
        self.get("e").map(|supp| BitVector::from_support(2 * r, supp)).transpose()
    }

    /// Syndrome `s` of length `r`, if present.
    pub fn syndrome(&self) -> Result<Option<BitVector>> {
        let r = self.r()?;
        self.get("s").map(|supp| BitVector::from_support(r, supp)).transpose()
    }
}

fn join(indices: &[usize]) -> String {
    indices.iter().map(usize::to_string).collect::<Vec<_>>().join(",")
}

pub fn format_key(key: &SparseKey) -> String {
    format!("r: {}\nh0: {}\nh1: {}\n", key.r(), join(key.h0()), join(key.h1()))
}

/// One `name: indices` line for a vector.
pub fn format_vector(name: &str, v: &BitVector) -> String {
    format!("{name}: {}\n", join(&v.support()))
}
