//! The number partitioning data model.
//!
//! An [`Instance`] is an indexed multiset of positive weights. A
//! [`Partition`] assigns every index to side 1 (the subset `A`) or side 0
//! (its complement). Elements are always identified by index, so equal
//! weights remain distinct elements.

use std::fmt;
use std::io::BufRead;
use std::path::Path;
use std::sync::Arc;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Largest total for which `total²` still fits in an `i64`.
pub const MAX_TOTAL: u64 = 3_037_000_499;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Instance {
    weights: Arc<[u64]>,
    total: u64,
}

impl Instance {
    /// Builds an instance of positive weights whose squared total fits `i64`.
    pub fn new(weights: impl Into<Vec<u64>>) -> Result<Self> {
        let weights = weights.into();
        if let Some(index) = weights.iter().position(|&w| w == 0) {
            return Err(Error::ZeroWeight { index });
        }
        Self::with_zero_weights(weights)
    }

    /// Like [`Instance::new`] but admits zero weights.
    ///
    /// The auxiliary problem built from sub-problem errors may contain zeros;
    /// they are neutral in every partition.
    pub fn with_zero_weights(weights: impl Into<Vec<u64>>) -> Result<Self> {
        let weights = weights.into();
        if weights.is_empty() {
            return Err(Error::EmptyInstance);
        }
        let total = weights
            .iter()
            .try_fold(0u64, |acc, &w| acc.checked_add(w))
            .filter(|&t| t <= MAX_TOTAL)
            .ok_or(Error::Overflow)?;
        Ok(Self {
            weights: weights.into(),
            total,
        })
    }

    /// Parses the plain-text format: one decimal weight per line, blank lines
    /// and `#` comment lines ignored.
    pub fn parse(text: &str) -> Result<Self> {
        Self::read(text.as_bytes())
    }

    pub fn read(reader: impl BufRead) -> Result<Self> {
        let mut weights = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let w: u64 = trimmed.parse().map_err(|e| Error::Parse {
                line: i + 1,
                message: format!("invalid weight {trimmed:?}: {e}"),
            })?;
            weights.push(w);
        }
        Self::new(weights)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::read(std::io::BufReader::new(file))
    }

    /// Renders the instance in the plain-text file format.
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(self.len() * 8);
        for w in self.weights.iter() {
            out.push_str(&w.to_string());
            out.push('\n');
        }
        out
    }

    pub fn weights(&self) -> &[u64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn weight(&self, index: usize) -> u64 {
        self.weights[index]
    }
}

impl fmt::Debug for Instance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Instance")
            .field("n", &self.len())
            .field("total", &self.total)
            .field("weights", &&self.weights[..])
            .finish()
    }
}

impl Serialize for Instance {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.weights.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Instance {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let weights = Vec::<u64>::deserialize(d)?;
        Instance::new(weights).map_err(D::Error::custom)
    }
}

/// A two-side assignment; `side(i) == true` means index `i` is in `A`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Partition {
    side: Vec<bool>,
}

impl Partition {
    pub fn from_sides(side: Vec<bool>) -> Self {
        Self { side }
    }

    /// Parses 0/1 labels.
    pub fn from_labels(labels: &[u8]) -> Result<Self> {
        labels
            .iter()
            .enumerate()
            .map(|(i, &l)| match l {
                0 => Ok(false),
                1 => Ok(true),
                other => Err(Error::InvalidArgument(format!(
                    "side label at index {i} is {other}, expected 0 or 1"
                ))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Self::from_sides)
    }

    pub fn from_subset(n: usize, subset: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut side = vec![false; n];
        for i in subset {
            *side.get_mut(i).ok_or(Error::LengthMismatch {
                expected: n,
                found: i + 1,
            })? = true;
        }
        Ok(Self { side })
    }

    pub fn all(n: usize, value: bool) -> Self {
        Self {
            side: vec![value; n],
        }
    }

    pub fn len(&self) -> usize {
        self.side.len()
    }

    pub fn is_empty(&self) -> bool {
        self.side.is_empty()
    }

    pub fn side(&self, index: usize) -> bool {
        self.side[index]
    }

    pub fn sides(&self) -> &[bool] {
        &self.side
    }

    pub fn labels(&self) -> Vec<u8> {
        self.side.iter().map(|&s| s as u8).collect()
    }

    /// Indices on side 1.
    pub fn subset(&self) -> Vec<usize> {
        self.indices_on(true)
    }

    pub fn indices_on(&self, value: bool) -> Vec<usize> {
        self.side
            .iter()
            .enumerate()
            .filter(|&(_, &s)| s == value)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn complement(&self) -> Self {
        Self {
            side: self.side.iter().map(|s| !s).collect(),
        }
    }

    pub(crate) fn check_len(&self, n: usize) -> Result<()> {
        if self.side.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                found: self.side.len(),
            });
        }
        Ok(())
    }

    /// `(Σ side 1, Σ side 0)`.
    pub fn side_sums(&self, instance: &Instance) -> Result<(u64, u64)> {
        self.check_len(instance.len())?;
        let selected: u64 = instance
            .weights()
            .iter()
            .zip(&self.side)
            .filter(|&(_, &s)| s)
            .map(|(w, _)| w)
            .sum();
        Ok((selected, instance.total() - selected))
    }
}

impl Serialize for Partition {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.labels().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Partition {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let labels = Vec::<u8>::deserialize(d)?;
        Partition::from_labels(&labels).map_err(D::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Energy(pub u64);

impl Energy {
    pub fn value(self) -> u64 {
        self.0
    }

    pub fn is_perfect(self) -> bool {
        self.0 <= 1
    }
}

impl fmt::Display for Energy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

pub fn energy(instance: &Instance, partition: &Partition) -> Result<Energy> {
    let (a, b) = partition.side_sums(instance)?;
    Ok(Energy(a.abs_diff(b)))
}

/// Perfect means `E ∈ {0, 1}`.
pub fn is_perfect(e: Energy) -> bool {
    e.is_perfect()
}

pub fn total(instance: &Instance) -> u64 {
    instance.total()
}

pub fn complement(partition: &Partition) -> Partition {
    partition.complement()
}
