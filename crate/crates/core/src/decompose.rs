//! Decomposing vectors and the split of an instance into sub-instances.
//!
//! A decomposing vector assigns each element index a label in `1..=m`; the
//! sub-instance `W_k` collects the weights labelled `k`, keeping their
//! original indices.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::seed::rng;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct DecomposingVector {
    labels: Vec<usize>,
    m: usize,
}

impl DecomposingVector {
    /// Labels are 1-based; every label in `1..=max` must occur.
    pub fn new(labels: Vec<usize>) -> Result<Self> {
        let m = labels.iter().copied().max().unwrap_or(0);
        if m == 0 {
            return Err(Error::InvalidArgument(
                "decomposing vector needs at least one positive label".into(),
            ));
        }
        let mut seen = vec![false; m];
        for (i, &l) in labels.iter().enumerate() {
            if l == 0 {
                return Err(Error::InvalidArgument(format!(
                    "label at index {i} is 0; labels start at 1"
                )));
            }
            seen[l - 1] = true;
        }
        if let Some(k) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidArgument(format!(
                "sub-problem {} receives no element",
                k + 1
            )));
        }
        Ok(Self { labels, m })
    }

    /// Parses `1,1,2,2`.
    pub fn parse(text: &str) -> Result<Self> {
        let labels = text
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<usize>()
                    .map_err(|e| Error::InvalidArgument(format!("bad label {t:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(labels)
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn group_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.m];
        for &l in &self.labels {
            sizes[l - 1] += 1;
        }
        sizes
    }
}

impl TryFrom<Vec<usize>> for DecomposingVector {
    type Error = Error;

    fn try_from(labels: Vec<usize>) -> Result<Self> {
        Self::new(labels)
    }
}

impl From<DecomposingVector> for Vec<usize> {
    fn from(v: DecomposingVector) -> Self {
        v.labels
    }
}

/// Shuffles `0..n` with the seeded generator and deals the indices
/// round-robin into `m` groups, so group sizes differ by at most one.
pub fn balanced_random_vector(n: usize, m: usize, seed: u64) -> Result<DecomposingVector> {
    if m < 1 || m > n {
        return Err(Error::InvalidArgument(format!(
            "sub-problem count m = {m} must lie in [1, {n}]"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng(seed));
    let mut labels = vec![0; n];
    for (pos, &i) in order.iter().enumerate() {
        labels[i] = pos % m + 1;
    }
    DecomposingVector::new(labels)
}

/// `m = ⌊n / sub_size⌋`, at least 1.
pub fn m_from_sub_size(n: usize, sub_size: usize) -> Result<usize> {
    if sub_size == 0 {
        return Err(Error::InvalidArgument("sub-problem size must be positive".into()));
    }
    Ok((n / sub_size).max(1))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decomposition {
    pub subs: Vec<Instance>,
    /// `index_maps[k − 1]` lists the original indices of `W_k` in order.
    pub index_maps: Vec<Vec<usize>>,
}

impl Decomposition {
    pub fn m(&self) -> usize {
        self.subs.len()
    }

    /// Weights reassembled in original index order.
    pub fn reassemble(&self) -> Vec<u64> {
        let n = self.index_maps.iter().map(Vec::len).sum();
        let mut weights = vec![0; n];
        for (sub, map) in self.subs.iter().zip(&self.index_maps) {
            for (&w, &i) in sub.weights().iter().zip(map) {
                weights[i] = w;
            }
        }
        weights
    }
}

pub fn decompose(instance: &Instance, vector: &DecomposingVector) -> Result<Decomposition> {
    if vector.len() != instance.len() {
        return Err(Error::LengthMismatch {
            expected: instance.len(),
            found: vector.len(),
        });
    }
    let mut index_maps = vec![Vec::new(); vector.m()];
    for (i, &l) in vector.labels().iter().enumerate() {
        index_maps[l - 1].push(i);
    }
    let subs = index_maps
        .iter()
        .map(|map| Instance::new(map.iter().map(|&i| instance.weight(i)).collect::<Vec<_>>()))
        .collect::<Result<Vec<_>>>()?;
    Ok(Decomposition { subs, index_maps })
}
