use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::seed::rng;

/// Inclusive integer interval.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightRange {
    pub lo: u64,
    pub hi: u64,
}

impl WeightRange {
    pub fn new(lo: u64, hi: u64) -> Result<Self> {
        if lo < 1 || lo > hi {
            return Err(Error::InvalidArgument(format!(
                "weight range [{lo}, {hi}] must satisfy 1 <= lo <= hi"
            )));
        }
        Ok(Self { lo, hi })
    }

    /// `[5n, 10n]`.
    pub fn paper_default(n: usize) -> Self {
        Self {
            lo: 5 * n as u64,
            hi: 10 * n as u64,
        }
    }
}

/// How the weight range depends on `n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WeightRule {
    /// `[lo_factor·n, hi_factor·n]`.
    Scaled { lo_factor: u64, hi_factor: u64 },
    Fixed { lo: u64, hi: u64 },
}

impl Default for WeightRule {
    fn default() -> Self {
        WeightRule::Scaled {
            lo_factor: 5,
            hi_factor: 10,
        }
    }
}

impl WeightRule {
    pub fn range(&self, n: usize) -> Result<WeightRange> {
        match *self {
            WeightRule::Scaled { lo_factor, hi_factor } => {
                WeightRange::new(lo_factor * n as u64, hi_factor * n as u64)
            }
            WeightRule::Fixed { lo, hi } => WeightRange::new(lo, hi),
        }
    }

    pub fn describe(&self) -> String {
        match *self {
            WeightRule::Scaled { lo_factor, hi_factor } => {
                format!("uniform integers in [{lo_factor}n, {hi_factor}n], both bounds inclusive")
            }
            WeightRule::Fixed { lo, hi } => {
                format!("uniform integers in [{lo}, {hi}], both bounds inclusive")
            }
        }
    }
}

/// Draws `n` independent uniform weights from `range`.
///
/// With `even_sum`, an odd total is repaired by moving one uniformly chosen
/// element by one: up, or down when it sits at the upper bound.
pub fn generate_instance(n: usize, seed: u64, range: WeightRange, even_sum: bool) -> Result<Instance> {
    if n == 0 {
        return Err(Error::EmptyInstance);
    }
    let mut rng = rng(seed);
    let mut weights: Vec<u64> = (0..n).map(|_| rng.gen_range(range.lo..=range.hi)).collect();
    if even_sum && weights.iter().sum::<u64>() % 2 == 1 {
        let i = rng.gen_range(0..n);
        if weights[i] == range.hi && weights[i] > range.lo {
            weights[i] -= 1;
        } else {
            weights[i] += 1;
        }
    }
    Instance::new(weights)
}

/// JSON printed by `npp gen`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratedInstance {
    pub n: usize,
    pub seed: u64,
    pub lo: u64,
    pub hi: u64,
    pub even_sum: bool,
    pub total: u64,
    pub weights: Vec<u64>,
}

impl GeneratedInstance {
    pub fn new(instance: &Instance, seed: u64, range: WeightRange, even_sum: bool) -> Self {
        Self {
            n: instance.len(),
            seed,
            lo: range.lo,
            hi: range.hi,
            even_sum,
            total: instance.total(),
            weights: instance.weights().to_vec(),
        }
    }
}
