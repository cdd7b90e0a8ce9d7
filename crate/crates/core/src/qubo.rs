//! The number partitioning QUBO.
//!
//! For weights `w` with total `c` the matrix is `Q_ij = w_i·w_j` off the
//! diagonal and `Q_ii = w_i·(w_i − c)`, so for a selection `x` with
//! `s = Σ x_i·w_i` the objective is `xᵀQx = s·(s − c)` and the squared
//! energy satisfies `E² = c² + 4·xᵀQx`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{energy, Instance, Partition};

/// Dense symmetric integer matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuboMatrix {
    n: usize,
    entries: Vec<i64>,
    constant: Option<u64>,
}

impl QuboMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            entries: vec![0; n * n],
            constant: None,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Total of the source instance for NPP-derived matrices.
    pub fn constant(&self) -> Option<u64> {
        self.constant
    }

    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.entries[i * self.n + j]
    }

    /// Sets `Q_ij` and `Q_ji`.
    pub fn set(&mut self, i: usize, j: usize, value: i64) {
        self.entries[i * self.n + j] = value;
        self.entries[j * self.n + i] = value;
    }

    pub fn row(&self, i: usize) -> &[i64] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| (i + 1..self.n).all(|j| self.get(i, j) == self.get(j, i)))
    }

    /// Largest absolute off-diagonal entry, or the largest diagonal entry
    /// when there are no couplings.
    pub fn max_coupling(&self) -> u64 {
        let off = (0..self.n)
            .flat_map(|i| (i + 1..self.n).map(move |j| (i, j)))
            .map(|(i, j)| self.get(i, j).unsigned_abs())
            .max()
            .unwrap_or(0);
        if off > 0 {
            return off;
        }
        (0..self.n)
            .map(|i| self.get(i, i).unsigned_abs())
            .max()
            .unwrap_or(0)
    }

    /// Upper-triangle entries including the diagonal.
    pub fn to_json(&self) -> QuboJson {
        let terms = (0..self.n)
            .flat_map(|i| (i..self.n).map(move |j| (i, j)))
            .map(|(i, j)| (i, j, self.get(i, j)))
            .collect();
        QuboJson { n: self.n, terms }
    }

    /// Rebuilds a matrix from upper- or lower-triangle terms; each unordered
    /// pair may appear at most once.
    pub fn from_json(json: &QuboJson) -> Result<Self> {
        let n = json.n;
        let mut q = Self::zeros(n);
        let mut seen = vec![false; n * n];
        for &(i, j, v) in &json.terms {
            if i >= n || j >= n {
                return Err(Error::InvalidArgument(format!(
                    "term ({i}, {j}) outside a {n}x{n} matrix"
                )));
            }
            let (a, b) = (i.min(j), i.max(j));
            if std::mem::replace(&mut seen[a * n + b], true) {
                return Err(Error::InvalidArgument(format!("duplicate term ({a}, {b})")));
            }
            q.set(a, b, v);
        }
        Ok(q)
    }
}

/// Wire form of a QUBO: `{"n": int, "terms": [[i, j, value], ...]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuboJson {
    pub n: usize,
    pub terms: Vec<(usize, usize, i64)>,
}

pub fn build_npp_qubo(instance: &Instance) -> QuboMatrix {
    let n = instance.len();
    // total² fits i64 by construction, so every product below does too
    let c = instance.total() as i64;
    let w: Vec<i64> = instance.weights().iter().map(|&w| w as i64).collect();
    let mut entries = vec![0i64; n * n];
    for i in 0..n {
        for j in 0..n {
            entries[i * n + j] = if i == j { w[i] * (w[i] - c) } else { w[i] * w[j] };
        }
    }
    QuboMatrix {
        n,
        entries,
        constant: Some(instance.total()),
    }
}

/// `xᵀQx`, exact.
pub fn qubo_energy(q: &QuboMatrix, x: &Partition) -> Result<i64> {
    x.check_len(q.dim())?;
    let selected: Vec<usize> = x.subset();
    let mut acc: i128 = 0;
    for &i in &selected {
        let row = q.row(i);
        for &j in &selected {
            acc += row[j] as i128;
        }
    }
    i64::try_from(acc).map_err(|_| Error::Overflow)
}

/// Checks `E² = c² + 4·xᵀQx` in exact integer arithmetic.
pub fn verify_hamiltonian_identity(instance: &Instance, x: &Partition) -> bool {
    let q = build_npp_qubo(instance);
    let (Ok(e), Ok(qx)) = (energy(instance, x), qubo_energy(&q, x)) else {
        return false;
    };
    let e = e.value() as i128;
    let c = instance.total() as i128;
    e * e == c * c + 4 * qx as i128
}
