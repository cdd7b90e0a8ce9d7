//! Simulated annealing on a QUBO with Metropolis single-bit flips.
//!
//! Each read starts from a random assignment and performs `num_sweeps`
//! sweeps; a sweep visits every variable once in a freshly shuffled order.
//! Inverse temperatures follow a geometric schedule from `beta_min` to
//! `beta_max`, and are measured in units of the matrix's largest coupling
//! `max |Q_ij|` so the same schedule is meaningful for any weight scale.
//!
//! The local field `h_i = Σ_{j≠i} Q_ij·x_j` is cached, giving
//! `ΔE_i = (1 − 2x_i)·(Q_ii + 2h_i)` in constant time and an `O(n)` update
//! after an accepted flip. Each read reports the lowest-energy state it
//! visited; reads are seeded independently and may run concurrently.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::instance::{Instance, Partition};
use crate::parallel::{map_indexed, Execution};
use crate::qubo::{build_npp_qubo, QuboMatrix};
use crate::seed::{derive_seed, rng, STREAM_READ};

use super::{SolveResult, SolverConfig, SubproblemSolver};

#[derive(Clone, Copy, Debug, Default)]
pub struct AnnealSolver;

impl SubproblemSolver for AnnealSolver {
    fn id(&self) -> String {
        "sa".into()
    }

    fn is_deterministic(&self) -> bool {
        false
    }

    fn solve(&self, instance: &Instance, config: &SolverConfig) -> Result<SolveResult> {
        solve_sa(instance, config)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnnealRead {
    pub x: Vec<bool>,
    pub energy: i64,
}

#[derive(Clone, Debug)]
pub struct AnnealOutcome {
    /// One entry per performed read, in read order.
    pub reads: Vec<AnnealRead>,
    pub backend_time: Duration,
    /// Flip attempts.
    pub work: u64,
}

impl AnnealOutcome {
    /// Lowest energy; the earliest read wins ties.
    pub fn best(&self) -> &AnnealRead {
        self.reads
            .iter()
            .reduce(|best, r| if r.energy < best.energy { r } else { best })
            .expect("at least one read")
    }
}

pub fn solve_sa(instance: &Instance, config: &SolverConfig) -> Result<SolveResult> {
    let start = Instant::now();
    let q = build_npp_qubo(instance);
    let outcome = anneal(&q, config)?;
    let best = outcome.best();
    SolveResult::new(
        instance,
        Partition::from_sides(best.x.clone()),
        "sa",
        outcome.backend_time,
        start.elapsed(),
        outcome.reads.len(),
        outcome.work,
    )
}

/// Anneals an arbitrary symmetric QUBO.
pub fn anneal(q: &QuboMatrix, config: &SolverConfig) -> Result<AnnealOutcome> {
    config.validate()?;
    let n = q.dim();
    let start = Instant::now();
    let betas = config.beta.betas(config.num_sweeps);
    let unit = q.max_coupling().max(1) as f64;
    let wide = needs_wide_accumulator(q);

    let run = |r: usize| -> Result<AnnealRead> {
        let seed = derive_seed(config.seed, STREAM_READ, r as u64);
        if wide {
            anneal_read::<i128>(q, &betas, unit, seed)
        } else {
            anneal_read::<i64>(q, &betas, unit, seed)
        }
    };

    let reads = match config.time_budget {
        Some(budget) => {
            let mut reads = Vec::new();
            for r in 0..config.num_reads {
                reads.push(run(r)?);
                if start.elapsed() >= budget {
                    break;
                }
            }
            reads
        }
        None => map_indexed(config.execution, config.num_reads, run)
            .into_iter()
            .collect::<Result<Vec<_>>>()?,
    };
    let work = (reads.len() * config.num_sweeps * n) as u64;
    Ok(AnnealOutcome {
        reads,
        backend_time: start.elapsed(),
        work,
    })
}

/// Whether energies or fields could leave `i64` range.
fn needs_wide_accumulator(q: &QuboMatrix) -> bool {
    let n = q.dim();
    let mut total: u128 = 0;
    for i in 0..n {
        total += q.row(i).iter().map(|v| v.unsigned_abs() as u128).sum::<u128>();
    }
    // |ΔE| ≤ |Q_ii| + 2·Σ|Q_ij| ≤ 2·Σ|Q|
    total.saturating_mul(2) >= i64::MAX as u128
}

trait Accumulator:
    Copy + Ord + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self> + AddAssign
{
    const ZERO: Self;
    fn from_i64(v: i64) -> Self;
    fn to_f64(self) -> f64;
    fn to_i64(self) -> Option<i64>;
}

impl Accumulator for i64 {
    const ZERO: Self = 0;
    fn from_i64(v: i64) -> Self {
        v
    }
    fn to_f64(self) -> f64 {
        self as f64
    }
    fn to_i64(self) -> Option<i64> {
        Some(self)
    }
}

impl Accumulator for i128 {
    const ZERO: Self = 0;
    fn from_i64(v: i64) -> Self {
        v as i128
    }
    fn to_f64(self) -> f64 {
        self as f64
    }
    fn to_i64(self) -> Option<i64> {
        i64::try_from(self).ok()
    }
}

fn anneal_read<T: Accumulator>(
    q: &QuboMatrix,
    betas: &[f64],
    unit: f64,
    seed: u64,
) -> Result<AnnealRead> {
    let n = q.dim();
    let mut rng = rng(seed);
    let mut x: Vec<bool> = (0..n).map(|_| rng.gen::<bool>()).collect();
    let diag: Vec<T> = (0..n).map(|i| T::from_i64(q.get(i, i))).collect();

    let mut field = vec![T::ZERO; n];
    for (i, h) in field.iter_mut().enumerate() {
        let row = q.row(i);
        for j in (0..n).filter(|&j| j != i && x[j]) {
            *h += T::from_i64(row[j]);
        }
    }
    let mut energy = T::ZERO;
    for i in (0..n).filter(|&i| x[i]) {
        energy += diag[i] + field[i];
    }

    let mut best_energy = energy;
    let mut best_x = x.clone();
    let mut order: Vec<usize> = (0..n).collect();
    let two = T::from_i64(2);
    for &beta in betas {
        let scale = beta / unit;
        order.shuffle(&mut rng);
        for &i in &order {
            let local = diag[i] + two * field[i];
            let delta = if x[i] { -local } else { local };
            let accept = delta <= T::ZERO || {
                let exponent = scale * delta.to_f64();
                // exp(-40) ≈ 4e-18 counts as rejection
                exponent < 40.0 && rng.gen::<f64>() < (-exponent).exp()
            };
            if !accept {
                continue;
            }
            x[i] = !x[i];
            energy += delta;
            let row = q.row(i);
            if x[i] {
                for (j, h) in field.iter_mut().enumerate() {
                    if j != i {
                        *h += T::from_i64(row[j]);
                    }
                }
            } else {
                for (j, h) in field.iter_mut().enumerate() {
                    if j != i {
                        *h += -T::from_i64(row[j]);
                    }
                }
            }
            if energy < best_energy {
                best_energy = energy;
                best_x.copy_from_slice(&x);
            }
        }
    }
    let energy = best_energy.to_i64().ok_or(Error::Overflow)?;
    Ok(AnnealRead { x: best_x, energy })
}

/// Same as [`solve_sa`] with the execution strategy overridden.
pub fn solve_sa_with(instance: &Instance, config: &SolverConfig, execution: Execution) -> Result<SolveResult> {
    let config = SolverConfig {
        execution,
        ..config.clone()
    };
    solve_sa(instance, &config)
}
