//! Exact optimisation by meet-in-the-middle, with plain enumeration kept as
//! an independent check for small instances.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::instance::{Instance, Partition};

use super::{SolveResult, SolverConfig, SubproblemSolver};

/// Each half enumerates at most 2^20 subset sums.
pub const EXACT_MAX_N: usize = 40;
pub const ENUMERATION_MAX_N: usize = 24;

#[derive(Clone, Copy, Debug, Default)]
pub struct ExactSolver;

impl SubproblemSolver for ExactSolver {
    fn id(&self) -> String {
        "exact".into()
    }

    fn is_deterministic(&self) -> bool {
        true
    }

    fn solve(&self, instance: &Instance, _config: &SolverConfig) -> Result<SolveResult> {
        solve_exact(instance)
    }
}

/// Sums of every subset of `w`, indexed by bit mask.
fn subset_sums(w: &[u64]) -> Vec<u64> {
    let mut sums = vec![0u64; 1 << w.len()];
    for mask in 1..sums.len() {
        let low = mask.trailing_zeros() as usize;
        sums[mask] = sums[mask & (mask - 1)] + w[low];
    }
    sums
}

/// Globally optimal partition in `O(2^{n/2} · n)` time.
pub fn solve_exact(instance: &Instance) -> Result<SolveResult> {
    let n = instance.len();
    if n > EXACT_MAX_N {
        return Err(Error::Capability {
            solver: "exact",
            bound: EXACT_MAX_N,
            n,
        });
    }
    let start = Instant::now();
    let w = instance.weights();
    let c = instance.total() as i64;
    let half = n / 2;
    let (left, right) = w.split_at(half);

    let left_sums = subset_sums(left);
    let mut right_sums: Vec<(u64, u32)> = subset_sums(right)
        .into_iter()
        .enumerate()
        .map(|(mask, s)| (s, mask as u32))
        .collect();
    right_sums.sort_unstable();

    let floor = (c % 2) as u64;
    let mut best = (u64::MAX, 0usize, 0u32);
    'outer: for (lmask, &ls) in left_sums.iter().enumerate() {
        // want 2·(ls + rs) as close to c as possible
        let target = c - 2 * ls as i64;
        let idx = right_sums.partition_point(|&(rs, _)| 2 * (rs as i64) < target);
        for cand in [idx, idx.wrapping_sub(1)] {
            let Some(&(rs, rmask)) = right_sums.get(cand) else {
                continue;
            };
            let e = (2 * (ls + rs) as i64 - c).unsigned_abs();
            if e < best.0 {
                best = (e, lmask, rmask);
                if e == floor {
                    break 'outer;
                }
            }
        }
    }
    let backend = start.elapsed();

    let (_, lmask, rmask) = best;
    let side = (0..n)
        .map(|i| {
            if i < half {
                lmask >> i & 1 == 1
            } else {
                rmask >> (i - half) & 1 == 1
            }
        })
        .collect();
    let work = (left_sums.len() + right_sums.len()) as u64;
    SolveResult::new(
        instance,
        Partition::from_sides(side),
        "exact",
        backend,
        start.elapsed(),
        1,
        work,
    )
}

/// Optimum by visiting all 2ⁿ assignments in Gray-code order.
///
/// Returns the first optimal assignment met and its energy.
pub fn enumerate_optimum(instance: &Instance) -> Result<(Partition, u64)> {
    let n = instance.len();
    if n > ENUMERATION_MAX_N {
        return Err(Error::Capability {
            solver: "enumeration",
            bound: ENUMERATION_MAX_N,
            n,
        });
    }
    let w = instance.weights();
    // signed difference Σ_A − Σ_rest, starting from A = ∅
    let mut diff = -(instance.total() as i64);
    let mut gray = 0u64;
    let mut best = (diff.unsigned_abs(), 0u64);
    for step in 1u64..(1 << n) {
        let bit = step.trailing_zeros() as usize;
        gray ^= 1 << bit;
        if gray >> bit & 1 == 1 {
            diff += 2 * w[bit] as i64;
        } else {
            diff -= 2 * w[bit] as i64;
        }
        if diff.unsigned_abs() < best.0 {
            best = (diff.unsigned_abs(), gray);
        }
    }
    let side = (0..n).map(|i| best.1 >> i & 1 == 1).collect();
    Ok((Partition::from_sides(side), best.0))
}
