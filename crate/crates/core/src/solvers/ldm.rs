//! Largest differencing (Karmarkar–Karp).
//!
//! The two largest values are repeatedly replaced by their difference. Each
//! step records that the two combined groups must end up on opposite sides;
//! two-colouring the resulting tree recovers a partition whose energy is the
//! final remaining value.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};
use std::time::Instant;

use crate::error::Result;
use crate::instance::{Instance, Partition};

use super::{SolveResult, SolverConfig, SubproblemSolver};

#[derive(Clone, Copy, Debug, Default)]
pub struct LdmSolver;

impl SubproblemSolver for LdmSolver {
    fn id(&self) -> String {
        "ldm".into()
    }

    fn is_deterministic(&self) -> bool {
        true
    }

    fn solve(&self, instance: &Instance, _config: &SolverConfig) -> Result<SolveResult> {
        solve_ldm(instance)
    }
}

pub fn solve_ldm(instance: &Instance) -> Result<SolveResult> {
    let start = Instant::now();
    let n = instance.len();
    // (value, lowest index first on ties); the index is the group's representative
    let mut heap: BinaryHeap<(u64, Reverse<usize>)> = instance
        .weights()
        .iter()
        .enumerate()
        .map(|(i, &w)| (w, Reverse(i)))
        .collect();
    let mut differ: Vec<Vec<usize>> = vec![Vec::new(); n];
    while heap.len() > 1 {
        let (a, Reverse(ra)) = heap.pop().expect("two values");
        let (b, Reverse(rb)) = heap.pop().expect("two values");
        differ[ra].push(rb);
        differ[rb].push(ra);
        heap.push((a - b, Reverse(ra)));
    }
    let (left, Reverse(root)) = heap.pop().expect("instance is non-empty");

    let mut side = vec![false; n];
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([root]);
    seen[root] = true;
    side[root] = true;
    while let Some(u) = queue.pop_front() {
        for &v in &differ[u] {
            if !seen[v] {
                seen[v] = true;
                side[v] = !side[u];
                queue.push_back(v);
            }
        }
    }
    let elapsed = start.elapsed();
    let result = SolveResult::new(
        instance,
        Partition::from_sides(side),
        "ldm",
        elapsed,
        elapsed,
        1,
        n as u64,
    )?;
    debug_assert_eq!(result.energy.value(), left);
    Ok(result)
}
