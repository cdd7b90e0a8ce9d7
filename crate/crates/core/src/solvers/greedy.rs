//! Greedy: heaviest first, each weight onto the currently lighter side.

use std::time::Instant;

use crate::error::Result;
use crate::instance::{Instance, Partition};

use super::{SolveResult, SolverConfig, SubproblemSolver};

#[derive(Clone, Copy, Debug, Default)]
pub struct GreedySolver;

impl SubproblemSolver for GreedySolver {
    fn id(&self) -> String {
        "greedy".into()
    }

    fn is_deterministic(&self) -> bool {
        true
    }

    fn solve(&self, instance: &Instance, _config: &SolverConfig) -> Result<SolveResult> {
        solve_greedy(instance)
    }
}

/// Equal weights keep index order; equal side sums send the weight to side 1.
pub fn solve_greedy(instance: &Instance) -> Result<SolveResult> {
    let start = Instant::now();
    let w = instance.weights();
    let mut order: Vec<usize> = (0..w.len()).collect();
    order.sort_by(|&a, &b| w[b].cmp(&w[a]).then(a.cmp(&b)));

    let mut side = vec![false; w.len()];
    let (mut one, mut zero) = (0u64, 0u64);
    for i in order {
        if one <= zero {
            side[i] = true;
            one += w[i];
        } else {
            zero += w[i];
        }
    }
    let elapsed = start.elapsed();
    SolveResult::new(
        instance,
        Partition::from_sides(side),
        "greedy",
        elapsed,
        elapsed,
        1,
        w.len() as u64,
    )
}
