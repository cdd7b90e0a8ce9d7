//! Two-way number partitioning: exact and heuristic solvers, the NPP QUBO,
//! a divide-and-merge decomposition pipeline and an experiment harness.
//!
//! The crate is organised bottom-up:
//!
//! - [`instance`]: weights, partitions and the exact energy `|ΣA − ΣW∖A|`.
//! - [`qubo`]: the dense NPP QUBO and its exact objective.
//! - [`solvers`]: exact (meet-in-the-middle), greedy, differencing, simulated
//!   annealing and a remote sampler client, all behind [`SubproblemSolver`].
//! - [`decompose`] and [`merge`]: split an instance into sub-problems, solve
//!   them independently and merge the sub-solutions through an auxiliary
//!   partitioning problem over their errors.
//! - [`analysis`]: perfect-solution counting formulas and the power-of-two
//!   family on which decomposition provably loses the optimum.
//! - [`bench`]: instance generation, experiment grids, CSV output and
//!   summaries.
//!
//! Data-parallel loops (annealing reads, sub-problem solves, enumeration,
//! experiment cells) go through [`parallel`], which uses rayon when the
//! `parallel` feature is enabled and runs sequentially otherwise.

pub mod analysis;
pub mod bench;
pub mod decompose;
pub mod error;
pub mod instance;
pub mod merge;
pub mod parallel;
pub mod qubo;
pub mod remote;
pub mod seed;
pub mod solvers;

pub use error::{Error, Result};
pub use instance::{complement, energy, is_perfect, total, Energy, Instance, Partition};
pub use parallel::Execution;
pub use qubo::QuboMatrix;
pub use solvers::{SolveResult, SolverConfig, SubproblemSolver};
