//! Single-instance solvers behind one contract.
//!
//! Every solver implements [`SubproblemSolver`]: given an instance and a
//! [`SolverConfig`] it returns a [`SolveResult`] whose partition is valid for
//! that instance. Results are deterministic in `(instance, config.seed)` and
//! solvers hold no mutable state, so one solver value can be shared by many
//! workers.

use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{energy, Energy, Instance, Partition};
use crate::parallel::Execution;

pub mod anneal;
pub mod exact;
pub mod greedy;
pub mod ldm;

pub use anneal::{solve_sa, AnnealSolver};
pub use exact::{enumerate_optimum, solve_exact, ExactSolver, ENUMERATION_MAX_N, EXACT_MAX_N};
pub use greedy::{solve_greedy, GreedySolver};
pub use ldm::{solve_ldm, LdmSolver};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BetaSchedule {
    pub beta_min: f64,
    pub beta_max: f64,
}

impl BetaSchedule {
    /// Geometric interpolation from `beta_min` to `beta_max` over `sweeps`.
    pub fn betas(&self, sweeps: usize) -> Vec<f64> {
        if sweeps == 1 {
            return vec![self.beta_max];
        }
        let (lo, hi) = (self.beta_min.ln(), self.beta_max.ln());
        let step = (hi - lo) / (sweeps - 1) as f64;
        (0..sweeps).map(|i| (lo + step * i as f64).exp()).collect()
    }
}

impl Default for BetaSchedule {
    fn default() -> Self {
        Self {
            beta_min: 0.01,
            beta_max: 10.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub seed: u64,
    /// Independent restarts.
    pub num_reads: usize,
    /// Full passes over all variables per read.
    pub num_sweeps: usize,
    pub beta: BetaSchedule,
    /// Stop starting new reads once this much wall-clock time has passed.
    #[serde(with = "opt_millis")]
    pub time_budget: Option<Duration>,
    pub execution: Execution,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            num_reads: 100,
            num_sweeps: 1000,
            beta: BetaSchedule::default(),
            time_budget: None,
            execution: Execution::default(),
        }
    }
}

impl SolverConfig {
    pub fn with_seed(&self, seed: u64) -> Self {
        Self {
            seed,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_reads == 0 {
            return Err(Error::InvalidArgument("num_reads must be at least 1".into()));
        }
        if self.num_sweeps == 0 {
            return Err(Error::InvalidArgument("num_sweeps must be at least 1".into()));
        }
        let BetaSchedule { beta_min, beta_max } = self.beta;
        if !(beta_min > 0.0 && beta_min.is_finite() && beta_max.is_finite() && beta_min < beta_max)
        {
            return Err(Error::InvalidArgument(format!(
                "beta schedule needs 0 < beta_min < beta_max, got {beta_min} and {beta_max}"
            )));
        }
        Ok(())
    }
}

mod opt_millis {
    use std::time::Duration;

    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<Duration>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(d) => s.serialize_some(&(d.as_millis() as u64)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Duration>, D::Error> {
        Ok(Option::<u64>::deserialize(d)?.map(Duration::from_millis))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveResult {
    pub partition: Partition,
    pub energy: Energy,
    /// Time inside the sampling or search loop.
    pub backend_time: Duration,
    pub wall_time: Duration,
    pub solver_id: String,
    pub reads_performed: usize,
    /// Deterministic work count (flip attempts, enumerated subsets, ...).
    pub work: u64,
}

impl SolveResult {
    /// Recomputes the energy of `partition` so the stored value can never
    /// disagree with the partition.
    pub(crate) fn new(
        instance: &Instance,
        partition: Partition,
        solver_id: impl Into<String>,
        backend_time: Duration,
        wall_time: Duration,
        reads_performed: usize,
        work: u64,
    ) -> Result<Self> {
        let energy = energy(instance, &partition)?;
        Ok(Self {
            partition,
            energy,
            backend_time,
            wall_time: wall_time.max(backend_time),
            solver_id: solver_id.into(),
            reads_performed,
            work,
        })
    }

    pub fn to_json(&self) -> SolveResultJson {
        SolveResultJson {
            solver: self.solver_id.clone(),
            energy: self.energy.value(),
            is_perfect: self.energy.is_perfect(),
            partition: self.partition.clone(),
            backend_us: self.backend_time.as_micros() as u64,
            wall_us: self.wall_time.as_micros() as u64,
            reads: self.reads_performed,
            work: self.work,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveResultJson {
    pub solver: String,
    pub energy: u64,
    pub is_perfect: bool,
    pub partition: Partition,
    pub backend_us: u64,
    pub wall_us: u64,
    pub reads: usize,
    pub work: u64,
}

pub trait SubproblemSolver: Send + Sync {
    fn id(&self) -> String;

    /// Deterministic solvers ignore the seed entirely.
    fn is_deterministic(&self) -> bool;

    fn solve(&self, instance: &Instance, config: &SolverConfig) -> Result<SolveResult>;
}

impl<T: SubproblemSolver + ?Sized> SubproblemSolver for Box<T> {
    fn id(&self) -> String {
        (**self).id()
    }

    fn is_deterministic(&self) -> bool {
        (**self).is_deterministic()
    }

    fn solve(&self, instance: &Instance, config: &SolverConfig) -> Result<SolveResult> {
        (**self).solve(instance, config)
    }
}
