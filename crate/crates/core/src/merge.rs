//! The divide-and-merge pipeline.
//!
//! 1. Split the instance with a decomposing vector.
//! 2. Solve every sub-instance independently and orient each solution so its
//!    heavy side comes first; the sub-error is `E_k = Σheavy − Σlight`.
//! 3. Solve the auxiliary instance `W′ = (E_1, …, E_m)`. Its side-1 set `A′`
//!    (by sub-problem index) decides which sub-solutions contribute their
//!    heavy side to `Â`; the rest contribute their light side. The merged
//!    energy is `E′ = |Σ_k ±E_k|`.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::decompose::{balanced_random_vector, decompose, m_from_sub_size, DecomposingVector};
use crate::error::{Error, Result};
use crate::instance::{energy, Energy, Instance, Partition};
use crate::parallel::{try_map_indexed, Execution};
use crate::seed::{derive_seed, STREAM_AUX, STREAM_SUB, STREAM_VECTOR};
use crate::solvers::{SolveResult, SolverConfig, SubproblemSolver};

/// An oriented sub-solution with original element indices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubSolution {
    /// 1-based sub-problem index.
    pub k: usize,
    pub heavy: Vec<usize>,
    pub light: Vec<usize>,
    pub e_k: Energy,
}

pub fn orient(k: usize, sub: &Instance, index_map: &[usize], partition: &Partition) -> Result<SubSolution> {
    if index_map.len() != sub.len() {
        return Err(Error::LengthMismatch {
            expected: sub.len(),
            found: index_map.len(),
        });
    }
    let (one, zero) = partition.side_sums(sub)?;
    // ties keep the solver's side 1 as the heavy side
    let heavy_side = one >= zero;
    let pick = |value: bool| -> Vec<usize> {
        partition
            .indices_on(value)
            .into_iter()
            .map(|i| index_map[i])
            .collect()
    };
    Ok(SubSolution {
        k,
        heavy: pick(heavy_side),
        light: pick(!heavy_side),
        e_k: Energy(one.abs_diff(zero)),
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AuxiliaryInstance {
    /// Position `k − 1` holds `E_k`; zeros allowed.
    pub instance: Instance,
    /// Sub-problem index per position.
    pub provenance: Vec<usize>,
}

pub fn build_auxiliary(subs: &[SubSolution]) -> Result<AuxiliaryInstance> {
    if subs.is_empty() {
        return Err(Error::InvalidArgument("no sub-solutions to merge".into()));
    }
    let errors: Vec<u64> = subs.iter().map(|s| s.e_k.value()).collect();
    Ok(AuxiliaryInstance {
        instance: Instance::with_zero_weights(errors)?,
        provenance: subs.iter().map(|s| s.k).collect(),
    })
}

/// Builds `Â`, where `aux_set` holds the sub-problem indices whose heavy side
/// joins `Â`.
pub fn reconstruct(n: usize, subs: &[SubSolution], aux_set: &[usize]) -> Result<Partition> {
    let m = subs.len();
    let mut chosen = vec![false; m + 1];
    for &k in aux_set {
        if k < 1 || k > m {
            return Err(Error::InvalidArgument(format!(
                "auxiliary index {k} outside [1, {m}]"
            )));
        }
        chosen[k] = true;
    }
    let mut side = vec![None; n];
    for sub in subs {
        let (into_a, out) = if chosen[sub.k] {
            (&sub.heavy, &sub.light)
        } else {
            (&sub.light, &sub.heavy)
        };
        for (&i, value) in into_a.iter().map(|i| (i, true)).chain(out.iter().map(|i| (i, false))) {
            let slot = side.get_mut(i).ok_or(Error::LengthMismatch {
                expected: n,
                found: i + 1,
            })?;
            if slot.replace(value).is_some() {
                return Err(Error::InvalidArgument(format!("index {i} assigned twice")));
            }
        }
    }
    side.into_iter()
        .enumerate()
        .map(|(i, s)| s.ok_or_else(|| Error::InvalidArgument(format!("index {i} not covered"))))
        .collect::<Result<Vec<_>>>()
        .map(Partition::from_sides)
}

/// `|Σ_k ±E_k|` with `−` for members of `aux_set`.
pub fn signed_error(subs: &[SubSolution], aux_set: &[usize]) -> u64 {
    let total: i128 = subs
        .iter()
        .map(|s| {
            let e = s.e_k.value() as i128;
            if aux_set.contains(&s.k) {
                -e
            } else {
                e
            }
        })
        .sum();
    total.unsigned_abs() as u64
}

/// How to choose the decomposing vector.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    /// Balanced random split into `m` sub-problems.
    Count(usize),
    /// Balanced random split into `⌊n / N⌋` sub-problems.
    SubSize(usize),
    Vector(DecomposingVector),
}

impl Split {
    pub fn sub_size(&self) -> Option<usize> {
        match self {
            Split::SubSize(size) => Some(*size),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageTiming {
    pub backend_us: u64,
    pub wall_us: u64,
    pub work: u64,
}

impl StageTiming {
    fn of(r: &SolveResult) -> Self {
        Self {
            backend_us: r.backend_time.as_micros() as u64,
            wall_us: r.wall_time.as_micros() as u64,
            work: r.work,
        }
    }
}

/// Sequential figures sum the sub-problem stages; parallel figures take the
/// slowest sub-problem. Both add the auxiliary stage.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PipelineTimings {
    pub sequential_backend: u64,
    pub parallel_backend: u64,
    pub sequential_total: u64,
    pub parallel_total: u64,
    pub sequential_work: u64,
    pub parallel_work: u64,
    /// Measured end-to-end time of the run.
    pub wall: u64,
    pub aux: StageTiming,
}

impl PipelineTimings {
    fn account(subs: &[StageTiming], aux: StageTiming, wall: Duration) -> Self {
        let sum = |f: fn(&StageTiming) -> u64| subs.iter().map(f).sum::<u64>();
        let max = |f: fn(&StageTiming) -> u64| subs.iter().map(f).max().unwrap_or(0);
        Self {
            sequential_backend: sum(|s| s.backend_us) + aux.backend_us,
            parallel_backend: max(|s| s.backend_us) + aux.backend_us,
            sequential_total: sum(|s| s.wall_us) + aux.wall_us,
            parallel_total: max(|s| s.wall_us) + aux.wall_us,
            sequential_work: sum(|s| s.work) + aux.work,
            parallel_work: max(|s| s.work) + aux.work,
            wall: wall.as_micros() as u64,
            aux,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PipelineSeeds {
    pub master: u64,
    pub vector: Option<u64>,
    pub sub: Vec<u64>,
    pub aux: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PerSub {
    pub k: usize,
    pub e_k: u64,
    pub heavy_indices: Vec<usize>,
    pub light_indices: Vec<usize>,
    pub timing: StageTiming,
}

#[derive(Clone, Debug)]
pub struct PipelineResult {
    pub a_hat: Partition,
    pub e_prime: Energy,
    pub vector: DecomposingVector,
    pub sub_size: Option<usize>,
    pub sub_solutions: Vec<SubSolution>,
    pub sub_timings: Vec<StageTiming>,
    /// Sub-problem indices on side 1 of the auxiliary solution.
    pub aux_partition: Vec<usize>,
    pub aux_energy: Energy,
    pub timings: PipelineTimings,
    pub seeds: PipelineSeeds,
    pub sub_solver: String,
    pub aux_solver: String,
}

impl PipelineResult {
    pub fn m(&self) -> usize {
        self.sub_solutions.len()
    }

    pub fn to_json(&self) -> PipelineResultJson {
        PipelineResultJson {
            e_prime: self.e_prime.value(),
            is_perfect: self.e_prime.is_perfect(),
            a_hat: self.a_hat.clone(),
            m: self.m(),
            sub_size: self.sub_size,
            vector: self.vector.labels().to_vec(),
            per_k: self
                .sub_solutions
                .iter()
                .zip(&self.sub_timings)
                .map(|(s, t)| PerSub {
                    k: s.k,
                    e_k: s.e_k.value(),
                    heavy_indices: s.heavy.clone(),
                    light_indices: s.light.clone(),
                    timing: t.clone(),
                })
                .collect(),
            aux_partition: self.aux_partition.clone(),
            timings: self.timings.clone(),
            seeds: self.seeds.clone(),
            sub_solver: self.sub_solver.clone(),
            aux_solver: self.aux_solver.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PipelineResultJson {
    pub e_prime: u64,
    pub is_perfect: bool,
    pub a_hat: Partition,
    pub m: usize,
    pub sub_size: Option<usize>,
    pub vector: Vec<usize>,
    pub per_k: Vec<PerSub>,
    pub aux_partition: Vec<usize>,
    pub timings: PipelineTimings,
    pub seeds: PipelineSeeds,
    pub sub_solver: String,
    pub aux_solver: String,
}

/// Solver roles and their configurations.
pub struct Pipeline<'a> {
    pub sub_solver: &'a dyn SubproblemSolver,
    pub aux_solver: &'a dyn SubproblemSolver,
    pub sub_config: SolverConfig,
    pub aux_config: SolverConfig,
    /// Strategy for fanning out the sub-problem solves.
    pub execution: Execution,
}

impl<'a> Pipeline<'a> {
    pub fn new(sub_solver: &'a dyn SubproblemSolver, aux_solver: &'a dyn SubproblemSolver) -> Self {
        Self {
            sub_solver,
            aux_solver,
            sub_config: SolverConfig::default(),
            aux_config: SolverConfig::default(),
            execution: Execution::default(),
        }
    }

    pub fn with_configs(mut self, sub: SolverConfig, aux: SolverConfig) -> Self {
        self.sub_config = sub;
        self.aux_config = aux;
        self
    }

    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }

    pub fn run(&self, instance: &Instance, split: &Split, seed: u64) -> Result<PipelineResult> {
        let start = Instant::now();
        let n = instance.len();
        let (vector, vector_seed) = match split {
            Split::Vector(v) => (v.clone(), None),
            Split::Count(m) => {
                let s = derive_seed(seed, STREAM_VECTOR, 0);
                (balanced_random_vector(n, *m, s)?, Some(s))
            }
            Split::SubSize(size) => {
                let s = derive_seed(seed, STREAM_VECTOR, 0);
                (balanced_random_vector(n, m_from_sub_size(n, *size)?, s)?, Some(s))
            }
        };
        let parts = decompose(instance, &vector)?;
        let m = parts.m();
        let sub_seeds: Vec<u64> = (1..=m as u64).map(|k| derive_seed(seed, STREAM_SUB, k)).collect();

        let solved = try_map_indexed(self.execution, m, |idx| {
            let k = idx + 1;
            let config = self.sub_config.with_seed(sub_seeds[idx]);
            let wrap = |e: Error| Error::Subproblem { k, source: Box::new(e) };
            let r = self.sub_solver.solve(&parts.subs[idx], &config).map_err(wrap)?;
            let oriented = orient(k, &parts.subs[idx], &parts.index_maps[idx], &r.partition).map_err(wrap)?;
            Ok::<_, Error>((oriented, StageTiming::of(&r)))
        })?;
        let (subs, sub_timings): (Vec<SubSolution>, Vec<StageTiming>) = solved.into_iter().unzip();

        let aux = build_auxiliary(&subs)?;
        let aux_seed = derive_seed(seed, STREAM_AUX, 0);
        let aux_result = self
            .aux_solver
            .solve(&aux.instance, &self.aux_config.with_seed(aux_seed))
            .map_err(|e| Error::Subproblem {
                k: 0,
                source: Box::new(e),
            })?;
        let aux_partition: Vec<usize> = aux_result
            .partition
            .subset()
            .into_iter()
            .map(|pos| aux.provenance[pos])
            .collect();

        let a_hat = reconstruct(n, &subs, &aux_partition)?;
        let e_prime = energy(instance, &a_hat)?;
        debug_assert_eq!(e_prime.value(), signed_error(&subs, &aux_partition));
        let timings = PipelineTimings::account(&sub_timings, StageTiming::of(&aux_result), start.elapsed());

        Ok(PipelineResult {
            a_hat,
            e_prime,
            vector,
            sub_size: split.sub_size(),
            sub_solutions: subs,
            sub_timings,
            aux_partition,
            aux_energy: aux_result.energy,
            timings,
            seeds: PipelineSeeds {
                master: seed,
                vector: vector_seed,
                sub: sub_seeds,
                aux: aux_seed,
            },
            sub_solver: self.sub_solver.id(),
            aux_solver: self.aux_solver.id(),
        })
    }
}

pub fn run_pipeline(
    instance: &Instance,
    split: &Split,
    sub_solver: &dyn SubproblemSolver,
    aux_solver: &dyn SubproblemSolver,
    seed: u64,
) -> Result<PipelineResult> {
    Pipeline::new(sub_solver, aux_solver).run(instance, split, seed)
}

/// Pipeline exposed through the single-solver contract, e.g. to nest it or
/// compare it with the other solvers.
pub struct PipelineSolver<S, A> {
    pub sub_solver: S,
    pub aux_solver: A,
    pub aux_config: Option<SolverConfig>,
    pub split: Split,
}

impl<S: SubproblemSolver, A: SubproblemSolver> SubproblemSolver for PipelineSolver<S, A> {
    fn id(&self) -> String {
        format!("pipeline({},{})", self.sub_solver.id(), self.aux_solver.id())
    }

    fn is_deterministic(&self) -> bool {
        false
    }

    fn solve(&self, instance: &Instance, config: &SolverConfig) -> Result<SolveResult> {
        let start = Instant::now();
        let aux_config = self.aux_config.clone().unwrap_or_else(|| config.clone());
        let r = Pipeline::new(&self.sub_solver, &self.aux_solver)
            .with_configs(config.clone(), aux_config)
            .with_execution(config.execution)
            .run(instance, &self.split, config.seed)?;
        SolveResult::new(
            instance,
            r.a_hat,
            self.id(),
            Duration::from_micros(r.timings.sequential_backend),
            start.elapsed(),
            1,
            r.timings.sequential_work,
        )
    }
}
