//! Experiment grid: instance generation, seeded solver runs, CSV records
//! and summaries.
//!
//! Every cell of the grid is identified by `(n, instance, solver, run)` and
//! its seed is derived from the master seed and that key alone, so the grid
//! can be executed by any number of workers and still yields the same rows
//! in the same order.

mod generate;
mod record;
mod summary;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{energy, Instance};
use crate::merge::{Pipeline, PipelineResultJson, PipelineSolver, Split};
use crate::parallel::{map_indexed, with_workers, Execution};
use crate::remote::RemoteSolver;
use crate::seed::{derive_seed, STREAM_INSTANCE, STREAM_RUN};
use crate::solvers::{
    AnnealSolver, BetaSchedule, ExactSolver, GreedySolver, LdmSolver, SolveResultJson, SolverConfig,
    SubproblemSolver,
};

pub use generate::{generate_instance, GeneratedInstance, WeightRange, WeightRule};
pub use record::{read_csv, write_csv, CsvSink, RunRecord, CSV_HEADER};
pub use summary::{quantile, summarize, write_summary_csv, SummaryRow};

/// What the timing columns hold.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimingMode {
    /// Microseconds of measured time.
    #[default]
    Measured,
    /// Deterministic work counts (flip attempts, subset sums, ...), which
    /// make the whole CSV reproducible byte for byte.
    Work,
}

/// Overrides on top of [`SolverConfig::default`].
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SaParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub num_reads: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub num_sweeps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta_max: Option<f64>,
}

impl SaParams {
    pub fn config(&self) -> SolverConfig {
        let mut c = SolverConfig::default();
        let beta = BetaSchedule::default();
        c.num_reads = self.num_reads.unwrap_or(c.num_reads);
        c.num_sweeps = self.num_sweeps.unwrap_or(c.num_sweeps);
        c.beta = BetaSchedule {
            beta_min: self.beta_min.unwrap_or(beta.beta_min),
            beta_max: self.beta_max.unwrap_or(beta.beta_max),
        };
        c
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SolverKind {
    Exact,
    Greedy,
    Ldm,
    Sa(SaParams),
    Remote {
        endpoint: String,
        #[serde(default)]
        params: SaParams,
    },
    Pipeline {
        sub: Box<SolverKind>,
        aux: Box<SolverKind>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        m: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        sub_size: Option<usize>,
    },
}

impl SolverKind {
    pub fn name(&self) -> String {
        match self {
            SolverKind::Exact => "exact".into(),
            SolverKind::Greedy => "greedy".into(),
            SolverKind::Ldm => "ldm".into(),
            SolverKind::Sa(_) => "sa".into(),
            SolverKind::Remote { .. } => "remote".into(),
            SolverKind::Pipeline { sub, aux, m, sub_size } => {
                let mut s = format!("pipeline-{}-{}", sub.name(), aux.name());
                if let Some(m) = m {
                    s.push_str(&format!("-m{m}"));
                }
                if let Some(size) = sub_size {
                    s.push_str(&format!("-{size}"));
                }
                s
            }
        }
    }

    pub fn is_deterministic(&self) -> bool {
        match self {
            SolverKind::Exact | SolverKind::Greedy | SolverKind::Ldm => true,
            SolverKind::Sa(_) | SolverKind::Remote { .. } => false,
            // the random decomposing vector
            SolverKind::Pipeline { .. } => false,
        }
    }

    /// Configuration the solver runs with, before seeding.
    pub fn config(&self) -> SolverConfig {
        match self {
            SolverKind::Sa(p) | SolverKind::Remote { params: p, .. } => p.config(),
            SolverKind::Pipeline { sub, .. } => sub.config(),
            _ => SolverConfig::default(),
        }
    }

    pub fn split(&self) -> Option<Result<Split>> {
        match self {
            SolverKind::Pipeline { m, sub_size, .. } => Some(match (m, sub_size) {
                (Some(m), None) => Ok(Split::Count(*m)),
                (None, Some(size)) => Ok(Split::SubSize(*size)),
                _ => Err(Error::InvalidArgument(
                    "pipeline needs exactly one of m and sub_size".into(),
                )),
            }),
            _ => None,
        }
    }

    /// Builds the solver behind [`SubproblemSolver`].
    pub fn build(&self) -> Result<Box<dyn SubproblemSolver>> {
        Ok(match self {
            SolverKind::Exact => Box::new(ExactSolver),
            SolverKind::Greedy => Box::new(GreedySolver),
            SolverKind::Ldm => Box::new(LdmSolver),
            SolverKind::Sa(_) => Box::new(AnnealSolver),
            SolverKind::Remote { endpoint, .. } => Box::new(RemoteSolver::new(endpoint.clone())),
            SolverKind::Pipeline { sub, aux, .. } => Box::new(PipelineSolver {
                sub_solver: sub.build()?,
                aux_solver: aux.build()?,
                aux_config: Some(aux.config()),
                split: self.split().expect("pipeline")?,
            }),
        })
    }

    fn validate(&self) -> Result<()> {
        self.config().validate()?;
        if let SolverKind::Pipeline { sub, aux, .. } = self {
            sub.validate()?;
            aux.validate()?;
            match self.split().expect("pipeline")? {
                Split::Count(0) | Split::SubSize(0) => {
                    return Err(Error::InvalidArgument("m and sub_size must be at least 1".into()))
                }
                _ => {}
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverEntry {
    /// Label used in the `solver` column; defaults to [`SolverKind::name`].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    #[serde(flatten)]
    pub kind: SolverKind,
}

impl SolverEntry {
    pub fn new(kind: SolverKind) -> Self {
        Self { id: None, kind }
    }

    pub fn named(id: impl Into<String>, kind: SolverKind) -> Self {
        Self {
            id: Some(id.into()),
            kind,
        }
    }

    pub fn label(&self) -> String {
        self.id.clone().unwrap_or_else(|| self.kind.name())
    }
}

fn default_n_values() -> Vec<usize> {
    vec![500, 675, 850, 1025, 1200]
}

fn default_instances() -> usize {
    10
}

fn default_runs() -> usize {
    5
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(default = "default_n_values")]
    pub n_values: Vec<usize>,
    #[serde(default = "default_instances")]
    pub instances_per_n: usize,
    /// Runs of each probabilistic solver; deterministic solvers run once.
    #[serde(default = "default_runs")]
    pub runs_per_solver: usize,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default)]
    pub weight_range: WeightRule,
    #[serde(default)]
    pub even_sum: bool,
    #[serde(default)]
    pub timing: TimingMode,
    #[serde(default)]
    pub solvers: Vec<SolverEntry>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            n_values: default_n_values(),
            instances_per_n: default_instances(),
            runs_per_solver: default_runs(),
            master_seed: 0,
            weight_range: WeightRule::default(),
            even_sum: false,
            timing: TimingMode::default(),
            solvers: Vec::new(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(m.into()));
        if self.n_values.is_empty() || self.n_values.contains(&0) {
            return bad("n_values must be non-empty and every n at least 1");
        }
        if self.instances_per_n == 0 || self.runs_per_solver == 0 {
            return bad("instances_per_n and runs_per_solver must be at least 1");
        }
        for &n in &self.n_values {
            let r = self.weight_range.range(n)?;
            if r.lo >= r.hi {
                return Err(Error::InvalidArgument(format!(
                    "weight range [{}, {}] for n = {n} must have lo < hi",
                    r.lo, r.hi
                )));
            }
        }
        let mut labels: Vec<String> = self.solvers.iter().map(SolverEntry::label).collect();
        labels.sort();
        if labels.windows(2).any(|w| w[0] == w[1]) {
            return bad("solver labels must be unique");
        }
        self.solvers.iter().try_for_each(|s| s.kind.validate())
    }

    pub fn runs_for(&self, solver: &SolverEntry) -> usize {
        if solver.kind.is_deterministic() {
            1
        } else {
            self.runs_per_solver
        }
    }

    /// Rows the grid produces.
    pub fn expected_rows(&self) -> usize {
        let per_instance: usize = self.solvers.iter().map(|s| self.runs_for(s)).sum();
        self.n_values.len() * self.instances_per_n * per_instance
    }

    pub fn instance_seed(&self, n: usize, instance_id: usize) -> u64 {
        let per_n = derive_seed(self.master_seed, STREAM_INSTANCE, n as u64);
        derive_seed(per_n, STREAM_INSTANCE, instance_id as u64)
    }
}

pub fn run_seed(instance_seed: u64, run: usize) -> u64 {
    derive_seed(instance_seed, STREAM_RUN, run as u64)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceEntry {
    pub n: usize,
    pub instance_id: usize,
    pub instance_seed: u64,
    pub lo: u64,
    pub hi: u64,
    pub total: u64,
}

/// Written before any run: enough to regenerate every instance and seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: String,
    pub config: ExperimentConfig,
    pub weight_rule: String,
    pub expected_rows: usize,
    pub instances: Vec<InstanceEntry>,
}

impl Manifest {
    pub fn new(config: &ExperimentConfig) -> Result<Self> {
        let mut instances = Vec::new();
        for &n in &config.n_values {
            let range = config.weight_range.range(n)?;
            for id in 0..config.instances_per_n {
                let seed = config.instance_seed(n, id);
                let inst = generate_instance(n, seed, range, config.even_sum)?;
                instances.push(InstanceEntry {
                    n,
                    instance_id: id,
                    instance_seed: seed,
                    lo: range.lo,
                    hi: range.hi,
                    total: inst.total(),
                });
            }
        }
        Ok(Self {
            version: env!("CARGO_PKG_VERSION").into(),
            config: config.clone(),
            weight_rule: config.weight_range.describe(),
            expected_rows: config.expected_rows(),
            instances,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DetailResult {
    Pipeline(Box<PipelineResultJson>),
    Solve(SolveResultJson),
    Error { error: String },
}

/// One line of the detail sidecar.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Detail {
    pub n: usize,
    pub instance_id: usize,
    pub solver: String,
    pub run: usize,
    pub seed: u64,
    pub result: DetailResult,
}

impl Detail {
    /// Partition stored with the row, if it succeeded.
    pub fn partition(&self) -> Option<&crate::Partition> {
        match &self.result {
            DetailResult::Pipeline(p) => Some(&p.a_hat),
            DetailResult::Solve(s) => Some(&s.partition),
            DetailResult::Error { .. } => None,
        }
    }
}

pub trait RecordSink {
    fn manifest(&mut self, manifest: &Manifest) -> Result<()>;
    fn record(&mut self, record: &RunRecord, detail: &Detail) -> Result<()>;
    fn finish(&mut self, _summary: &[SummaryRow]) -> Result<()> {
        Ok(())
    }
}

#[derive(Debug, Default)]
pub struct MemorySink {
    pub manifest: Option<Manifest>,
    pub records: Vec<RunRecord>,
    pub details: Vec<Detail>,
    pub summary: Vec<SummaryRow>,
}

impl RecordSink for MemorySink {
    fn manifest(&mut self, manifest: &Manifest) -> Result<()> {
        self.manifest = Some(manifest.clone());
        Ok(())
    }

    fn record(&mut self, record: &RunRecord, detail: &Detail) -> Result<()> {
        self.records.push(record.clone());
        self.details.push(detail.clone());
        Ok(())
    }

    fn finish(&mut self, summary: &[SummaryRow]) -> Result<()> {
        self.summary = summary.to_vec();
        Ok(())
    }
}

/// `manifest.json`, `runs.csv`, `details.jsonl` and `summary.csv` in one
/// directory. A grid without rows leaves only the manifest.
pub struct DirSink {
    dir: PathBuf,
    manifest_written: bool,
    csv: Option<CsvSink<BufWriter<File>>>,
    details: Option<BufWriter<File>>,
}

impl DirSink {
    pub const MANIFEST: &'static str = "manifest.json";
    pub const RUNS: &'static str = "runs.csv";
    pub const DETAILS: &'static str = "details.jsonl";
    pub const SUMMARY: &'static str = "summary.csv";

    pub fn create(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref().to_path_buf();
        std::fs::create_dir_all(&dir)?;
        Ok(Self {
            dir,
            manifest_written: false,
            csv: None,
            details: None,
        })
    }

    pub fn path(&self, file: &str) -> PathBuf {
        self.dir.join(file)
    }
}

impl RecordSink for DirSink {
    fn manifest(&mut self, manifest: &Manifest) -> Result<()> {
        let mut out = BufWriter::new(File::create(self.path(Self::MANIFEST))?);
        serde_json::to_writer_pretty(&mut out, manifest)?;
        out.write_all(b"\n")?;
        out.flush()?;
        self.manifest_written = true;
        Ok(())
    }

    fn record(&mut self, record: &RunRecord, detail: &Detail) -> Result<()> {
        if !self.manifest_written {
            return Err(Error::InvalidArgument("manifest must be written first".into()));
        }
        if self.csv.is_none() {
            self.csv = Some(CsvSink::new(BufWriter::new(File::create(self.path(Self::RUNS))?))?);
            self.details = Some(BufWriter::new(File::create(self.path(Self::DETAILS))?));
        }
        let (Some(csv), Some(details)) = (&mut self.csv, &mut self.details) else {
            unreachable!()
        };
        csv.write(record)?;
        serde_json::to_writer(&mut *details, detail)?;
        details.write_all(b"\n")?;
        Ok(())
    }

    fn finish(&mut self, summary: &[SummaryRow]) -> Result<()> {
        let (Some(c), Some(d)) = (&mut self.csv, &mut self.details) else {
            return Ok(());
        };
        c.flush()?;
        d.flush()?;
        write_summary_csv(summary, BufWriter::new(File::create(self.path(Self::SUMMARY))?))
    }
}

struct Cell<'a> {
    instance_id: usize,
    instance_seed: u64,
    instance: &'a Instance,
    solver: usize,
    run: usize,
}

fn micros(d: std::time::Duration) -> u64 {
    d.as_micros() as u64
}

fn run_cell(config: &ExperimentConfig, entry: &SolverEntry, n: usize, cell: &Cell) -> (RunRecord, Detail) {
    let seed = run_seed(cell.instance_seed, cell.run);
    let label = entry.label();
    let split = entry.kind.split();
    let mut record = RunRecord {
        n,
        instance_id: cell.instance_id,
        instance_seed: cell.instance_seed,
        solver: label.clone(),
        run: cell.run,
        energy: None,
        is_perfect: None,
        m: None,
        sub_size: split.as_ref().and_then(|s| s.as_ref().ok()).and_then(Split::sub_size),
        backend_us: 0,
        parallel_backend_us: 0,
        wall_us: 0,
        parallel_wall_us: 0,
        seed,
        error: None,
    };
    if let Some(Ok(Split::Count(m))) = &split {
        record.m = Some(*m);
    }
    let work = config.timing == TimingMode::Work;

    let outcome = (|| -> Result<(DetailResult, crate::Partition, u64)> {
        match &entry.kind {
            SolverKind::Pipeline { sub, aux, .. } => {
                let sub_solver = sub.build()?;
                let aux_solver = aux.build()?;
                let r = Pipeline::new(&*sub_solver, &*aux_solver)
                    .with_configs(sub.config(), aux.config())
                    .with_execution(Execution::Parallel)
                    .run(cell.instance, &split.expect("pipeline")?, seed)?;
                let t = &r.timings;
                record.m = Some(r.m());
                (record.backend_us, record.parallel_backend_us, record.wall_us, record.parallel_wall_us) = if work {
                    (t.sequential_work, t.parallel_work, t.sequential_work, t.parallel_work)
                } else {
                    (t.sequential_backend, t.parallel_backend, t.sequential_total, t.parallel_total)
                };
                let json = r.to_json();
                Ok((DetailResult::Pipeline(Box::new(json)), r.a_hat, r.e_prime.value()))
            }
            kind => {
                let solver = kind.build()?;
                let r = solver.solve(cell.instance, &kind.config().with_seed(seed))?;
                let (backend, wall) = if work {
                    (r.work, r.work)
                } else {
                    (micros(r.backend_time), micros(r.wall_time))
                };
                (record.backend_us, record.parallel_backend_us) = (backend, backend);
                (record.wall_us, record.parallel_wall_us) = (wall, wall);
                let json = r.to_json();
                Ok((DetailResult::Solve(json), r.partition, r.energy.value()))
            }
        }
    })();

    let checked = outcome.and_then(|(detail, partition, reported)| {
        let e = energy(cell.instance, &partition)?;
        if e.value() != reported {
            return Err(Error::InvalidArgument(format!(
                "reported energy {reported} differs from recomputed {}",
                e.value()
            )));
        }
        Ok((detail, e))
    });

    let result = match checked {
        Ok((detail, e)) => {
            record.energy = Some(e.value());
            record.is_perfect = Some(e.is_perfect());
            detail
        }
        Err(err) => {
            let message = err.to_string();
            record.backend_us = 0;
            record.parallel_backend_us = 0;
            record.wall_us = 0;
            record.parallel_wall_us = 0;
            record.error = Some(message.clone());
            DetailResult::Error { error: message }
        }
    };
    let detail = Detail {
        n,
        instance_id: cell.instance_id,
        solver: label,
        run: cell.run,
        seed,
        result,
    };
    (record, detail)
}

/// Runs the grid on a pool of `workers` threads, streaming each `n` block
/// of rows to `sink` in canonical order `(n, instance, solver, run)`.
///
/// Solver failures become error rows; only configuration and sink errors
/// abort the run.
pub fn run_experiment(config: &ExperimentConfig, workers: usize, sink: &mut dyn RecordSink) -> Result<Vec<RunRecord>> {
    config.validate()?;
    let manifest = Manifest::new(config)?;
    sink.manifest(&manifest)?;
    let mut all = Vec::with_capacity(config.expected_rows());
    if config.solvers.is_empty() {
        sink.finish(&[])?;
        return Ok(all);
    }

    for &n in &config.n_values {
        let range = config.weight_range.range(n)?;
        let seeds: Vec<u64> = (0..config.instances_per_n).map(|id| config.instance_seed(n, id)).collect();
        let instances = seeds
            .iter()
            .map(|&s| generate_instance(n, s, range, config.even_sum))
            .collect::<Result<Vec<_>>>()?;

        let mut cells = Vec::new();
        for (id, inst) in instances.iter().enumerate() {
            for (s, entry) in config.solvers.iter().enumerate() {
                for run in 0..config.runs_for(entry) {
                    cells.push(Cell {
                        instance_id: id,
                        instance_seed: seeds[id],
                        instance: inst,
                        solver: s,
                        run,
                    });
                }
            }
        }
        let rows = with_workers(workers, || {
            map_indexed(Execution::Parallel, cells.len(), |i| {
                let cell = &cells[i];
                run_cell(config, &config.solvers[cell.solver], n, cell)
            })
        });
        for (record, detail) in &rows {
            sink.record(record, detail)?;
        }
        all.extend(rows.into_iter().map(|(r, _)| r));
    }
    sink.finish(&summarize(&all))?;
    Ok(all)
}

/// Anything the command-line tool prints.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Ingested {
    Pipeline(PipelineResultJson),
    Solve(SolveResultJson),
    Analysis(crate::analysis::AnalysisReport),
    Instance(GeneratedInstance),
}

pub fn ingest_json(text: &str) -> Result<Ingested> {
    Ok(serde_json::from_str(text)?)
}
