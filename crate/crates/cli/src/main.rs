use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};

use npp::analysis::analyze;
use npp::bench::{
    generate_instance, read_csv, run_experiment, summarize, write_summary_csv, DirSink, ExperimentConfig,
    GeneratedInstance, WeightRange,
};
use npp::decompose::DecomposingVector;
use npp::merge::{Pipeline, Split};
use npp::parallel::{current_workers, with_workers};
use npp::remote::{RemoteSolver, SamplerServer};
use npp::solvers::{AnnealSolver, BetaSchedule, ExactSolver, GreedySolver, LdmSolver};
use npp::{Error, Execution, Instance, SolverConfig, SubproblemSolver};

#[derive(Parser)]
#[command(name = "npp", version, about = "Number partitioning solvers and experiment runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random instance.
    Gen(GenArgs),
    /// Solve an instance file (one weight per line).
    Solve(SolveArgs),
    /// Perfect-solution estimates for a weight regime.
    Analyze(AnalyzeArgs),
    /// Run an experiment grid from a JSON config.
    Bench(BenchArgs),
    /// Serve the sampler protocol backed by simulated annealing.
    ServeSampler(ServeArgs),
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Lower weight bound, default 5n.
    #[arg(long)]
    lo: Option<u64>,
    /// Upper weight bound, default 10n.
    #[arg(long)]
    hi: Option<u64>,
    #[arg(long)]
    even_sum: bool,
    /// Also write the weights as an instance file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SolverName {
    Exact,
    Greedy,
    Ldm,
    Sa,
    Pipeline,
    Remote,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum RoleSolver {
    Exact,
    Greedy,
    Ldm,
    Sa,
    Remote,
}

#[derive(Args)]
struct AnnealArgs {
    #[arg(long)]
    reads: Option<usize>,
    #[arg(long)]
    sweeps: Option<usize>,
    #[arg(long)]
    beta_min: Option<f64>,
    #[arg(long)]
    beta_max: Option<f64>,
    /// Stop starting new reads after this many milliseconds.
    #[arg(long)]
    time_budget_ms: Option<u64>,
}

impl AnnealArgs {
    fn config(&self, seed: u64, execution: Execution) -> SolverConfig {
        let d = SolverConfig::default();
        let beta = BetaSchedule::default();
        SolverConfig {
            seed,
            num_reads: self.reads.unwrap_or(d.num_reads),
            num_sweeps: self.sweeps.unwrap_or(d.num_sweeps),
            beta: BetaSchedule {
                beta_min: self.beta_min.unwrap_or(beta.beta_min),
                beta_max: self.beta_max.unwrap_or(beta.beta_max),
            },
            time_budget: self.time_budget_ms.map(Duration::from_millis),
            execution,
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    instance: PathBuf,
    #[arg(long, value_enum)]
    solver: SolverName,
    #[arg(long, value_enum, default_value = "sa")]
    sub_solver: RoleSolver,
    #[arg(long, value_enum, default_value = "sa")]
    aux_solver: RoleSolver,
    /// Number of sub-problems; checked against --vector when both are given.
    #[arg(long, conflicts_with = "sub_size")]
    m: Option<usize>,
    /// Target sub-problem size N, giving m = max(1, n / N).
    #[arg(long, conflicts_with = "vector")]
    sub_size: Option<usize>,
    /// Explicit 1-based decomposing vector, e.g. 1,1,2,2.
    #[arg(long)]
    vector: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    endpoint: Option<String>,
    /// Disable data-parallel execution.
    #[arg(long)]
    sequential: bool,
    #[command(flatten)]
    anneal: AnnealArgs,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    lambda: u64,
    /// Desired perfect solutions per sub-problem.
    #[arg(long, default_value_t = 1.0)]
    target: f64,
    /// Count perfect assignments on this many random instances (n <= 24).
    #[arg(long)]
    empirical: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct BenchArgs {
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    workers: Option<usize>,
    /// External result files in the run CSV schema to include in the summary.
    #[arg(long)]
    merge: Vec<PathBuf>,
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long, default_value_t = 0)]
    port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    host: String,
    #[command(flatten)]
    anneal: AnnealArgs,
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e.root() {
            Error::InvalidArgument(_) => 1,
            Error::Capability { .. } | Error::Domain(_) | Error::Overflow => 2,
            _ => 3,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: 1,
        message: message.into(),
    }
}

fn io(e: std::io::Error, what: &std::path::Path) -> Failure {
    Failure {
        code: 3,
        message: format!("{}: {e}", what.display()),
    }
}

fn print_json(value: &impl serde::Serialize) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Failure::from(Error::from(e)))?;
    println!("{text}");
    Ok(())
}

/// `NPP_WORKERS` caps every pool.
fn worker_cap() -> Result<Option<usize>, Failure> {
    match std::env::var("NPP_WORKERS") {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&w| w >= 1)
            .map(Some)
            .ok_or_else(|| usage(format!("NPP_WORKERS must be a positive integer, got {v:?}"))),
        Err(_) => Ok(None),
    }
}

fn workers(requested: Option<usize>) -> Result<usize, Failure> {
    let base = requested.unwrap_or_else(current_workers).max(1);
    Ok(match worker_cap()? {
        Some(cap) => base.min(cap),
        None => base,
    })
}

fn cmd_gen(a: GenArgs) -> Result<(), Failure> {
    let d = WeightRange::paper_default(a.n);
    let range = WeightRange::new(a.lo.unwrap_or(d.lo), a.hi.unwrap_or(d.hi))?;
    let instance = generate_instance(a.n, a.seed, range, a.even_sum)?;
    if let Some(path) = &a.out {
        std::fs::write(path, instance.to_text()).map_err(|e| io(e, path))?;
    }
    print_json(&GeneratedInstance::new(&instance, a.seed, range, a.even_sum))
}

fn role(name: RoleSolver, endpoint: Option<&str>) -> Result<Box<dyn SubproblemSolver>, Failure> {
    Ok(match name {
        RoleSolver::Exact => Box::new(ExactSolver),
        RoleSolver::Greedy => Box::new(GreedySolver),
        RoleSolver::Ldm => Box::new(LdmSolver),
        RoleSolver::Sa => Box::new(AnnealSolver),
        RoleSolver::Remote => {
            let endpoint = endpoint.ok_or_else(|| usage("the remote solver needs --endpoint"))?;
            Box::new(RemoteSolver::new(endpoint))
        }
    })
}

fn cmd_solve(a: SolveArgs) -> Result<(), Failure> {
    let instance = Instance::from_file(&a.instance).map_err(|e| match e {
        Error::Io(err) => io(err, &a.instance),
        other => other.into(),
    })?;
    let execution = if a.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    let config = a.anneal.config(a.seed, execution);
    let endpoint = a.endpoint.as_deref();
    let single = match a.solver {
        SolverName::Exact => Some(RoleSolver::Exact),
        SolverName::Greedy => Some(RoleSolver::Greedy),
        SolverName::Ldm => Some(RoleSolver::Ldm),
        SolverName::Sa => Some(RoleSolver::Sa),
        SolverName::Remote => Some(RoleSolver::Remote),
        SolverName::Pipeline => None,
    };
    if let Some(name) = single {
        let r = role(name, endpoint)?.solve(&instance, &config)?;
        return print_json(&r.to_json());
    }

    let split = match (a.m, a.sub_size, &a.vector) {
        (Some(m), None, None) => Split::Count(m),
        (None, Some(size), None) => Split::SubSize(size),
        (m, None, Some(v)) => {
            let v = DecomposingVector::parse(v)?;
            if m.is_some_and(|m| m != v.m()) {
                return Err(usage(format!("--m {} disagrees with --vector, which has m = {}", m.unwrap(), v.m())));
            }
            Split::Vector(v)
        }
        _ => return Err(usage("pipeline needs one of --m, --sub-size or --vector")),
    };
    let sub = role(a.sub_solver, endpoint)?;
    let aux = role(a.aux_solver, endpoint)?;
    let r = Pipeline::new(&*sub, &*aux)
        .with_configs(config.clone(), config)
        .with_execution(execution)
        .run(&instance, &split, a.seed)?;
    print_json(&r.to_json())
}

fn cmd_analyze(a: AnalyzeArgs) -> Result<(), Failure> {
    let empirical = a.empirical.map(|k| (k, a.seed));
    print_json(&analyze(a.n, a.lambda, a.target, empirical)?)
}

fn cmd_bench(a: BenchArgs) -> Result<(), Failure> {
    let text = std::fs::read_to_string(&a.config).map_err(|e| io(e, &a.config))?;
    let config = ExperimentConfig::from_json(&text).map_err(|e| match e {
        Error::Json(j) => usage(format!("{}: {j}", a.config.display())),
        other => other.into(),
    })?;
    let mut sink = DirSink::create(&a.out).map_err(|e| match e {
        Error::Io(err) => io(err, &a.out),
        other => other.into(),
    })?;
    let mut records = run_experiment(&config, workers(a.workers)?, &mut sink)?;
    let errors = records.iter().filter(|r| r.is_error()).count();
    let rows = records.len();
    for path in &a.merge {
        let file = File::open(path).map_err(|e| io(e, path))?;
        records.extend(read_csv(file)?);
    }
    let summary = summarize(&records);
    if !a.merge.is_empty() {
        let path = sink.path(DirSink::SUMMARY);
        let file = File::create(&path).map_err(|e| io(e, &path))?;
        write_summary_csv(&summary, BufWriter::new(file))?;
    }
    eprintln!("{rows} rows ({errors} errors) written to {}", a.out.display());
    print_json(&serde_json::json!({
        "out": a.out,
        "rows": rows,
        "errors": errors,
        "summary": summary,
    }))
}

fn cmd_serve(a: ServeArgs) -> Result<(), Failure> {
    let defaults = a.anneal.config(0, Execution::Parallel);
    defaults.validate()?;
    let server = SamplerServer::bind(&format!("{}:{}", a.host, a.port), defaults)?;
    println!("{}", serde_json::json!({ "url": server.url() }));
    server.serve();
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Bench(a) => cmd_bench(a),
        command => {
            let n = workers(None)?;
            with_workers(n, move || match command {
                Command::Gen(a) => cmd_gen(a),
                Command::Solve(a) => cmd_solve(a),
                Command::Analyze(a) => cmd_analyze(a),
                Command::ServeSampler(a) => cmd_serve(a),
                Command::Bench(_) => unreachable!(),
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
