//! Remote QUBO sampler: wire format, client solver and a loopback server.
//!
//! Request, `POST` with `content-type: application/json`:
//!
//! ```json
//! {"qubo": {"n": 3, "terms": [[0, 0, -5], [0, 1, 2], ...]}, "num_reads": 10, "seed": 7}
//! ```
//!
//! Response:
//!
//! ```json
//! {"samples": [{"x": [1, 0, 1], "energy": -9}, ...], "sampling_time_us": 1234}
//! ```
//!
//! `terms` lists the upper triangle of the symmetric matrix, diagonal
//! included, so `energy = Σ_i Q_ii·x_i + 2·Σ_{i<j} Q_ij·x_i·x_j`. The client
//! re-evaluates every sample locally and discards any that disagree.

use std::net::SocketAddr;
use std::sync::Arc;
use std::thread::JoinHandle;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::instance::{Instance, Partition};
use crate::parallel::WorkerPool;
use crate::qubo::{build_npp_qubo, qubo_energy, QuboJson, QuboMatrix};
use crate::solvers::anneal::anneal;
use crate::solvers::{SolveResult, SolverConfig, SubproblemSolver};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleRequest {
    pub qubo: QuboJson,
    pub num_reads: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sample {
    pub x: Vec<u8>,
    pub energy: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleResponse {
    pub samples: Vec<Sample>,
    pub sampling_time_us: u64,
}

#[derive(Clone, Debug)]
pub struct RemoteSolver {
    pub endpoint: String,
    pub timeout: Duration,
}

impl RemoteSolver {
    pub fn new(endpoint: impl Into<String>) -> Self {
        Self {
            endpoint: endpoint.into(),
            timeout: Duration::from_secs(300),
        }
    }
}

impl SubproblemSolver for RemoteSolver {
    fn id(&self) -> String {
        "remote".into()
    }

    fn is_deterministic(&self) -> bool {
        false
    }

    fn solve(&self, instance: &Instance, config: &SolverConfig) -> Result<SolveResult> {
        solve_with_timeout(&self.endpoint, instance, config, self.timeout)
    }
}

pub fn solve_remote(endpoint: &str, instance: &Instance, config: &SolverConfig) -> Result<SolveResult> {
    RemoteSolver::new(endpoint).solve(instance, config)
}

fn solve_with_timeout(
    endpoint: &str,
    instance: &Instance,
    config: &SolverConfig,
    timeout: Duration,
) -> Result<SolveResult> {
    config.validate()?;
    let start = Instant::now();
    let q = build_npp_qubo(instance);
    let request = SampleRequest {
        qubo: q.to_json(),
        num_reads: config.num_reads,
        seed: config.seed,
    };
    let agent = ureq::AgentBuilder::new().timeout(timeout).build();
    let sent = Instant::now();
    let response = agent
        .post(endpoint)
        .set("content-type", "application/json")
        .send_string(&serde_json::to_string(&request)?);
    let body = match response {
        Ok(r) => r
            .into_string()
            .map_err(|e| Error::Transport(format!("reading response: {e}")))?,
        Err(ureq::Error::Status(code, r)) => {
            let text = r.into_string().unwrap_or_default();
            return Err(Error::Protocol(format!("sampler answered HTTP {code}: {text}")));
        }
        Err(ureq::Error::Transport(t)) => return Err(Error::Transport(t.to_string())),
    };
    let round_trip = sent.elapsed();

    let (best, reads, sampling_us) = select_sample(&q, &body)?;
    let backend = sampling_us.map(Duration::from_micros).unwrap_or(round_trip);
    let work = (reads * instance.len()) as u64;
    SolveResult::new(instance, best, "remote", backend, start.elapsed(), reads, work)
}

/// Validates a response body and returns the lowest-energy valid sample
/// (earliest on ties), the number of valid samples and the reported
/// sampling time.
pub fn select_sample(q: &QuboMatrix, body: &str) -> Result<(Partition, usize, Option<u64>)> {
    let value: Value =
        serde_json::from_str(body).map_err(|e| Error::Protocol(format!("response is not JSON: {e}")))?;
    let samples = value
        .get("samples")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::Protocol("response has no \"samples\" array".into()))?;
    let sampling_us = match value.get("sampling_time_us") {
        None | Some(Value::Null) => None,
        Some(v) => Some(
            v.as_u64()
                .ok_or_else(|| Error::Protocol("sampling_time_us must be a non-negative integer".into()))?,
        ),
    };

    let mut best: Option<(i64, Partition)> = None;
    let mut valid = 0;
    let mut first_rejection = None;
    for (idx, sample) in samples.iter().enumerate() {
        match check_sample(q, sample) {
            Ok((energy, x)) => {
                valid += 1;
                if best.as_ref().is_none_or(|(e, _)| energy < *e) {
                    best = Some((energy, x));
                }
            }
            Err(reason) => {
                first_rejection.get_or_insert(format!("sample {idx}: {reason}"));
            }
        }
    }
    match best {
        Some((_, x)) => Ok((x, valid, sampling_us)),
        None => Err(Error::Protocol(format!(
            "all {} samples rejected{}",
            samples.len(),
            first_rejection.map(|r| format!(" ({r})")).unwrap_or_default()
        ))),
    }
}

fn check_sample(q: &QuboMatrix, sample: &Value) -> std::result::Result<(i64, Partition), String> {
    let x = sample
        .get("x")
        .and_then(Value::as_array)
        .ok_or("missing \"x\" array")?;
    if x.len() != q.dim() {
        return Err(format!("x has length {}, expected {}", x.len(), q.dim()));
    }
    let labels = x
        .iter()
        .map(|v| match v.as_u64() {
            Some(b @ (0 | 1)) => Ok(b as u8),
            _ => Err(format!("x entry {v} is not 0 or 1")),
        })
        .collect::<std::result::Result<Vec<u8>, String>>()?;
    let reported = sample.get("energy").ok_or("missing \"energy\"")?;
    let reported = reported
        .as_i64()
        .or_else(|| reported.as_f64().filter(|f| f.fract() == 0.0 && f.abs() < 9.0e18).map(|f| f as i64))
        .ok_or_else(|| format!("energy {reported} is not an integer"))?;
    let x = Partition::from_labels(&labels).map_err(|e| e.to_string())?;
    let local = qubo_energy(q, &x).map_err(|e| e.to_string())?;
    if local != reported {
        return Err(format!("reported energy {reported} but local evaluation gives {local}"));
    }
    Ok((local, x))
}

/// Answers one request body. Errors carry an HTTP status code.
pub fn handle_request(body: &str, defaults: &SolverConfig) -> std::result::Result<SampleResponse, (u16, String)> {
    let request: SampleRequest =
        serde_json::from_str(body).map_err(|e| (400, format!("malformed request: {e}")))?;
    if request.num_reads == 0 {
        return Err((400, "num_reads must be at least 1".into()));
    }
    let q = QuboMatrix::from_json(&request.qubo).map_err(|e| (400, e.to_string()))?;
    let config = SolverConfig {
        seed: request.seed,
        num_reads: request.num_reads,
        time_budget: None,
        ..defaults.clone()
    };
    let outcome = anneal(&q, &config).map_err(|e| match e {
        Error::InvalidArgument(_) => (400, e.to_string()),
        _ => (500, e.to_string()),
    })?;
    Ok(SampleResponse {
        samples: outcome
            .reads
            .into_iter()
            .map(|r| Sample {
                x: r.x.iter().map(|&b| b as u8).collect(),
                energy: r.energy,
            })
            .collect(),
        sampling_time_us: outcome.backend_time.as_micros() as u64,
    })
}

/// HTTP sampler backed by simulated annealing. The request carries seed and
/// read count; sweep count and beta schedule come from `defaults`.
pub struct SamplerServer {
    server: Arc<tiny_http::Server>,
    defaults: SolverConfig,
    threads: usize,
    // annealing runs here: a client blocked inside the global pool must not
    // starve the requests it is waiting on
    pool: Arc<WorkerPool>,
}

impl SamplerServer {
    pub fn bind(addr: &str, defaults: SolverConfig) -> Result<Self> {
        defaults.validate()?;
        let server = tiny_http::Server::http(addr)
            .map_err(|e| Error::Io(std::io::Error::other(format!("cannot bind {addr}: {e}"))))?;
        Ok(Self {
            server: Arc::new(server),
            defaults,
            threads: 4,
            pool: Arc::new(WorkerPool::new(
                std::thread::available_parallelism().map_or(1, |n| n.get()),
            )),
        })
    }

    pub fn local_addr(&self) -> SocketAddr {
        self.server
            .server_addr()
            .to_ip()
            .expect("sampler listens on TCP")
    }

    pub fn url(&self) -> String {
        format!("http://{}/sample", self.local_addr())
    }

    /// Serves until the server is unblocked.
    pub fn serve(&self) {
        std::thread::scope(|scope| {
            for _ in 0..self.threads {
                scope.spawn(|| {
                    while let Ok(request) = self.server.recv() {
                        respond(request, &self.defaults, &self.pool);
                    }
                });
            }
        });
    }

    /// Serves on background threads until the handle is dropped.
    pub fn spawn(self) -> ServerHandle {
        let url = self.url();
        let server = Arc::clone(&self.server);
        let threads = self.threads;
        let join = std::thread::spawn(move || self.serve());
        ServerHandle {
            url,
            server,
            threads,
            join: Some(join),
        }
    }
}

pub struct ServerHandle {
    pub url: String,
    server: Arc<tiny_http::Server>,
    threads: usize,
    join: Option<JoinHandle<()>>,
}

impl Drop for ServerHandle {
    fn drop(&mut self) {
        for _ in 0..self.threads {
            self.server.unblock();
        }
        if let Some(join) = self.join.take() {
            let _ = join.join();
        }
    }
}

fn respond(mut request: tiny_http::Request, defaults: &SolverConfig, pool: &WorkerPool) {
    let json = tiny_http::Header::from_bytes("content-type", "application/json").expect("static header");
    if *request.method() != tiny_http::Method::Post {
        let body = serde_json::json!({"error": "use POST"}).to_string();
        let _ = request.respond(tiny_http::Response::from_string(body).with_status_code(405).with_header(json));
        return;
    }
    let mut body = String::new();
    let (status, text) = match std::io::Read::read_to_string(request.as_reader(), &mut body) {
        Err(e) => (400, serde_json::json!({"error": format!("unreadable body: {e}")}).to_string()),
        Ok(_) => match pool.install(|| handle_request(&body, defaults)) {
            Ok(resp) => (200, serde_json::to_string(&resp).expect("response serializes")),
            Err((code, message)) => (code, serde_json::json!({"error": message}).to_string()),
        },
    };
    let _ = request.respond(tiny_http::Response::from_string(text).with_status_code(status).with_header(json));
}
