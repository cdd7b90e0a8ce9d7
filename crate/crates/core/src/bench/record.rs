use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::Result;

pub const CSV_HEADER: [&str; 12] = [
    "n",
    "instance_id",
    "solver",
    "run",
    "energy",
    "is_perfect",
    "m",
    "sub_size",
    "backend_us",
    "parallel_backend_us",
    "wall_us",
    "seed",
];

/// One solver run on one instance.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunRecord {
    pub n: usize,
    pub instance_id: usize,
    pub instance_seed: u64,
    pub solver: String,
    pub run: usize,
    /// `None` on error rows.
    pub energy: Option<u64>,
    pub is_perfect: Option<bool>,
    pub m: Option<usize>,
    pub sub_size: Option<usize>,
    pub backend_us: u64,
    pub parallel_backend_us: u64,
    pub wall_us: u64,
    pub parallel_wall_us: u64,
    pub seed: u64,
    pub error: Option<String>,
}

impl RunRecord {
    pub fn is_error(&self) -> bool {
        self.energy.is_none()
    }
}

#[derive(Serialize, Deserialize)]
struct CsvRow {
    n: usize,
    instance_id: usize,
    solver: String,
    run: usize,
    energy: Option<u64>,
    is_perfect: Option<bool>,
    m: Option<usize>,
    sub_size: Option<usize>,
    backend_us: u64,
    parallel_backend_us: u64,
    wall_us: u64,
    seed: u64,
}

pub struct CsvSink<W: Write> {
    writer: csv::Writer<W>,
}

impl<W: Write> CsvSink<W> {
    pub fn new(out: W) -> Result<Self> {
        let mut writer = csv::WriterBuilder::new().has_headers(false).from_writer(out);
        writer.write_record(CSV_HEADER)?;
        Ok(Self { writer })
    }

    pub fn write(&mut self, r: &RunRecord) -> Result<()> {
        self.writer.serialize(CsvRow {
            n: r.n,
            instance_id: r.instance_id,
            solver: r.solver.clone(),
            run: r.run,
            energy: r.energy,
            is_perfect: r.is_perfect,
            m: r.m,
            sub_size: r.sub_size,
            backend_us: r.backend_us,
            parallel_backend_us: r.parallel_backend_us,
            wall_us: r.wall_us,
            seed: r.seed,
        })?;
        Ok(())
    }

    pub fn flush(&mut self) -> Result<()> {
        self.writer.flush()?;
        Ok(())
    }

    pub fn into_inner(self) -> Result<W> {
        self.writer
            .into_inner()
            .map_err(|e| crate::Error::Io(std::io::Error::other(e.to_string())))
    }
}

pub fn write_csv(records: &[RunRecord], out: impl Write) -> Result<()> {
    let mut sink = CsvSink::new(out)?;
    for r in records {
        sink.write(r)?;
    }
    sink.flush()
}

/// Reads rows in the run CSV schema, e.g. results produced by external
/// solvers. Columns absent from the schema are left at their defaults.
pub fn read_csv(input: impl Read) -> Result<Vec<RunRecord>> {
    let mut reader = csv::Reader::from_reader(input);
    reader
        .deserialize::<CsvRow>()
        .map(|row| {
            let row = row?;
            Ok(RunRecord {
                n: row.n,
                instance_id: row.instance_id,
                instance_seed: 0,
                solver: row.solver,
                run: row.run,
                energy: row.energy,
                is_perfect: row.is_perfect.or(row.energy.map(|e| e <= 1)),
                m: row.m,
                sub_size: row.sub_size,
                backend_us: row.backend_us,
                parallel_backend_us: row.parallel_backend_us,
                wall_us: row.wall_us,
                parallel_wall_us: row.wall_us,
                seed: row.seed,
                error: None,
            })
        })
        .collect()
}
