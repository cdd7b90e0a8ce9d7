use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::record::RunRecord;

/// Energy distribution and mean timings for one `(n, solver)` group; the
/// timing columns mirror the backend/total and sequential/parallel split.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub n: usize,
    pub solver: String,
    pub runs: usize,
    pub errors: usize,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub mean: f64,
    pub fraction_perfect: f64,
    pub mean_backend_us: f64,
    pub mean_total_us: f64,
    pub mean_parallel_backend_us: f64,
    pub mean_parallel_total_us: f64,
}

/// Linear interpolation between order statistics; `sorted` must be sorted.
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, count) = values.fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
    if count == 0 {
        f64::NAN
    } else {
        sum / count as f64
    }
}

/// Groups by `(n, solver)` in ascending order. Error rows count towards
/// `errors` only; groups made only of errors report NaN statistics.
pub fn summarize(records: &[RunRecord]) -> Vec<SummaryRow> {
    let mut groups: BTreeMap<(usize, &str), Vec<&RunRecord>> = BTreeMap::new();
    for r in records {
        groups.entry((r.n, r.solver.as_str())).or_default().push(r);
    }
    groups
        .into_iter()
        .map(|((n, solver), rows)| {
            let ok: Vec<&RunRecord> = rows.iter().copied().filter(|r| !r.is_error()).collect();
            let mut energies: Vec<f64> = ok.iter().filter_map(|r| r.energy).map(|e| e as f64).collect();
            energies.sort_by(f64::total_cmp);
            let q = |p: f64| if energies.is_empty() { f64::NAN } else { quantile(&energies, p) };
            let perfect = ok.iter().filter(|r| r.is_perfect == Some(true)).count();
            SummaryRow {
                n,
                solver: solver.to_string(),
                runs: ok.len(),
                errors: rows.len() - ok.len(),
                min: q(0.0),
                q1: q(0.25),
                median: q(0.5),
                q3: q(0.75),
                max: q(1.0),
                mean: mean(energies.iter().copied()),
                fraction_perfect: if ok.is_empty() { f64::NAN } else { perfect as f64 / ok.len() as f64 },
                mean_backend_us: mean(ok.iter().map(|r| r.backend_us as f64)),
                mean_total_us: mean(ok.iter().map(|r| r.wall_us as f64)),
                mean_parallel_backend_us: mean(ok.iter().map(|r| r.parallel_backend_us as f64)),
                mean_parallel_total_us: mean(ok.iter().map(|r| r.parallel_wall_us as f64)),
            }
        })
        .collect()
}

pub fn write_summary_csv(rows: &[SummaryRow], out: impl std::io::Write) -> crate::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(solver: &str, energy: Option<u64>, backend: u64, parallel: u64) -> RunRecord {
        RunRecord {
            n: 10,
            instance_id: 0,
            instance_seed: 0,
            solver: solver.into(),
            run: 0,
            energy,
            is_perfect: energy.map(|e| e <= 1),
            m: None,
            sub_size: None,
            backend_us: backend,
            parallel_backend_us: parallel,
            wall_us: backend + 1,
            parallel_wall_us: parallel + 1,
            seed: 0,
            error: energy.is_none().then(|| "boom".to_string()),
        }
    }

    #[test]
    fn single_record_quantiles() {
        let s = summarize(&[rec("a", Some(7), 1, 1)]);
        let r = &s[0];
        assert_eq!([r.min, r.q1, r.median, r.q3, r.max, r.mean], [7.0; 6]);
    }

    #[test]
    fn order_statistics() {
        let recs: Vec<_> = [0, 0, 1, 2, 10].iter().map(|&e| rec("a", Some(e), 4, 2)).collect();
        let r = &summarize(&recs)[0];
        assert_eq!((r.min, r.q1, r.median, r.q3, r.max), (0.0, 0.0, 1.0, 2.0, 10.0));
        assert!((r.mean - 2.6).abs() < 1e-12);
        assert!((r.fraction_perfect - 0.6).abs() < 1e-12);
        assert!(r.mean_parallel_backend_us <= r.mean_backend_us);
        assert_eq!(quantile(&[1.0, 2.0], 0.5), 1.5);
    }

    #[test]
    fn groups_and_errors() {
        let recs = vec![rec("b", Some(3), 1, 1), rec("a", None, 0, 0), rec("a", Some(1), 1, 1)];
        let s = summarize(&recs);
        assert_eq!(s.iter().map(|r| r.solver.as_str()).collect::<Vec<_>>(), vec!["a", "b"]);
        assert_eq!((s[0].runs, s[0].errors), (1, 1));
        assert_eq!(s[0].median, 1.0);
    }
}
