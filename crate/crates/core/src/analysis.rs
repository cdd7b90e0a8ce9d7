//! Perfect-solution counting.
//!
//! For weights drawn uniformly from `1..=λ` with an even total, a random
//! instance of size `n` has about `2ⁿ / λ` perfect assignments. Requiring a
//! sub-problem of size `n / m` to keep `S` perfect assignments gives
//! `m = n / log₂(λ·S)`, and `S ≥ 1` gives the bound `m ≤ n / log₂ λ`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::bench::{generate_instance, WeightRange};
use crate::parallel::{map_indexed, Execution};
use crate::seed::{derive_seed, STREAM_INSTANCE};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegimeParams {
    pub n: usize,
    pub lambda: u64,
    /// Desired perfect assignments per sub-problem.
    pub target_sub_solutions: f64,
}

impl RegimeParams {
    pub fn new(n: usize, lambda: u64, target_sub_solutions: f64) -> Result<Self> {
        if n < 1 {
            return Err(Error::InvalidArgument("n must be at least 1".into()));
        }
        if lambda < 2 {
            return Err(Error::InvalidArgument("lambda must be at least 2".into()));
        }
        if target_sub_solutions.is_nan() || target_sub_solutions < 0.0 {
            return Err(Error::InvalidArgument("target must be non-negative".into()));
        }
        Ok(Self {
            n,
            lambda,
            target_sub_solutions,
        })
    }
}

/// `2ⁿ/λ` as a base-2 logarithm, plus the plain value while it fits `f64`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerfectCount {
    pub log2: f64,
    pub value: Option<f64>,
}

pub fn expected_perfect_count(n: usize, lambda: u64) -> Result<PerfectCount> {
    RegimeParams::new(n, lambda, 0.0)?;
    let log2 = n as f64 - (lambda as f64).log2();
    let value = Some(log2.exp2()).filter(|v| v.is_finite());
    Ok(PerfectCount { log2, value })
}

/// `n / log₂(λ·target)`.
pub fn m_for_target(n: usize, lambda: u64, target: f64) -> Result<f64> {
    let p = RegimeParams::new(n, lambda, target)?;
    let product = p.lambda as f64 * p.target_sub_solutions;
    if product <= 1.0 {
        return Err(Error::Domain(format!(
            "lambda * target = {product} must exceed 1"
        )));
    }
    Ok(n as f64 / product.log2())
}

/// `⌊n / log₂ λ⌋`.
pub fn max_m_bound(n: usize, lambda: u64) -> Result<usize> {
    RegimeParams::new(n, lambda, 1.0)?;
    Ok((n as f64 / (lambda as f64).log2()).floor() as usize)
}

/// Largest `n` for which `{2¹, …, 2ⁿ}` has a squared total that fits `i64`.
pub const PATHOLOGICAL_MAX_N: usize = 30;

/// `{2¹, 2², …, 2ⁿ}`.
///
/// Every subset sum is distinct, the optimum is `2ⁿ` against the rest with
/// energy 2, and it is unique up to complement: any decomposition that puts
/// at least two elements in each group loses it.
pub fn pathological_instance(n: usize) -> Result<Instance> {
    if !(2..=PATHOLOGICAL_MAX_N).contains(&n) {
        return Err(Error::InvalidArgument(format!(
            "pathological family needs 2 <= n <= {PATHOLOGICAL_MAX_N}, got {n}"
        )));
    }
    Instance::new((1..=n as u32).map(|t| 1u64 << t).collect::<Vec<_>>())
}

pub const COUNT_MAX_N: usize = 24;

/// Counts `x ∈ {0,1}ⁿ` with energy 0, complements counted separately.
pub fn count_perfect_assignments(instance: &Instance) -> Result<u64> {
    count_perfect_assignments_with(instance, Execution::default())
}

pub fn count_perfect_assignments_with(instance: &Instance, execution: Execution) -> Result<u64> {
    let n = instance.len();
    if n > COUNT_MAX_N {
        return Err(Error::Capability {
            solver: "perfect-assignment count",
            bound: COUNT_MAX_N,
            n,
        });
    }
    if instance.total() % 2 == 1 {
        return Err(Error::Domain(
            "odd total: no assignment has energy 0".into(),
        ));
    }
    let w = instance.weights();
    // fix the top `high` bits per block, Gray-code walk the remaining ones
    let high = n.min(6);
    let low = n - high;
    let blocks = map_indexed(execution, 1 << high, |block| {
        let mut diff = -(instance.total() as i64);
        for b in 0..high {
            if block >> b & 1 == 1 {
                diff += 2 * w[low + b] as i64;
            }
        }
        let mut gray = 0u64;
        let mut count = u64::from(diff == 0);
        for step in 1u64..(1 << low) {
            let bit = step.trailing_zeros() as usize;
            gray ^= 1 << bit;
            if gray >> bit & 1 == 1 {
                diff += 2 * w[bit] as i64;
            } else {
                diff -= 2 * w[bit] as i64;
            }
            count += u64::from(diff == 0);
        }
        count
    });
    Ok(blocks.into_iter().sum())
}

/// Mean perfect-assignment count over random even-sum instances with
/// weights uniform in `1..=λ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalCount {
    pub instances: usize,
    pub seed: u64,
    pub counts: Vec<u64>,
    pub mean: f64,
}

pub fn empirical_perfect_count(n: usize, lambda: u64, instances: usize, seed: u64) -> Result<EmpiricalCount> {
    RegimeParams::new(n, lambda, 0.0)?;
    if instances == 0 {
        return Err(Error::InvalidArgument("need at least one instance".into()));
    }
    if n > COUNT_MAX_N {
        return Err(Error::Capability {
            solver: "perfect-assignment count",
            bound: COUNT_MAX_N,
            n,
        });
    }
    let range = WeightRange::new(1, lambda)?;
    let counts = (0..instances)
        .map(|i| {
            let inst = generate_instance(n, derive_seed(seed, STREAM_INSTANCE, i as u64), range, true)?;
            count_perfect_assignments(&inst)
        })
        .collect::<Result<Vec<_>>>()?;
    let mean = counts.iter().sum::<u64>() as f64 / instances as f64;
    Ok(EmpiricalCount {
        instances,
        seed,
        counts,
        mean,
    })
}

/// JSON printed by `npp analyze`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub n: usize,
    pub lambda: u64,
    pub target: f64,
    pub expected_perfect_log2: f64,
    pub expected_perfect: Option<f64>,
    /// Absent when `λ·target ≤ 1`.
    pub m_for_target: Option<f64>,
    pub max_m_bound: usize,
    pub empirical: Option<EmpiricalCount>,
}

/// The three formulas, plus an empirical count when `empirical` gives
/// `(instances, seed)`.
pub fn analyze(n: usize, lambda: u64, target: f64, empirical: Option<(usize, u64)>) -> Result<AnalysisReport> {
    RegimeParams::new(n, lambda, target)?;
    let expected = expected_perfect_count(n, lambda)?;
    let m = match m_for_target(n, lambda, target) {
        Ok(m) => Some(m),
        Err(Error::Domain(_)) => None,
        Err(e) => return Err(e),
    };
    Ok(AnalysisReport {
        n,
        lambda,
        target,
        expected_perfect_log2: expected.log2,
        expected_perfect: expected.value,
        m_for_target: m,
        max_m_bound: max_m_bound(n, lambda)?,
        empirical: empirical
            .map(|(instances, seed)| empirical_perfect_count(n, lambda, instances, seed))
            .transpose()?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solvers::{enumerate_optimum, solve_exact};

    #[test]
    fn expected_count_examples() {
        let c = expected_perfect_count(1, 2).unwrap();
        assert_eq!((c.log2, c.value), (0.0, Some(1.0)));
        assert_eq!(expected_perfect_count(20, 16).unwrap().value, Some(65536.0));
        let c = expected_perfect_count(500, 5000).unwrap();
        assert!((c.log2 - 487.712).abs() < 1e-3, "{}", c.log2);
        assert!(c.value.unwrap() > 1e146);
        assert!(expected_perfect_count(2000, 2).unwrap().value.is_none());
        assert!(expected_perfect_count(10, 1).is_err());
    }

    #[test]
    fn expected_count_monotone() {
        for n in 1..80 {
            for lambda in [2u64, 3, 17, 5000] {
                let a = expected_perfect_count(n, lambda).unwrap().log2;
                assert!(expected_perfect_count(n + 1, lambda).unwrap().log2 > a);
                assert!(expected_perfect_count(n, lambda + 1).unwrap().log2 < a);
            }
        }
    }

    #[test]
    fn m_for_target_examples() {
        let base = m_for_target(500, 5000, 1.0).unwrap();
        assert!((base - 500.0 / 5000f64.log2()).abs() < 1e-12);
        assert!((base - 40.69).abs() < 0.005, "{base}");
        assert!((m_for_target(20, 16, 16.0).unwrap() - 2.5).abs() < 1e-12);
        assert!(matches!(m_for_target(20, 16, 0.0625), Err(Error::Domain(_))));
        assert!(matches!(m_for_target(20, 16, 0.01), Err(Error::Domain(_))));
    }

    #[test]
    fn max_m_examples() {
        assert_eq!(max_m_bound(500, 5000).unwrap(), 40);
        assert_eq!(max_m_bound(37, 2).unwrap(), 37);
        assert_eq!(max_m_bound(1200, 12000).unwrap(), 88);
        assert_eq!(max_m_bound(20, 16).unwrap(), 5);
    }

    #[test]
    fn bound_agrees_with_target_form() {
        for n in [1usize, 7, 64, 500, 1200, 10_000] {
            for lambda in [2u64, 3, 16, 1000, 5000, 12_000, 1 << 20] {
                let m = m_for_target(n, lambda, 1.0).unwrap();
                assert_eq!(max_m_bound(n, lambda).unwrap(), m.floor() as usize);
            }
        }
    }

    #[test]
    fn pathological_examples() {
        assert_eq!(pathological_instance(3).unwrap().weights(), &[2, 4, 8]);
        assert_eq!(solve_exact(&pathological_instance(3).unwrap()).unwrap().energy.value(), 2);
        assert_eq!(pathological_instance(2).unwrap().weights(), &[2, 4]);
        let w = pathological_instance(10).unwrap();
        assert!(w.weights().windows(2).all(|p| p[0] < p[1]));
        assert_eq!(w.len(), 10);
        assert!(pathological_instance(1).is_err());
        assert!(pathological_instance(31).is_err());
        assert!(pathological_instance(PATHOLOGICAL_MAX_N).is_ok());
    }

    #[test]
    fn pathological_optimum_is_two() {
        for n in 2..=20 {
            let w = pathological_instance(n).unwrap();
            assert_eq!(solve_exact(&w).unwrap().energy.value(), 2, "n = {n}");
        }
    }

    #[test]
    fn perfect_count_examples() {
        let count = |w: &[u64]| count_perfect_assignments(&Instance::new(w.to_vec()).unwrap());
        assert_eq!(count(&[1, 1]).unwrap(), 2);
        assert_eq!(count(&[1, 2, 3]).unwrap(), 2);
        assert_eq!(count(&[2, 4, 8]).unwrap(), 0);
        assert!(matches!(count(&[1, 2]), Err(Error::Domain(_))));
        assert!(count(&[2; 25]).is_err());
    }

    #[test]
    fn perfect_count_matches_naive_enumeration() {
        for seed in 0..20u64 {
            let mut w: Vec<u64> = (0..14).map(|i| (seed * 31 + i * 17) % 23 + 1).collect();
            if w.iter().sum::<u64>() % 2 == 1 {
                w[0] += 1;
            }
            let inst = Instance::new(w.clone()).unwrap();
            let naive = (0u32..1 << w.len())
                .filter(|mask| {
                    let a: u64 = (0..w.len()).filter(|i| mask >> i & 1 == 1).map(|i| w[i]).sum();
                    2 * a == inst.total()
                })
                .count() as u64;
            let seq = count_perfect_assignments_with(&inst, Execution::Sequential).unwrap();
            let par = count_perfect_assignments_with(&inst, Execution::Parallel).unwrap();
            assert_eq!((seq, par), (naive, naive));
            assert_eq!(naive > 0, enumerate_optimum(&inst).unwrap().1 == 0);
        }
    }

    #[test]
    fn report_and_empirical() {
        let r = analyze(20, 16, 1.0, Some((4, 1))).unwrap();
        assert_eq!(r.max_m_bound, 5);
        assert_eq!(r.expected_perfect, Some(65536.0));
        let e = r.empirical.unwrap();
        assert_eq!(e.counts.len(), 4);
        assert_eq!(e, empirical_perfect_count(20, 16, 4, 1).unwrap());
        assert!(e.counts.iter().all(|&c| c > 0 && c % 2 == 0));
        assert_eq!(analyze(20, 16, 0.01, None).unwrap().m_for_target, None);
        assert!(empirical_perfect_count(30, 16, 1, 0).is_err());
    }
}
