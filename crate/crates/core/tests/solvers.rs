mod common;

use proptest::prelude::*;

use common::{brute_min, example, quadratic_form, random_instance};
use npp::qubo::{build_npp_qubo, qubo_energy};
use npp::solvers::{solve_exact, solve_greedy, solve_ldm, solve_sa};
use npp::{energy, Execution, Instance, Partition, SolverConfig};

fn sa(seed: u64, reads: usize) -> SolverConfig {
    SolverConfig {
        seed,
        num_reads: reads,
        ..SolverConfig::default()
    }
}

#[test]
fn sa_finds_example_optimum() {
    let w = example();
    let hits = (0..100)
        .filter(|&seed| {
            let c = SolverConfig {
                num_sweeps: 100,
                ..sa(seed, 10)
            };
            solve_sa(&w, &c).unwrap().energy.value() == 0
        })
        .count();
    assert!(hits >= 95, "{hits}/100");
}

#[test]
fn sa_matches_exact_at_sixteen() {
    let cases = 50;
    let hits = (0..cases)
        .filter(|&seed| {
            let w = random_instance(1000 + seed, 16, 1000);
            let best = solve_exact(&w).unwrap().energy;
            solve_sa(&w, &sa(seed, 20)).unwrap().energy == best
        })
        .count();
    assert!(hits * 10 >= cases as usize * 9, "{hits}/{cases}");
}

#[test]
fn qubo_minimisers_are_optimal_partitions() {
    for seed in 0..4 {
        let w = random_instance(seed, 16, 200);
        let q = build_npp_qubo(&w);
        let mut best = (i64::MAX, Vec::new());
        let mut optimal = Vec::new();
        let min = brute_min(w.weights());
        for mask in 0u32..1 << 16 {
            let x: Vec<bool> = (0..16).map(|i| mask >> i & 1 == 1).collect();
            let p = Partition::from_sides(x.clone());
            let e = qubo_energy(&q, &p).unwrap();
            assert_eq!(e as i128, quadratic_form(w.weights(), &x));
            if e < best.0 {
                best = (e, vec![mask]);
            } else if e == best.0 {
                best.1.push(mask);
            }
            if energy(&w, &p).unwrap().value() == min {
                optimal.push(mask);
            }
        }
        assert_eq!(best.1, optimal, "seed {seed}");
    }
}

#[test]
fn more_reads_never_hurt() {
    let w = random_instance(77, 40, 10_000);
    for seed in 0..5 {
        let energies: Vec<u64> = [1, 2, 5, 10, 20]
            .iter()
            .map(|&r| {
                let c = SolverConfig {
                    num_sweeps: 200,
                    ..sa(seed, r)
                };
                solve_sa(&w, &c).unwrap().energy.value()
            })
            .collect();
        assert!(energies.windows(2).all(|p| p[1] <= p[0]), "{energies:?}");
    }
}

#[test]
fn sa_is_reproducible() {
    let w = random_instance(5, 64, 5000);
    let c = SolverConfig {
        num_reads: 16,
        num_sweeps: 300,
        ..sa(42, 16)
    };
    let a = solve_sa(&w, &c).unwrap();
    let b = solve_sa(&w, &c).unwrap();
    assert_eq!((a.partition.clone(), a.energy), (b.partition, b.energy));
    let s = solve_sa(&w, &SolverConfig { execution: Execution::Sequential, ..c.clone() }).unwrap();
    assert_eq!((a.partition, a.energy), (s.partition, s.energy));
    let other = solve_sa(&w, &c.with_seed(43)).unwrap();
    assert_eq!(other.reads_performed, 16);
}

#[test]
fn deterministic_solvers_are_stable() {
    let w = random_instance(9, 30, 1 << 20);
    for solve in [solve_exact, solve_greedy, solve_ldm] {
        let a = solve(&w).unwrap();
        assert_eq!(a.partition, solve(&w).unwrap().partition);
    }
}

#[test]
fn ldm_and_greedy_handle_pathological_example() {
    let w = Instance::new(vec![3000, 3000, 2000, 2000, 2000]).unwrap();
    assert_eq!(solve_ldm(&w).unwrap().energy.value(), 2000);
    assert_eq!(solve_exact(&w).unwrap().energy.value(), 0);
    assert_eq!(brute_min(w.weights()), 0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn exact_is_optimal_and_dominates(w in prop::collection::vec(1u64..5000, 1..=18), seed in 0u64..1000) {
        let inst = Instance::new(w.clone()).unwrap();
        let best = solve_exact(&inst).unwrap();
        prop_assert_eq!(best.energy.value(), brute_min(&w));
        prop_assert_eq!(energy(&inst, &best.partition).unwrap(), best.energy);
        let quick = SolverConfig { num_reads: 4, num_sweeps: 50, ..sa(seed, 4) };
        for other in [solve_greedy(&inst).unwrap(), solve_ldm(&inst).unwrap(), solve_sa(&inst, &quick).unwrap()] {
            prop_assert!(best.energy <= other.energy);
            prop_assert_eq!(energy(&inst, &other.partition).unwrap(), other.energy);
        }
    }

    #[test]
    fn heuristics_stay_within_largest_weight(w in prop::collection::vec(1u64..1_000_000, 1..200)) {
        let inst = Instance::new(w.clone()).unwrap();
        let max = *w.iter().max().unwrap();
        for r in [solve_greedy(&inst).unwrap(), solve_ldm(&inst).unwrap()] {
            prop_assert!(r.energy.value() <= max);
            prop_assert_eq!(r.energy.value() % 2, inst.total() % 2);
        }
    }
}
