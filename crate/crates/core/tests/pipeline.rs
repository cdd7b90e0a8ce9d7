mod common;

use proptest::prelude::*;

use common::{brute_min, example, min_signed_sum, random_instance};
use npp::analysis::pathological_instance;
use npp::decompose::DecomposingVector;
use npp::merge::{run_pipeline, signed_error, Pipeline, PipelineResult, Split};
use npp::solvers::{solve_exact, AnnealSolver, ExactSolver, GreedySolver, LdmSolver};
use npp::{energy, Execution, Instance, SolverConfig, SubproblemSolver};

fn check_structure(w: &Instance, r: &PipelineResult) {
    assert_eq!(r.a_hat.len(), w.len());
    assert_eq!(energy(w, &r.a_hat).unwrap(), r.e_prime);
    assert_eq!(r.e_prime.value(), signed_error(&r.sub_solutions, &r.aux_partition));
    let mut seen = vec![false; w.len()];
    for s in &r.sub_solutions {
        let sum = |idx: &[usize]| idx.iter().map(|&i| w.weight(i)).sum::<u64>();
        assert!(sum(&s.heavy) >= sum(&s.light));
        assert_eq!(sum(&s.heavy) - sum(&s.light), s.e_k.value());
        for &i in s.heavy.iter().chain(&s.light) {
            assert!(!seen[i]);
            seen[i] = true;
        }
    }
    assert!(seen.into_iter().all(|v| v));

    let t = &r.timings;
    let subs: Vec<u64> = r.sub_timings.iter().map(|s| s.backend_us).collect();
    assert_eq!(t.parallel_backend, subs.iter().max().unwrap() + t.aux.backend_us);
    assert_eq!(t.sequential_backend, subs.iter().sum::<u64>() + t.aux.backend_us);
    assert!(t.parallel_backend <= t.sequential_backend);
    assert!(t.parallel_total <= t.sequential_total);
}

#[test]
fn worked_example() {
    let w = example();
    let v = DecomposingVector::parse("1,1,1,2,2,2").unwrap();
    let r = run_pipeline(&w, &Split::Vector(v), &ExactSolver, &ExactSolver, 7).unwrap();
    assert_eq!(r.e_prime.value(), 2);
    let errors: Vec<u64> = r.sub_solutions.iter().map(|s| s.e_k.value()).collect();
    assert_eq!(errors, vec![1, 3]);
    check_structure(&w, &r);
}

#[test]
fn merge_is_optimal_over_sign_vectors() {
    let subs: [&dyn SubproblemSolver; 3] = [&ExactSolver, &GreedySolver, &LdmSolver];
    for case in 0..100u64 {
        let m = 1 + (case as usize % 16);
        let n = m * (1 + case as usize % 4) + case as usize % 3;
        let w = random_instance(case, n, 10_000);
        let r = run_pipeline(&w, &Split::Count(m), subs[case as usize % 3], &ExactSolver, case).unwrap();
        let errors: Vec<u64> = r.sub_solutions.iter().map(|s| s.e_k.value()).collect();
        assert_eq!(r.e_prime.value(), min_signed_sum(&errors), "case {case}");
        check_structure(&w, &r);
    }
}

#[test]
fn decomposition_loses_pathological_optimum() {
    for n in [8, 10, 12] {
        let w = pathological_instance(n).unwrap();
        let best = solve_exact(&w).unwrap().energy;
        assert_eq!(best.value(), brute_min(w.weights()));
        for seed in 0..20 {
            let r = run_pipeline(&w, &Split::Count(2), &ExactSolver, &ExactSolver, seed).unwrap();
            assert!(r.e_prime > best, "n = {n}, seed = {seed}");
        }
    }
}

#[test]
fn singleton_groups_reduce_to_the_auxiliary_problem() {
    for seed in 0..10 {
        let w = random_instance(seed, 14, 500);
        let r = run_pipeline(&w, &Split::Count(14), &LdmSolver, &ExactSolver, seed).unwrap();
        assert_eq!(r.e_prime.value(), brute_min(w.weights()));
    }
}

#[test]
fn seeds_and_execution() {
    let w = random_instance(3, 200, 2000);
    let config = SolverConfig {
        num_reads: 8,
        num_sweeps: 200,
        ..SolverConfig::default()
    };
    let run = |exec, seed| {
        Pipeline::new(&AnnealSolver, &AnnealSolver)
            .with_configs(config.clone(), config.clone())
            .with_execution(exec)
            .run(&w, &Split::SubSize(20), seed)
            .unwrap()
    };
    let a = run(Execution::Parallel, 5);
    let b = run(Execution::Sequential, 5);
    assert_eq!(a.a_hat, b.a_hat);
    assert_eq!(a.vector, b.vector);
    assert_eq!(a.seeds, b.seeds);
    assert_eq!(a.m(), 10);
    check_structure(&w, &a);
    let c = run(Execution::Parallel, 6);
    assert_ne!(a.vector, c.vector);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pipeline_invariants(w in prop::collection::vec(1u64..100_000, 1..120), m in 1usize..12, seed in 0u64..1000) {
        let inst = Instance::new(w).unwrap();
        let m = m.min(inst.len());
        let r = run_pipeline(&inst, &Split::Count(m), &LdmSolver, &GreedySolver, seed).unwrap();
        prop_assert_eq!(r.m(), m);
        check_structure(&inst, &r);
        let again = run_pipeline(&inst, &Split::Count(m), &LdmSolver, &GreedySolver, seed).unwrap();
        prop_assert_eq!(again.a_hat, r.a_hat);
    }
}
