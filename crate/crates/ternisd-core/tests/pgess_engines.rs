use proptest::prelude::*;
use ternisd_core::instances::{brute_force_solutions, gen_doom, gen_sd};
use ternisd_core::pgess::{
    self, attempt, run, ss_to_ssnzc, ssnzc_to_ss, ssnzc_to_ss_coeffs, success_prob_log2, Budget, EngineStatus, PgessParams,
    PrangeEngine, Problem, SubsetSumEngine,
};
use ternisd_core::reps::RepEngine;
use ternisd_core::rng;
use ternisd_core::wagner::WagnerEngine;
use ternisd_core::TritVector;

fn combination(columns: &[TritVector], b: &TritVector, ell: usize) -> TritVector {
    let mut acc = TritVector::zeros(ell);
    for (i, x) in columns.iter().enumerate() {
        acc = acc.add(&x.scale(b.get(i))).unwrap();
    }
    acc
}

fn all_vectors(m: usize, alphabet: &[u8]) -> Vec<TritVector> {
    let base = alphabet.len();
    (0..base.pow(m as u32))
        .map(|mut x| {
            let t: Vec<u8> = (0..m)
                .map(|_| {
                    let d = alphabet[x % base];
                    x /= base;
                    d
                })
                .collect();
            TritVector::from_trits(&t).unwrap()
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn lemma_one_is_a_bijection(m in 1usize..=10, ell in 1usize..=4, seed in any::<u64>()) {
        let mut r = rng::stream(seed, "lemma-one");
        let columns: Vec<TritVector> = (0..m).map(|_| TritVector::random(ell, &mut r)).collect();
        let s = TritVector::random(ell, &mut r);
        let s2 = ssnzc_to_ss(&columns, &s);
        let ss: Vec<TritVector> = all_vectors(m, &[0, 1]).into_iter().filter(|b| combination(&columns, b, ell) == s2).collect();
        let mut nz: Vec<TritVector> = all_vectors(m, &[1, 2]).into_iter().filter(|b| combination(&columns, b, ell) == s).collect();
        prop_assert_eq!(ss.len(), nz.len());
        let mut mapped: Vec<TritVector> = ss.iter().map(ss_to_ssnzc).collect();
        mapped.sort();
        nz.sort();
        prop_assert_eq!(&mapped, &nz);
        for b in &nz {
            prop_assert_eq!(ss_to_ssnzc(&ssnzc_to_ss_coeffs(b)), b.clone());
        }
    }
}

/// Collects every engine output for one set of columns.
fn outputs(engine: &dyn SubsetSumEngine, columns: &[TritVector], targets: &[TritVector], seed: u64) -> Vec<(TritVector, usize)> {
    let mut out = Vec::new();
    let mut r = rng::stream(seed, "engine-test");
    let status = engine.solve(columns, targets, &mut r, &mut Budget::new(10_000_000), &mut |b, i| {
        out.push((b.clone(), i));
        false
    });
    assert_ne!(status, EngineStatus::BudgetExhausted);
    out
}

#[test]
fn engine_outputs_resum_to_their_target() {
    for seed in 0..30u64 {
        let mut r = rng::stream(seed, "engine-sound");
        let m = 12 + (seed as usize % 6);
        let ell = 3;
        let columns: Vec<TritVector> = (0..m).map(|_| TritVector::random(ell, &mut r)).collect();
        let targets: Vec<TritVector> = (0..3).map(|_| TritVector::random(ell, &mut r)).collect();
        let engines: Vec<(Box<dyn SubsetSumEngine>, usize)> = vec![
            (Box::new(PrangeEngine { p: m / 2, samples: 200 }), 3),
            (Box::new(WagnerEngine::new(2)), 3),
            (Box::new(RepEngine::new(2)), 1),
        ];
        for (engine, nt) in engines {
            for (b, idx) in outputs(engine.as_ref(), &columns, &targets[..nt], seed) {
                assert_eq!(b.weight(), engine.output_weight(m), "{}", engine.name());
                assert_eq!(combination(&columns, &b, ell), targets[idx], "{}", engine.name());
            }
        }
    }
}

#[test]
fn solve_loop_outputs_are_in_the_oracle_set() {
    for seed in 0..12u64 {
        let inst = gen_sd(16, 8, 14, seed).unwrap();
        let oracle = brute_force_solutions(&inst, usize::MAX).unwrap();
        let problem = Problem::sd(&inst);
        let cases: Vec<(Box<dyn SubsetSumEngine>, usize, usize)> = vec![
            (Box::new(PrangeEngine { p: 8, samples: 1 }), 0, 8),
            (Box::new(WagnerEngine::new(2)), 3, 11),
            (Box::new(RepEngine::new(1)), 3, 11),
        ];
        for (engine, ell, p) in cases {
            let params = PgessParams { ell, p, max_restarts: 3000, target_solutions_per_restart: 1 };
            let rep = run(&problem, &params, engine.as_ref(), seed, &mut Budget::new(100_000_000)).unwrap();
            let e = rep.solution.unwrap_or_else(|| panic!("{} failed on seed {seed}", engine.name()));
            assert!(inst.is_solution(&e));
            assert!(oracle.contains(&e));
        }
    }
}

#[test]
fn doom_solutions_match_their_syndrome() {
    for seed in 0..10u64 {
        let inst = gen_doom(18, 9, 16, 4, seed).unwrap();
        let problem = Problem::doom(&inst);
        let params = PgessParams { ell: 3, p: 12, max_restarts: 2000, target_solutions_per_restart: 1 };
        let rep = run(&problem, &params, &WagnerEngine::new(2), seed, &mut Budget::new(100_000_000)).unwrap();
        let e = rep.solution.expect("solved");
        let idx = rep.syndrome_index.unwrap();
        assert_eq!(inst.h.mul_vec(&e).unwrap(), inst.syndromes[idx]);
        assert_eq!(e.weight(), 16);
    }
}

#[test]
fn parameter_checks() {
    let inst = gen_sd(12, 6, 9, 0).unwrap();
    let problem = Problem::sd(&inst);
    let bad = PgessParams { ell: 7, p: 6, max_restarts: 1, target_solutions_per_restart: 1 };
    assert!(pgess::check_params(&problem, &bad, &PrangeEngine { p: 6, samples: 1 }).is_err());
    let weight_mismatch = PgessParams { ell: 2, p: 7, max_restarts: 1, target_solutions_per_restart: 1 };
    assert!(pgess::check_params(&problem, &weight_mismatch, &WagnerEngine::new(1)).is_err());
    let doom = gen_doom(12, 6, 9, 3, 0).unwrap();
    let ok = PgessParams { ell: 0, p: 6, max_restarts: 1, target_solutions_per_restart: 1 };
    assert!(pgess::check_params(&Problem::doom(&doom), &ok, &RepEngine::new(1)).is_err());
}

#[test]
fn restart_count_follows_the_success_probability() {
    // ell = 0: each restart tests one candidate, so restarts are geometric.
    let (n, k, p, w) = (20, 8, 8, 18);
    let prob = success_prob_log2(n, k, 0, p, w, 3).exp2();
    let params = PgessParams { ell: 0, p, max_restarts: 10_000, target_solutions_per_restart: 1 };
    let engine = PrangeEngine { p, samples: 1 };
    let counts: Vec<f64> = (0..300u64)
        .map(|i| {
            let inst = gen_sd(n, k, w, 9000 + i).unwrap();
            run(&Problem::sd(&inst), &params, &engine, i, &mut Budget::unlimited()).unwrap().restarts_used as f64
        })
        .collect();
    let mean = counts.iter().sum::<f64>() / counts.len() as f64;
    let sigma = ((1.0 - prob) / (prob * prob) / counts.len() as f64).sqrt();
    assert!((mean - 1.0 / prob).abs() <= 3.0 * sigma, "mean {mean} vs {}", 1.0 / prob);
}

#[test]
fn attempts_are_reproducible() {
    let inst = gen_sd(18, 9, 16, 2).unwrap();
    let params = PgessParams { ell: 3, p: 12, max_restarts: 1, target_solutions_per_restart: 1 };
    let run_once = || {
        let a = attempt(&Problem::sd(&inst), &params, &WagnerEngine::new(2), 5, 7, &mut Budget::unlimited()).unwrap();
        (a.solution, a.candidates_tested)
    };
    assert_eq!(run_once(), run_once());
}
