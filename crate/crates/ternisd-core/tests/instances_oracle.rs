use proptest::prelude::*;
use ternisd_core::instances::{
    self, brute_force_solutions, enumerate_by_kernel, enumerate_by_support, expected_solutions_log2, gen_doom, gen_sd,
    sort_canonical,
};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn the_two_enumeration_routes_agree(n in 4usize..13, kf in 0.2f64..0.8, wf in 0.0f64..1.0, seed in any::<u64>()) {
        let k = ((n as f64 * kf) as usize).clamp(1, n - 1);
        let w = (n as f64 * wf).round() as usize;
        let inst = gen_sd(n, k, w, seed).unwrap();
        let mut a = enumerate_by_support(&inst.h, &inst.s, w).unwrap();
        let mut b = enumerate_by_kernel(&inst.h, &inst.s, w).unwrap();
        sort_canonical(&mut a);
        sort_canonical(&mut b);
        prop_assert_eq!(&a, &b);
        prop_assert!(a.contains(inst.planted.as_ref().unwrap()));
        for e in &a {
            prop_assert!(inst.is_solution(e));
        }
    }

    #[test]
    fn generated_instances_are_valid(n in 3usize..40, kf in 0.1f64..0.9, wf in 0.0f64..1.0, seed in any::<u64>()) {
        let k = ((n as f64 * kf) as usize).clamp(1, n - 1);
        let w = (n as f64 * wf).round() as usize;
        let inst = gen_sd(n, k, w, seed).unwrap();
        prop_assert!(inst.validate().is_ok());
        prop_assert_eq!(inst.h.rank(), n - k);
        prop_assert_eq!(inst.planted.as_ref().unwrap().weight(), w);
    }
}

#[test]
fn doom_planted_index_matches() {
    for seed in 0..20 {
        let inst = gen_doom(16, 8, 13, 5, seed).unwrap();
        let e = inst.planted.clone().unwrap();
        assert_eq!(inst.matching_index(&e), inst.planted_index);
        assert_eq!(inst.syndromes.len(), 5);
    }
}

#[test]
fn generation_is_seeded() {
    assert_eq!(gen_sd(20, 10, 15, 4).unwrap(), gen_sd(20, 10, 15, 4).unwrap());
    assert_ne!(gen_sd(20, 10, 15, 4).unwrap().h, gen_sd(20, 10, 15, 5).unwrap().h);
}

#[test]
fn brute_force_is_canonical_and_capped() {
    let inst = gen_sd(12, 6, 9, 1).unwrap();
    let all = brute_force_solutions(&inst, usize::MAX).unwrap();
    let mut sorted = all.clone();
    sort_canonical(&mut sorted);
    assert_eq!(all, sorted);
    assert_eq!(brute_force_solutions(&inst, 3).unwrap(), all[..3.min(all.len())].to_vec());
}

#[test]
fn expected_count_frozen_values() {
    // C(12,9) 2^9 / 3^6 = 220 * 512 / 729
    let v = expected_solutions_log2(12, 6, 9, 3).exp2();
    assert!((v - 220.0 * 512.0 / 729.0).abs() < 1e-9);
    // binary: C(10,3) / 2^5
    assert!((expected_solutions_log2(10, 5, 3, 2).exp2() - 120.0 / 32.0).abs() < 1e-9);
}

#[test]
fn oversized_enumeration_is_refused() {
    let inst = gen_sd(80, 20, 60, 0).unwrap();
    assert!(matches!(brute_force_solutions(&inst, 1), Err(ternisd_core::Error::TooLarge)));
    let _ = instances::ENUMERATION_LIMIT_LOG2;
}
