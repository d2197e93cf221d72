use proptest::prelude::*;
use ternisd_core::math::LOG2_3;
use ternisd_core::pgess::Budget;
use ternisd_core::rng;
use ternisd_core::wagner::{
    build_leaves, merge, realize_widths, smoothed_params, solve, solve_streaming, stack_partition, theorem1_ok,
    MergeEntry, MergeList, WagnerParams, NO_TAG,
};
use ternisd_core::TritVector;

fn unit(m: usize, i: usize) -> TritVector {
    let mut t = vec![0u8; m];
    t[i] = 1;
    TritVector::from_trits(&t).unwrap()
}

fn combination(columns: &[TritVector], b: &TritVector) -> TritVector {
    let mut acc = TritVector::zeros(columns[0].len());
    for (i, x) in columns.iter().enumerate() {
        acc = acc.add(&x.scale(b.get(i))).unwrap();
    }
    acc
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn merge_returns_exactly_the_matching_pairs(
        nl in 0usize..40, nr in 1usize..40, ell in 1usize..10, start_frac in 0.0f64..1.0, seed in any::<u64>()
    ) {
        let mut r = rng::stream(seed, "merge-pairs");
        let start = ((ell as f64) * start_frac) as usize;
        let len = ell - start;
        let m = nl + nr;
        let mk = |i: usize, r: &mut rng::StreamRng| MergeEntry { key: TritVector::random(ell, r), coeff: unit(m, i), tag: NO_TAG };
        let left = MergeList { entries: (0..nl).map(|i| mk(i, &mut r)).collect() };
        let mut right = MergeList { entries: (0..nr).map(|j| mk(nl + j, &mut r)).collect() };
        let target = TritVector::random(ell, &mut r);
        right.sort_by_window(start, len);
        let got = merge(&left, &right, start, len, target.window(start, len), &mut Budget::unlimited()).unwrap();
        let mut brute = Vec::new();
        for l in &left.entries {
            for rt in &right.entries {
                let key = l.key.add(&rt.key).unwrap();
                if key.slice(start, len) == target.slice(start, len) {
                    brute.push((key, l.coeff.add(&rt.coeff).unwrap()));
                }
            }
        }
        let mut got: Vec<_> = got.entries.into_iter().map(|e| (e.key, e.coeff)).collect();
        got.sort();
        brute.sort();
        prop_assert_eq!(got, brute);
    }

    #[test]
    fn realized_widths_cover_ell(widths in proptest::collection::vec(0.0f64..12.0, 1..8), ell in 0usize..40) {
        let t = realize_widths(&widths, ell);
        prop_assert_eq!(t.len(), widths.len());
        prop_assert_eq!(t.iter().sum::<usize>(), ell);
        let mut left = ell;
        for i in (1..widths.len()).rev() {
            let want = (widths[i] / LOG2_3).round() as usize;
            prop_assert_eq!(t[i], want.min(left));
            left -= t[i];
        }
    }

    #[test]
    fn stacks_partition_the_columns(m in 0usize..200, parts in 1usize..33) {
        let p = stack_partition(m, parts);
        prop_assert_eq!(p.len(), parts);
        let mut next = 0;
        for &(s, l) in &p {
            prop_assert_eq!(s, next);
            prop_assert!(l == m / parts || l == m / parts + 1);
            next += l;
        }
        prop_assert_eq!(next, m);
    }

    #[test]
    fn smoothed_parameters_satisfy_their_defining_relations(k in 0.05f64..0.9, ell in 0.001f64..0.3) {
        let kl = k + ell;
        let holds = |j: usize| ell * LOG2_3 / (j as f64) < kl / (j as f64).exp2();
        match smoothed_params(k, ell) {
            Ok(sp) => {
                prop_assert!(sp.a >= 3);
                prop_assert!(holds(sp.a - 1));
                prop_assert!(!holds(sp.a));
                let a = sp.a as f64;
                let lambda = ell * LOG2_3 / (a - 2.0) - kl / ((a - 2.0) * (a - 1.0).exp2());
                prop_assert!((sp.lambda - lambda).abs() < 1e-12);
                prop_assert!((2.0 * kl / a.exp2() - sp.m * LOG2_3 - sp.lambda).abs() < 1e-12);
            }
            Err(_) => prop_assert!(!holds(2)),
        }
    }
}

#[test]
fn smoothing_frozen_example() {
    // k + ell = 1, ell = 0.05: j = 6 holds (0.01321 < 0.01563), j = 7 fails (0.01132 > 0.00781).
    let sp = smoothed_params(0.95, 0.05).unwrap();
    assert_eq!(sp.a, 7);
    let lambda = 0.05 * LOG2_3 / 5.0 - 1.0 / (5.0 * 64.0);
    assert!((sp.lambda - lambda).abs() < 1e-15);
}

#[test]
fn theorem_one_boundary() {
    // ell log2 3 / a <= (k + ell) / 2^a
    assert!(theorem1_ok(16.0, 5.0, 2));
    assert!(!theorem1_ok(16.0, 6.0, 2));
}

#[test]
fn doom_leaf_carries_syndrome_tags() {
    let mut r = rng::stream(3, "doom-tags");
    let columns: Vec<TritVector> = (0..12).map(|_| TritVector::random(4, &mut r)).collect();
    let syn: Vec<TritVector> = (0..5).map(|_| TritVector::random(4, &mut r)).collect();
    let leaves = build_leaves(&columns, 2, 8, Some(&syn), &mut r).unwrap();
    assert_eq!(leaves.len(), 4);
    let last = leaves.last().unwrap();
    for (i, e) in last.entries.iter().enumerate() {
        assert_eq!(e.tag, i as u32);
        assert_eq!(e.key, syn[i]);
        assert!(e.coeff.is_zero());
    }
    for l in &leaves[..3] {
        assert!(l.entries.iter().all(|e| e.tag == NO_TAG));
    }
}

#[test]
fn doom_outputs_hit_the_tagged_syndrome() {
    let mut hits = 0;
    for seed in 0..40u64 {
        let mut r = rng::stream(seed, "doom-solve");
        let columns: Vec<TritVector> = (0..15).map(|_| TritVector::random(3, &mut r)).collect();
        let syn: Vec<TritVector> = (0..8).map(|_| TritVector::random(3, &mut r)).collect();
        let params = WagnerParams::full_leaves(2, 3, 15);
        solve_streaming(&columns, &syn, true, &params, &mut r, &mut Budget::unlimited(), &mut |b, idx| {
            assert_eq!(combination(&columns, b), syn[idx]);
            assert!(b.trits().iter().all(|&t| t <= 1));
            hits += 1;
            false
        });
    }
    assert!(hits > 0);
}

#[test]
fn solve_is_sound_and_distinct() {
    for seed in 0..30u64 {
        let mut r = rng::stream(seed, "wagner-solve");
        let m = 16;
        let columns: Vec<TritVector> = (0..m).map(|_| TritVector::random(4, &mut r)).collect();
        let target = TritVector::random(4, &mut r);
        let params = WagnerParams::full_leaves(2, 4, m);
        let out = solve(&columns, &target, &params, &mut r, &mut Budget::unlimited()).unwrap();
        let mut seen = out.clone();
        seen.sort();
        seen.dedup();
        assert_eq!(seen.len(), out.len());
        for b in &out {
            assert_eq!(combination(&columns, b), target);
            assert!(b.trits().iter().all(|&t| t <= 1));
        }
    }
}

#[test]
fn solve_rejects_a_violated_constraint() {
    let mut r = rng::stream(0, "wagner-reject");
    let columns: Vec<TritVector> = (0..8).map(|_| TritVector::random(6, &mut r)).collect();
    let target = TritVector::random(6, &mut r);
    let params = WagnerParams::theorem1(2, 6);
    assert!(solve(&columns, &target, &params, &mut r, &mut Budget::unlimited()).is_err());
}
