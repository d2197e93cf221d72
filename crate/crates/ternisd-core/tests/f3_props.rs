use proptest::prelude::*;
use ternisd_core::f3::partial_gaussian_elim;
use ternisd_core::rng;
use ternisd_core::{Permutation, TritMatrix, TritVector};

fn trits(len: usize) -> impl Strategy<Value = Vec<u8>> {
    proptest::collection::vec(0u8..3, len)
}

fn vec_of(t: &[u8]) -> TritVector {
    TritVector::from_trits(t).unwrap()
}

proptest! {
    #[test]
    fn addition_is_associative_and_commutative(len in 1usize..140, seed in any::<u64>()) {
        let mut r = rng::stream(seed, "f3-assoc");
        let a = TritVector::random(len, &mut r);
        let b = TritVector::random(len, &mut r);
        let c = TritVector::random(len, &mut r);
        prop_assert_eq!(a.add(&b).unwrap().add(&c).unwrap(), a.add(&b.add(&c).unwrap()).unwrap());
        prop_assert_eq!(a.add(&b).unwrap(), b.add(&a).unwrap());
    }

    #[test]
    fn negation_cancels(t in trits(100)) {
        let v = vec_of(&t);
        prop_assert!(v.add(&v.neg()).unwrap().is_zero());
        prop_assert_eq!(v.sub(&v).unwrap(), TritVector::zeros(100));
    }

    #[test]
    fn addition_matches_scalar_arithmetic(x in trits(70), y in trits(70)) {
        let s = vec_of(&x).add(&vec_of(&y)).unwrap();
        let expect: Vec<u8> = x.iter().zip(&y).map(|(a, b)| (a + b) % 3).collect();
        prop_assert_eq!(s.trits(), expect);
    }

    #[test]
    fn syndrome_is_linear(rows in 1usize..12, cols in 1usize..90, seed in any::<u64>()) {
        let mut r = rng::stream(seed, "f3-linear");
        let h = TritMatrix::random(rows, cols, &mut r);
        let e1 = TritVector::random(cols, &mut r);
        let e2 = TritVector::random(cols, &mut r);
        let lhs = h.mul_vec(&e1.add(&e2).unwrap()).unwrap();
        let rhs = h.mul_vec(&e1).unwrap().add(&h.mul_vec(&e2).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn permutation_round_trip_keeps_weight(len in 1usize..150, seed in any::<u64>()) {
        let mut r = rng::stream(seed, "f3-perm");
        let p = Permutation::random(len, &mut r);
        let v = TritVector::random(len, &mut r);
        let moved = p.apply(&v);
        prop_assert_eq!(moved.weight(), v.weight());
        prop_assert_eq!(p.inverse().apply(&moved), v);
    }

    #[test]
    fn window_agrees_with_slice(len in 1usize..200, start in 0usize..200, w in 0usize..33, seed in any::<u64>()) {
        prop_assume!(start + w <= len);
        let mut r = rng::stream(seed, "f3-window");
        let v = TritVector::random(len, &mut r);
        let u = TritVector::random(len, &mut r);
        prop_assert_eq!(v.window(start, w), v.slice(start, w).window(0, w));
        let sum = TritVector::window_sum(v.window(start, w), u.window(start, w));
        prop_assert_eq!(sum, v.add(&u).unwrap().window(start, w));
    }

    #[test]
    fn partial_elimination_multiplies_back(k in 1usize..12, r_extra in 1usize..10, ell_frac in 0.0f64..1.0, seed in any::<u64>()) {
        let rows = r_extra + 1;
        let n = k + rows;
        let ell = ((rows as f64) * ell_frac) as usize;
        let mut r = rng::stream(seed, "f3-pge");
        let h = TritMatrix::random(rows, n, &mut r);
        let p = Permutation::random(n, &mut r);
        let Some(out) = partial_gaussian_elim(&h, ell, &p).unwrap() else {
            return Ok(());
        };
        let top = rows - ell;
        let prod = out.s.mul(&h.permute_columns(&p)).unwrap();
        for i in 0..rows {
            for j in 0..n {
                let expect = if j < top {
                    u8::from(i == j)
                } else if i < top {
                    out.h_prime.get(i, j - top)
                } else {
                    out.h_second.get(i - top, j - top)
                };
                prop_assert_eq!(prod.get(i, j), expect);
            }
        }
    }
}

#[test]
fn dot_product_small_cases() {
    let a = vec_of(&[1, 2, 0, 2]);
    let b = vec_of(&[2, 2, 1, 1]);
    // 2 + 4 + 0 + 2 = 8 = 2 mod 3
    assert_eq!(a.dot(&b).unwrap(), 2);
    assert!(a.dot(&TritVector::zeros(3)).is_err());
}

#[test]
fn rejects_invalid_trits() {
    assert!(TritVector::from_trits(&[0, 1, 3]).is_err());
    assert!(Permutation::from_vec(vec![0, 0, 1]).is_err());
}
