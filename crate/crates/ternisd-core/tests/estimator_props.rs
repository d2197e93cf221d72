use proptest::prelude::*;
use ternisd_core::estimator::{
    dumer_exponent, hardest_weight, input_size_bits, ledger_cost, min_input_size, prange_exponent, rep_exponent,
    template_cost, wagner_exponent, wgv_binary, wgv_high, RepModel, RepSearch, Template, R_MAX,
};
use ternisd_core::math::{h2, LOG2_3};
use ternisd_core::reps::{expand_layers, level_profile, Density, LayerSpec};

fn cheap() -> RepSearch {
    RepSearch { restarts: 1, max_a: 4, max_evals: 300, ..RepSearch::default() }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn exponents_are_ordered(rate in 0.1f64..0.6, wf in 0.0f64..1.0) {
        // full-weight trees only compete from the hardest weight upward
        let lo = hardest_weight(3, rate);
        let weight = lo + (1.0 - lo) * wf;
        let p = prange_exponent(3, rate, weight).unwrap();
        let w = wagner_exponent(3, rate, weight, None).unwrap();
        let r = rep_exponent(rate, weight, &cheap()).unwrap();
        prop_assert!(w.exponent <= p.exponent + 1e-6, "wagner {} prange {}", w.exponent, p.exponent);
        prop_assert!(r.exponent <= w.exponent + 1e-12);
        prop_assert!(r.exponent >= 0.0);
    }

    #[test]
    fn many_syndromes_never_hurt(rate in 0.1f64..0.7, wf in 0.0f64..1.0, z in 0.0f64..0.2) {
        let weight = (2.0 / 3.0 + wf / 3.0).max(rate + 0.01).min(1.0);
        let plain = wagner_exponent(3, rate, weight, None).unwrap();
        let doom = wagner_exponent(3, rate, weight, Some(z)).unwrap();
        prop_assert!(doom.exponent <= plain.exponent + 1e-9);
    }

    #[test]
    fn high_gv_weight_solves_its_equation(rate in 0.0f64..R_MAX) {
        let w = wgv_high(rate).unwrap();
        prop_assert!((2.0 / 3.0..=1.0).contains(&w));
        prop_assert!((w + h2(w) - (1.0 - rate) * LOG2_3).abs() < 1e-10);
    }

    #[test]
    fn binary_gv_weight_solves_its_equation(rate in 0.01f64..0.99) {
        let w = wgv_binary(rate);
        prop_assert!((h2(w) - (1.0 - rate)).abs() < 1e-10);
    }

    #[test]
    fn template_cost_is_continuous_below_full_weight(ell in 0.02f64..0.25, b1 in 0.1f64..0.4) {
        let t = Template::Single { t: 0, f: 2 };
        let x = [ell, b1, 0.0];
        let at = |w: f64| template_cost(0.369, w, t, &x, RepModel::Capped).map(|r| r.0);
        if let (Some(a), Some(b)) = (at(1.0), at(1.0 - 1e-6)) {
            prop_assert!((a - b).abs() < 1e-4, "{a} vs {b}");
        }
    }
}

#[test]
fn above_the_maximal_rate_has_no_high_weight() {
    assert!(wgv_high(R_MAX + 0.01).is_err());
    assert_eq!(hardest_weight(3, 0.9), 1.0);
}

#[test]
fn frozen_table_values() {
    let p = prange_exponent(3, 0.369, 1.0).unwrap();
    assert!((p.exponent - 0.369).abs() < 1e-3);
    let w = wagner_exponent(3, 0.369, 1.0, None).unwrap();
    assert!((w.exponent - 0.269526).abs() < 1e-5, "{}", w.exponent);
    let d = dumer_exponent(0.447, wgv_binary(0.447)).unwrap();
    assert!((d.exponent - 0.116).abs() < 1e-3, "{}", d.exponent);
    let q2 = prange_exponent(2, 0.454, wgv_binary(0.454)).unwrap();
    assert!((q2.exponent - 0.121).abs() < 1e-3, "{}", q2.exponent);
}

#[test]
fn uncapped_published_tree_cost() {
    let (rate, weight, ell) = (0.676, 0.948366, 0.060835);
    let mut layers = vec![LayerSpec::LeftRight; 4];
    layers.push(LayerSpec::PartialRep {
        lambda1: 0.7252,
        rho1: Density::new(0.251, 0.001),
        rho2: Density::new(0.254, 0.004),
        rho3: Density::new(0.131, 0.0),
    });
    layers.push(LayerSpec::LeftRight);
    let prof = level_profile(rate + ell, Density::new(0.5, 0.0), &expand_layers(&layers)).unwrap();
    let (cost, _, run) = ledger_cost(rate, weight, ell, &prof, RepModel::Uncapped).unwrap();
    assert!((cost - 0.0176046).abs() < 1e-6, "{cost}");
    let total: f64 = run.widths.iter().sum();
    assert!((total - ell * LOG2_3).abs() < 1e-9);
}

#[test]
fn min_size_finds_the_interior_optimum() {
    // F(R) = c R (1 - R) gives size proportional to 1 / (R (1 - R)), smallest at R = 1/2.
    let c = 0.4;
    let m = min_input_size(|r| c * r * (1.0 - r), 3, 128.0, 0.05, 0.95, 30, 40);
    assert!((m.rate - 0.5).abs() < 1e-4, "{}", m.rate);
    let expect = input_size_bits(3, 0.5, 128.0 / (c * 0.25)) / 1000.0;
    assert!((m.kbits - expect).abs() < 1e-6 * expect);
}

#[test]
fn min_size_skips_infeasible_rates() {
    let m = min_input_size(|r| if r < 0.5 { 0.0 } else { 0.1 }, 3, 128.0, 0.05, 0.95, 18, 20);
    assert!(m.rate >= 0.5 && m.kbits.is_finite());
}

#[test]
fn representation_search_is_deterministic() {
    let a = rep_exponent(0.4, 0.95, &cheap()).unwrap();
    let b = rep_exponent(0.4, 0.95, &cheap()).unwrap();
    assert_eq!(a, b);
}
