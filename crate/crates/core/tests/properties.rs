mod common;

use common::permutation_max;
use proptest::prelude::*;
use wowa::direct::{wowa_lp_value_with, WowaLpPath};
use wowa::loctrans::{evaluate_solution, generate, problem_for, WeightChoice};
use wowa::{generate_weights_galpha, owa, ranked_deltas, wowa, WeightVector};

/// `(w, p, a)` with `w` from `g_α`, so `w*` is concave.
fn triple() -> impl Strategy<Value = (WeightVector, WeightVector, Vec<f64>)> {
    (1usize..=7).prop_flat_map(|k| {
        (
            1e-4f64..0.9999,
            prop::collection::vec(0.05f64..1.0, k),
            prop::collection::vec(-100.0f64..100.0, k),
        )
            .prop_map(move |(alpha, raw, a)| {
                let total: f64 = raw.iter().sum();
                let p = raw.into_iter().map(|v| v / total).collect();
                (
                    generate_weights_galpha(alpha, k).unwrap(),
                    WeightVector::importance(p).unwrap(),
                    a,
                )
            })
    })
}

/// Arbitrary (not necessarily monotone) preferential weights.
fn any_weights(k: usize) -> impl Strategy<Value = WeightVector> {
    prop::collection::vec(0.0f64..1.0, k).prop_filter_map("zero mass", |raw| {
        let total: f64 = raw.iter().sum();
        (total > 1e-3).then(|| WeightVector::preferential(raw.iter().map(|v| v / total).collect()).unwrap())
    })
}

proptest! {
    #[test]
    fn equals_permutation_maximum((w, p, a) in triple()) {
        let v = wowa(&w, &p, &a).unwrap();
        prop_assert!((v - permutation_max(w.entries(), p.entries(), &a)).abs() <= 1e-9);
    }

    #[test]
    fn pairwise_permutation_invariance((w, p, a) in triple(), seed in any::<u64>()) {
        let k = a.len();
        let mut order: Vec<usize> = (0..k).collect();
        let mut s = seed;
        for i in (1..k).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            order.swap(i, (s >> 33) as usize % (i + 1));
        }
        let pa: Vec<f64> = order.iter().map(|&i| a[i]).collect();
        let pp = WeightVector::importance(order.iter().map(|&i| p.entries()[i]).collect()).unwrap();
        let d = (wowa(&w, &p, &a).unwrap() - wowa(&w, &pp, &pa).unwrap()).abs();
        prop_assert!(d <= 1e-12 * (1.0 + a.iter().fold(0.0f64, |m, v| m.max(v.abs()))));
    }

    #[test]
    fn bounded_for_arbitrary_weights(
        (w, p, a) in (1usize..=6).prop_flat_map(|k| (any_weights(k), any_weights(k), prop::collection::vec(-50.0f64..50.0, k)))
    ) {
        let p = WeightVector::importance(p.into_entries()).unwrap();
        let v = wowa(&w, &p, &a).unwrap();
        let lo = a.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = a.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(v >= lo - 1e-9 && v <= hi + 1e-9);
        let ranked = ranked_deltas(&w, &p, &a).unwrap();
        prop_assert!(ranked.deltas.iter().all(|d| *d >= -1e-15));
        prop_assert!((ranked.deltas.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn monotone_in_each_entry((w, p, a) in triple(), idx in any::<prop::sample::Index>(), bump in 0.0f64..10.0) {
        let i = idx.index(a.len());
        let mut b = a.clone();
        b[i] += bump;
        prop_assert!(wowa(&w, &p, &b).unwrap() >= wowa(&w, &p, &a).unwrap() - 1e-9);
    }

    #[test]
    fn translation_and_scaling((w, p, a) in triple(), t in -50.0f64..50.0, s in 0.0f64..5.0) {
        let base = wowa(&w, &p, &a).unwrap();
        let shifted: Vec<f64> = a.iter().map(|v| v + t).collect();
        let scaled: Vec<f64> = a.iter().map(|v| v * s).collect();
        prop_assert!((wowa(&w, &p, &shifted).unwrap() - (base + t)).abs() <= 1e-9);
        prop_assert!((wowa(&w, &p, &scaled).unwrap() - s * base).abs() <= 1e-9 * (1.0 + s));
    }

    #[test]
    fn uniform_importance_is_owa((w, _p, a) in triple()) {
        let p = WeightVector::uniform(a.len(), wowa::WeightKind::Importance).unwrap();
        prop_assert!((wowa(&w, &p, &a).unwrap() - owa(&w, &a).unwrap()).abs() <= 1e-9);
    }

    #[test]
    fn galpha_strictly_decreasing(alpha in 1e-6f64..0.999999, k in 2usize..=50) {
        let w = generate_weights_galpha(alpha, k).unwrap();
        prop_assert!(w.entries().windows(2).all(|p| p[0] > p[1]));
        prop_assert!((w.entries().iter().sum::<f64>() - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn lp_value_matches_both_paths((w, p, a) in triple()) {
        let v = wowa(&w, &p, &a).unwrap();
        for path in [WowaLpPath::Primal, WowaLpPath::Dual] {
            prop_assert!((wowa_lp_value_with(&a, &w, &p, path).unwrap() - v).abs() <= 1e-8);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn generated_instances_are_sound(seed in any::<u64>(), n in 1usize..=6, m in 1usize..=6, k in 1usize..=6) {
        let inst = generate(n, m, k, seed);
        let total: f64 = inst.capacity.iter().sum();
        prop_assert!(total >= inst.max_total_demand() - 1e-9);
        prop_assert!(inst.validate().is_ok());
        prop_assert_eq!(generate(n, m, k, seed), inst.clone());

        // All sites open at full capacity is feasible for every scenario.
        let problem = problem_for(&inst, WeightChoice::GAlpha(0.2)).unwrap();
        let mut x = vec![1.0; m];
        x.extend(inst.capacity.iter().copied());
        prop_assert!(problem.is_recourse_feasible(&x).unwrap());
        let eval = evaluate_solution(&inst, &x).unwrap();
        prop_assert!(eval.expected_cost <= eval.worst_case_cost + 1e-9);

        let q = problem.recourse_values(&x).unwrap();
        let obj = problem.eval_objective(&x).unwrap();
        let fc = problem.first_stage_cost(&x);
        let lo = q.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = q.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(obj >= fc + lo - 1e-9 && obj <= fc + hi + 1e-9);
    }
}
