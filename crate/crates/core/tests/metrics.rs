use proptest::prelude::*;

use cascade_core::cost::{co2_kg, dollars, format_cents, CostModel};
use cascade_core::metrics::{fold_summary, macro_f1, paired_t_test, t_critical, Verdict};

fn labels(n_classes: usize) -> impl Strategy<Value = (usize, Vec<usize>, Vec<usize>)> {
    (1..60usize).prop_flat_map(move |n| {
        (
            Just(n_classes),
            prop::collection::vec(0..n_classes, n),
            prop::collection::vec(0..n_classes, n),
        )
    })
}

proptest! {
    #[test]
    fn macro_f1_is_bounded_and_order_free(
        (c, t, p) in (2..6usize).prop_flat_map(labels),
        rot in 0..60usize,
    ) {
        let f = macro_f1(&t, &p, c).unwrap();
        prop_assert!((0.0..=1.0).contains(&f));
        let k = rot % t.len();
        let (mut tr, mut pr) = (t.clone(), p.clone());
        tr.rotate_left(k);
        pr.rotate_left(k);
        prop_assert!((macro_f1(&tr, &pr, c).unwrap() - f).abs() < 1e-12);
    }

    #[test]
    fn macro_f1_ignores_class_renaming((c, t, p) in (2..6usize).prop_flat_map(labels), shift in 1..5usize) {
        let rename = |v: &[usize]| v.iter().map(|&l| (l + shift) % c).collect::<Vec<_>>();
        let a = macro_f1(&t, &p, c).unwrap();
        let b = macro_f1(&rename(&t), &rename(&p), c).unwrap();
        prop_assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn t_test_is_antisymmetric_and_shift_invariant(
        a in prop::collection::vec(0.0..1.0f64, 2..12),
        noise in prop::collection::vec(-0.2..0.2f64, 12),
        offset in -0.5..0.5f64,
    ) {
        let b: Vec<f64> = a.iter().zip(&noise).map(|(x, e)| x + e).collect();
        let ab = paired_t_test(&a, &b, 0.05).unwrap();
        let ba = paired_t_test(&b, &a, 0.05).unwrap();
        prop_assert_eq!(ab.verdict.mirrored(), ba.verdict);
        prop_assert!(ab.t == -ba.t || (ab.t == 0.0 && ba.t == 0.0));

        let a2: Vec<f64> = a.iter().map(|x| x + offset).collect();
        let b2: Vec<f64> = b.iter().map(|x| x + offset).collect();
        let shifted = paired_t_test(&a2, &b2, 0.05).unwrap();
        prop_assert!((shifted.t - ab.t).abs() <= 1e-6 * ab.t.abs().max(1.0));
    }
}

#[test]
fn fold_summary_examples() {
    let s = fold_summary("m", &[0.9, 0.9, 0.9, 0.9, 1.0]).unwrap();
    assert!((s.mean - 0.92).abs() < 1e-12);
    assert!((s.half_width - 0.0555).abs() < 5e-5, "{}", s.half_width);

    let s = fold_summary("m", &[0.0, 1.0]).unwrap();
    assert_eq!(s.mean, 0.5);
    assert!((s.half_width - 6.353).abs() < 5e-4, "{}", s.half_width);

    assert!(fold_summary("m", &[0.5]).is_err());
}

#[test]
fn t_test_conventions() {
    let a = [0.8, 0.8, 0.8];
    let zero = paired_t_test(&a, &a, 0.05).unwrap();
    assert_eq!((zero.verdict, zero.t), (Verdict::Tie, 0.0));

    let b = [0.7, 0.7, 0.7];
    let constant = paired_t_test(&a, &b, 0.05).unwrap();
    assert_eq!(constant.verdict, Verdict::ABetter);
    assert_eq!(constant.t, f64::INFINITY);
    assert_eq!(
        paired_t_test(&b, &a, 0.05).unwrap().verdict,
        Verdict::BBetter
    );

    assert!(paired_t_test(&a, &b[..2], 0.05).is_err());
    assert!(paired_t_test(&a, &b, 0.2).is_err());
}

#[test]
fn critical_values_shrink_with_degrees_of_freedom() {
    for alpha in [0.10, 0.05, 0.01] {
        let values: Vec<f64> = (1..=40).map(|df| t_critical(df, alpha).unwrap()).collect();
        assert!(values.windows(2).all(|w| w[0] >= w[1]));
    }
    assert_eq!(t_critical(4, 0.05).unwrap(), 2.776);
    assert!(t_critical(0, 0.05).is_err());
}

#[test]
fn cost_is_linear_in_time() {
    let m = CostModel::default();
    assert!((dollars(3600.0, &m) - 0.752).abs() < 1e-12);
    assert!((co2_kg(3600.0, &m) - 0.028).abs() < 1e-12);
    assert!((dollars(7200.0, &m) - 2.0 * dollars(3600.0, &m)).abs() < 1e-12);
    assert_eq!(m.all_folds(10.0), 50.0);
    assert_eq!(format_cents(1.234), "1.23");

    let bad = CostModel {
        pue: 0.0,
        ..CostModel::default()
    };
    assert!(bad.validate().is_err());
}
