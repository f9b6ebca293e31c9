use measure_audit::confusion::ConfusionMatrix;
use measure_audit::enumerate::compositions;
use measure_audit::properties::*;
use measure_audit::value::{ratio, EPSILON};
use measure_audit::{AveragingScheme, Budget, Measure, Value};
use proptest::prelude::*;

fn mat(rows: &[&[i64]]) -> ConfusionMatrix {
    ConfusionMatrix::from_rows(rows).unwrap()
}

#[test]
fn kappa_multiclass_monotonicity_fixture() {
    // moving c_01 onto the diagonal lowers kappa
    let before = mat(&[&[0, 1, 2], &[0, 0, 0], &[1, 0, 0]]);
    let after = mat(&[&[1, 0, 2], &[0, 0, 0], &[1, 0, 0]]);
    let k = Measure::kappa();
    assert!(k.evaluate(&before).unwrap().to_f64() > k.evaluate(&after).unwrap().to_f64());
}

#[test]
fn kappa_zero_diagonal_value() {
    // -sum a_i b_i / (n^2 - sum a_i b_i) with a = (1, 1, 2), b = (2, 1, 1)
    let c = mat(&[&[0, 1, 0], &[0, 0, 1], &[2, 0, 0]]);
    assert_eq!(Measure::kappa().evaluate(&c).unwrap(), Value::Rational(ratio(-5, 11)));
}

#[test]
fn confusion_entropy_min_and_monotonicity_fixture() {
    let ce = Measure::ce();
    let a = ce.evaluate(&mat(&[&[0, 6], &[6, 0]])).unwrap().to_f64();
    let b = ce.evaluate(&mat(&[&[1, 5], &[5, 1]])).unwrap().to_f64();
    assert!((a - 1.0).abs() < 1e-12);
    assert!(b > 1.0);
}

#[test]
fn approximate_baseline_fixture_for_ce() {
    let ce = Measure::ce();
    let x = approximate_baseline_value(&ce, &[2, 1], &[1, 2]).unwrap();
    let y = approximate_baseline_value(&ce, &[0, 3], &[1, 2]).unwrap();
    assert_ne!(x.compare(&y, EPSILON), std::cmp::Ordering::Equal);
}

#[test]
fn binary_witnesses_replay() {
    let budget = Budget::default();
    for measure in Measure::table_measures() {
        for p in PropertyId::ALL {
            let v = check_property(&measure, p, &AuditSpace::default_for(p, 2), &budget).unwrap();
            assert!(v.replay(&measure).unwrap(), "{} {p}", measure.name());
            assert_eq!(v.holds(), v.witness.is_none());
        }
    }
}

#[test]
fn replay_rejects_a_tampered_witness() {
    let budget = Budget::default();
    let v = check_property(&Measure::accuracy(), PropertyId::CB, &AuditSpace::new(2, 4), &budget).unwrap();
    assert!(!v.holds());
    // the same witness does not contradict constant baseline for CC
    assert!(!v.replay(&Measure::cc()).unwrap());
}

#[test]
fn multiclass_extremes() {
    let budget = Budget::default();
    let space = AuditSpace::new(3, 5);
    for measure in [Measure::accuracy(), Measure::balanced_accuracy(), Measure::sba()] {
        for p in [PropertyId::Max, PropertyId::Min] {
            assert!(
                check_property(&measure, p, &space, &budget).unwrap().holds(),
                "{} {p}",
                measure.name()
            );
        }
    }
    assert!(!check_property(&Measure::kappa(), PropertyId::Min, &space, &budget)
        .unwrap()
        .holds());
}

#[test]
fn binary_only_measures_reject_three_classes() {
    let r = check_property(
        &Measure::f1(),
        PropertyId::Max,
        &AuditSpace::new(3, 3),
        &Budget::default(),
    );
    assert!(r.is_err());
}

#[test]
fn averaged_measures_keep_maximal_agreement() {
    let budget = Budget::default();
    for scheme in AveragingScheme::ALL {
        let m = Measure::f1().with_scheme(scheme);
        assert!(check_property(&m, PropertyId::Max, &AuditSpace::new(3, 5), &budget)
            .unwrap()
            .holds());
    }
}

#[test]
fn baseline_orders() {
    let grid = interior_grid(10);
    assert_eq!(baseline_order(&Measure::cc(), 4, &grid).unwrap().order, 4);
    assert_eq!(baseline_order(&Measure::cd(), 3, &grid).unwrap().order, 2);
    assert_eq!(baseline_order(&Measure::cd_prime(), 3, &grid).unwrap().order, 1);
    assert_eq!(baseline_order(&Measure::accuracy(), 2, &grid).unwrap().order, 0);
}

#[test]
fn normalizer_conditions_hold_for_r_half() {
    let rep = check_gm_normalizer_conditions(&ratio(1, 2), &interior_grid(8)).unwrap();
    assert!(rep.all_hold, "{rep:?}");
}

#[test]
fn preservation_candidates_have_the_binary_property() {
    let budget = Budget::default();
    let names: Vec<String> = preservation_candidates(PropertyId::SMon, &budget)
        .unwrap()
        .iter()
        .map(Measure::id)
        .collect();
    assert!(names.contains(&"signed".to_string()));
    assert!(!names.contains(&"kappa".to_string()));
}

fn sizes(m: usize) -> impl Strategy<Value = (Vec<u64>, Vec<u64>)> {
    (2u64..=7).prop_flat_map(move |n| {
        let all = compositions(n, m);
        let nonunary: Vec<Vec<u64>> = all.iter().filter(|b| !b.contains(&n)).cloned().collect();
        (proptest::sample::select(all), proptest::sample::select(nonunary))
    })
}

fn exact_measures() -> Vec<Measure> {
    vec![
        Measure::cc(),
        Measure::kappa(),
        Measure::accuracy(),
        Measure::balanced_accuracy(),
        Measure::sba(),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn baseline_oracles_agree(
        (pick, (a, b)) in (0usize..5, 2usize..=3).prop_flat_map(|(pick, m)| (Just(pick), sizes(m)))
    ) {
        let measure = &exact_measures()[pick];
        let budget = Budget::default();
        let x = exact_baseline_expectation(measure, &a, &b, &budget).unwrap();
        let y = labeling_baseline_expectation(measure, &a, &b, &budget).unwrap();
        prop_assert_eq!(x, y);
    }

    #[test]
    fn ce_baseline_oracles_agree_within_tolerance((a, b) in sizes(2)) {
        let budget = Budget::default();
        let x = exact_baseline_expectation(&Measure::ce(), &a, &b, &budget).unwrap();
        let y = labeling_baseline_expectation(&Measure::ce(), &a, &b, &budget).unwrap();
        prop_assert!((x.to_f64() - y.to_f64()).abs() < 1e-9);
    }

    #[test]
    fn measures_are_symmetric_under_transpose(c in proptest::collection::vec(0u64..6, 9)) {
        prop_assume!(c.iter().sum::<u64>() > 0);
        let m = ConfusionMatrix::from_counts(3, &c).unwrap();
        for measure in [Measure::accuracy(), Measure::sba(), Measure::cc(), Measure::kappa()] {
            let x = measure.evaluate(&m).unwrap();
            let y = measure.evaluate(&m.transpose()).unwrap();
            prop_assert_eq!(x.compare(&y, EPSILON), std::cmp::Ordering::Equal);
        }
    }

    #[test]
    fn class_permutation_does_not_change_cc(c in proptest::collection::vec(0u64..6, 9)) {
        prop_assume!(c.iter().sum::<u64>() > 0);
        let m = ConfusionMatrix::from_counts(3, &c).unwrap();
        let p = m.permute_classes(&[2, 0, 1]).unwrap();
        let cc = Measure::cc();
        prop_assert_eq!(cc.evaluate(&m).unwrap().compare(&cc.evaluate(&p).unwrap(), EPSILON), std::cmp::Ordering::Equal);
    }
}
