use super::*;
use crate::families::{process_measure, vector_family, RestrictedFamily, VectorFamily};
use crate::fixtures::{binary_t2, two_state_t1};

fn orthant() -> RestrictedSchedule {
    RestrictedSchedule::Fixed { family: RestrictedFamily::Orthant }
}

fn cfg(per_pair: usize) -> FixtureConfig {
    FixtureConfig { per_pair, ..FixtureConfig::default() }
}

#[test]
fn product_members_enumerate_in_mixed_radix() {
    let sp = binary_t2();
    let f = |t: usize, v: f64| Field::constant(&sp, t, &[v]);
    let fam = ProductFamily {
        slices: vec![vec![f(0, 1.0), f(0, 2.0)], vec![f(1, 3.0)]],
        tail: vec![Process::frozen(&sp, &f(2, 5.0)), Process::frozen(&sp, &f(2, 7.0))],
    };
    assert_eq!(fam.len(), 4);
    let firsts: Vec<(f64, f64)> =
        fam.members(&sp).map(|y| (y.slice(0).get(0, 0), y.slice(2).get(1, 0))).collect();
    assert_eq!(firsts, vec![(1.0, 5.0), (1.0, 7.0), (2.0, 5.0), (2.0, 7.0)]);
    assert!(fam.members(&sp).all(|y| y.slice(1).get(0, 0) == 3.0 && y.start() == 0));
}

#[test]
fn splice_keeps_the_prefix_and_the_tail() {
    let sp = binary_t2();
    let z = Process::from_fn(&sp, 1, 0, |t, _, _| 10.0 + t as f64);
    let x = Process::from_fn(&sp, 1, 1, |t, _, _| -(t as f64));
    let y = splice(&sp, 0, 1, &z, &x);
    assert_eq!(y.start(), 0);
    assert_eq!(y.slice(0).get(0, 0), 10.0);
    assert_eq!(y.slice(1).get(1, 0), -1.0);
    assert_eq!(y.slice(2).get(3, 0), -2.0);
}

#[test]
fn reflexive_singletons_hold_and_are_decided() {
    let sp = binary_t2();
    let rho = process_measure(&sp, &ProcessFamily::TerminalExpectation, Eligible::full(1)).unwrap();
    let fx = process_fixtures(&sp, &rho, &cfg(6)).unwrap();
    let reflexive: Vec<_> = fx.into_iter().filter(|f| f.id.contains("reflexive")).collect();
    assert_eq!(reflexive.len(), 3);
    let report = check_mptc_process(&sp, &rho, &reflexive, &UnionOptions::default()).unwrap();
    assert!(report.outcomes.iter().all(|o| matches!(o.implication, Implication::Holds { .. })));
}

#[test]
fn worst_case_is_jointly_consistent_and_so_is_its_lift() {
    for sp in [two_state_t1(), binary_t2()] {
        let aug = augmented_measure(&sp, &ProcessFamily::WorstCase, &orthant(), Eligible::full(1)).unwrap();
        let report = equivalence_harness(&sp, &aug, &cfg(6), &UnionOptions::default()).unwrap();
        assert!(report.joint_holds() && report.vector_holds());
        assert!(report.agrees());
        assert_eq!(report.agreements.len(), report.vector.outcomes.len());
        assert!(report.joint.outcomes().any(|o| o.implication != Implication::Vacuous));
    }
}

#[test]
fn non_recursive_family_fails_with_a_witness() {
    let sp = binary_t2();
    let aug = augmented_measure(&sp, &ProcessFamily::NonRecursive, &orthant(), Eligible::full(1)).unwrap();
    let report = equivalence_harness(&sp, &aug, &cfg(6), &UnionOptions::default()).unwrap();
    assert!(!report.joint_holds() && !report.vector_holds());
    assert!(report.agrees());
    let bad = report.joint.process.violations().next().expect("a process violation");
    assert_eq!((bad.t, bad.s), (0, 1));
    let Implication::Violated { point, certificates, .. } = &bad.implication else { unreachable!() };
    assert!(!point.is_empty() && !certificates.is_empty());
    assert!(certificates.iter().all(|c| c.slack < 0.0));
    let inputs = bad.inputs.as_ref().expect("violations carry their inputs");
    assert_eq!(inputs.pivot.len(), sp.horizon() + 1);
    assert!(!inputs.family.is_empty());
    assert!(report.joint.outcomes().filter(|o| o.implication.holds()).all(|o| o.inputs.is_none()));
}

#[test]
fn time_dependent_restricted_sets_break_the_cross_horizon_condition() {
    let sp = binary_t2();
    let aug = augmented_measure(&sp, &ProcessFamily::WorstCase, &RestrictedSchedule::TimeDependent, Eligible::full(2))
        .unwrap();
    let report = equivalence_harness(&sp, &aug, &cfg(6), &UnionOptions::default()).unwrap();
    assert!(!report.joint.cross.holds());
    assert!(report.joint.cross.violations().all(|o| (o.t, o.s) == (1, 2)));
    assert!(!report.vector_holds());
    assert!(report.agrees());
}

#[test]
fn vector_measure_and_its_projection_agree() {
    let sp = binary_t2();
    let e = Eligible::full(1);
    for fam in [VectorFamily::NonNegative, VectorFamily::Shifted { c: vec![-1.0] }] {
        let sets = sp.times().map(|t| vector_family(&sp, &fam, t, e)).collect::<Result<_>>().unwrap();
        let rbar = VectorRiskMeasure::new("v", sets).unwrap();
        let report = equivalence_from_vector(&sp, &rbar, &cfg(4), &UnionOptions::default()).unwrap();
        assert!(report.agrees());
        assert!(report.vector_holds());
    }
}

#[test]
fn product_and_unrestricted_families_agree() {
    let sp = binary_t2();
    let e = Eligible::full(1);
    let cone = augmented_measure(&sp, &ProcessFamily::WorstCase, &orthant(), e).unwrap().lift(&sp).unwrap();
    let report = product_family_check(&sp, &cone, &cfg(6), &UnionOptions::default()).unwrap();
    assert!(report.product.holds() && report.agrees());
    let broken = augmented_measure(&sp, &ProcessFamily::NonRecursive, &orthant(), e).unwrap().lift(&sp).unwrap();
    let report = product_family_check(&sp, &broken, &cfg(6), &UnionOptions::default()).unwrap();
    assert!(!report.product.holds() && report.agrees());
}

#[test]
fn one_step_fixtures_decide_like_all_pairs() {
    let sp = binary_t2();
    for fam in [ProcessFamily::WorstCase, ProcessFamily::NonRecursive, ProcessFamily::TerminalExpectation] {
        let rho = process_measure(&sp, &fam, Eligible::full(1)).unwrap();
        let report = one_step_sufficiency(&sp, &rho, &cfg(6), &UnionOptions::default()).unwrap();
        assert!(report.agrees(), "{}", fam.name());
        assert!(report.one_step_fixtures < report.all_pair_fixtures);
    }
}

#[test]
fn reports_are_deterministic() {
    let sp = binary_t2();
    let aug = augmented_measure(&sp, &ProcessFamily::NonRecursive, &orthant(), Eligible::full(1)).unwrap();
    let a = equivalence_harness(&sp, &aug, &cfg(4), &UnionOptions::default()).unwrap();
    let b = equivalence_harness(&sp, &aug, &cfg(4), &UnionOptions::default()).unwrap();
    assert_eq!(a, b);
}
