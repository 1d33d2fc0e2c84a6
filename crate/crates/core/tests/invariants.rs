use proptest::prelude::*;
use risktree::bridge::{augmented_family, map_dual_to_process, map_dual_to_vector};
use risktree::families::process_family;
use risktree::fixtures;
use risktree::riskproc::{dual_term_process, rho_eval};
use risktree::riskvec::rbar_eval;
use risktree::sample::{random_field, random_optional_measure, random_process, random_process_dual, rng};
use risktree::space::{bar_cond_expectation, compose_exact, cond_expectation, decompose_exact, w_map};
use risktree::*;

const TOL: f64 = 1e-7;

fn space(k: usize) -> ScenarioSpace {
    fixtures::all().swap_remove(k % 3).1
}

fn family(k: usize) -> ProcessFamily {
    [ProcessFamily::WorstCase, ProcessFamily::BoundedExpectation { floor: 2.0 }, ProcessFamily::TerminalExpectation][k % 3]
        .clone()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn decomposition_round_trips(k in 0usize..3, seed in any::<u64>()) {
        let sp = space(k);
        let q = random_optional_measure(&sp, &mut rng(seed));
        let dec = decompose_exact(&sp, sp.probs(), sp.mu_table(), q.cells()).unwrap();
        let back = compose_exact(&sp, &dec.q_mass, &dec.psi);
        for (row, orig) in back.iter().zip(q.cells()) {
            for (a, b) in row.iter().zip(orig) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn tower_property(k in 0usize..3, seed in any::<u64>(), t in 0usize..4, s in 0usize..4) {
        let sp = space(k);
        let (t, s) = (t.min(s).min(sp.horizon()), t.max(s).min(sp.horizon()));
        let mut r = rng(seed);
        let x = random_field(&sp, sp.horizon(), 2, 3.0, &mut r);
        let p = VectorMeasure::reference(&sp, 2);
        let inner = cond_expectation(&sp, &x, &p, s).unwrap();
        let nested = cond_expectation(&sp, &inner, &p, t).unwrap();
        let direct = cond_expectation(&sp, &x, &p, t).unwrap();
        prop_assert!(nested.max_abs_diff(&direct) < 1e-12);
    }

    #[test]
    fn constants_are_their_own_optional_expectation(k in 0usize..3, seed in any::<u64>(), t in 0usize..4, c in -5.0f64..5.0) {
        let sp = space(k);
        let t = t.min(sp.horizon());
        let q = random_optional_measure(&sp, &mut rng(seed));
        let x = Process::from_fn(&sp, 1, 0, |_, _, _| c);
        let bar = bar_cond_expectation(&sp, &x, &[q], t).unwrap();
        prop_assert!(bar.flat().iter().all(|v| (v - c).abs() < 1e-9));
    }

    #[test]
    fn process_risk_is_cash_invariant_and_monotone(
        k in 0usize..3, f in 0usize..3, seed in any::<u64>(), t in 0usize..4,
    ) {
        let sp = space(k);
        let t = t.min(sp.horizon());
        let a = process_family(&sp, &family(f), t, Eligible::full(1)).unwrap();
        let mut r = rng(seed);
        let x = random_process(&sp, 1, t, 3.0, &mut r);
        let m = random_field(&sp, t, 1, 2.0, &mut r);
        let shifted = rho_eval(&a, &x.add_cash(&sp, &m)).unwrap();
        let neg: Vec<Vec<f64>> = (0..m.num_atoms()).map(|b| vec![-m.get(b, 0)]).collect();
        prop_assert!(shifted.equals(&rho_eval(&a, &x).unwrap().translate(&neg), TOL).unwrap());

        let bump = random_process(&sp, 1, t, 1.0, &mut r);
        let y = Process::from_fn(&sp, 1, t, |s, b, i| x.slice(s).get(b, i) + bump.slice(s).get(b, i).abs());
        prop_assert!(rho_eval(&a, &x).unwrap().subset_of(&rho_eval(&a, &y).unwrap(), TOL).unwrap());
    }

    #[test]
    fn risk_lies_inside_every_dual_term(k in 0usize..3, f in 0usize..3, seed in any::<u64>(), t in 0usize..4) {
        let sp = space(k);
        let t = t.min(sp.horizon());
        let e = Eligible::full(1);
        let a = process_family(&sp, &family(f), t, e).unwrap();
        let mut r = rng(seed);
        let x = random_process(&sp, 1, t, 3.0, &mut r);
        let qw = random_process_dual(&sp, t, e, &mut r);
        let term = dual_term_process(&sp, &a, &x, &qw).unwrap();
        prop_assert!(rho_eval(&a, &x).unwrap().subset_of(&term, TOL).unwrap());
    }

    #[test]
    fn lifted_value_splits_into_parts(k in 0usize..3, seed in any::<u64>(), t in 0usize..4) {
        let sp = space(k);
        let t = t.min(sp.horizon());
        let schedule = RestrictedSchedule::Fixed { family: RestrictedFamily::Shifted { c: vec![-1.0] } };
        let aug = augmented_family(&sp, &ProcessFamily::BoundedExpectation { floor: 2.0 }, &schedule, t, Eligible::full(1)).unwrap();
        let x = random_process(&sp, 1, 0, 3.0, &mut rng(seed));
        let whole = rbar_eval(&lift(&sp, &aug).unwrap(), &x).unwrap();
        let block = rho_eval(aug.rho(), &x.truncate_from(t)).unwrap();
        let offset = whole.num_cells() - block.num_cells();
        for (c, cell) in block.cells().iter().enumerate() {
            prop_assert!(whole.cell(offset + c).equals(cell, TOL).unwrap());
        }
    }

    #[test]
    fn dual_maps_preserve_time_weights(k in 0usize..3, seed in any::<u64>(), t in 0usize..4) {
        let sp = space(k);
        let t = t.min(sp.horizon());
        let e = Eligible::new(2, 1).unwrap();
        let qw = random_process_dual(&sp, t, e, &mut rng(seed));
        let back = map_dual_to_process(&sp, &map_dual_to_vector(&sp, &qw, e).unwrap(), e).unwrap();
        for s in t..=sp.horizon() {
            let a = w_map(&sp, qw.q_at(s), qw.w_at(s), s).unwrap();
            let b = w_map(&sp, back.q_at(s), back.w_at(s), s).unwrap();
            prop_assert!(a.max_abs_diff(&b) < 1e-9);
        }
    }
}
