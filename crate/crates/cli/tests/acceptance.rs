//! Acceptance criteria 1 to 10. Every criterion prints one line; the oracles
//! below are computed from cell masses, LP infima over the acceptance
//! polyhedra and plain membership tests, not from the evaluation paths under
//! test.

use num_rational::BigRational;
use rand::Rng;
use risktree::axioms::Axiom;
use risktree::bridge::{
    augmented_family, inheritance_check, lift_acceptance, map_dual_to_process, map_dual_to_vector,
    penalty_decompose_check, penalty_reverse_process, penalty_reverse_restricted, project_acceptance, slice_dual,
};
use risktree::consistency::{equivalence_harness, Condition, EquivalenceReport, FixtureOutcome};
use risktree::families::{process_family, vector_family};
use risktree::polyhedra::Support;
use risktree::riskproc::{check_axioms_process, dirac_family_process, dual_eval_process, dual_term_process, rho_eval};
use risktree::riskvec::{
    check_axioms_restricted, check_axioms_vector, dirac_family_vector, dual_eval_vector, dual_term_vector, rbar_eval,
    rbar_eval_joint,
};
use risktree::sample::{
    random_integer_process, random_optional_measure, random_process, random_process_dual, random_vector_dual, rng,
};
use risktree::space::{bar_cond_expectation, compose_exact, decompose_exact, w_map};
use risktree::{
    lift, project, AugmentedProcessRiskMeasure, Eligible, Field, FixtureConfig, Implication, Measure, Polyhedron,
    Process, ProcessAcceptanceSet, ProcessDualVariable, ProcessFamily, RestrictedFamily, RestrictedSchedule,
    ScenarioSpace, UnionOptions, VectorAcceptanceSet, VectorDualVariable, VectorFamily, VectorMeasure,
};
use risktree_cli::config::ModelConfig;
use std::time::{Duration, Instant};

const TOL: f64 = 1e-7;

type Verdict = Result<String, String>;

trait OrFail<T> {
    fn or_fail(self, what: &str) -> Result<T, String>;
}

impl<T, E: std::fmt::Display> OrFail<T> for Result<T, E> {
    fn or_fail(self, what: &str) -> Result<T, String> {
        self.map_err(|e| format!("{what}: {e}"))
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(start: Instant, limit: Duration, what: &str) -> Result<Duration, String> {
    let took = start.elapsed();
    ensure(took < limit, || format!("{what} took {took:?}, limit {limit:?}"))?;
    Ok(took)
}

// ---------------------------------------------------------------------------
// Fixtures

fn model(name: &str) -> ModelConfig {
    risktree_cli::resolve_model(name).unwrap_or_else(|e| panic!("shipped model {name}: {e}"))
}

/// The three shipped trees (T = 1, 2, 3) with exact `P` and `μ`.
fn spaces() -> Vec<ModelConfig> {
    ["two_state_T1", "binary_T2", "binary_T3_shifted"].into_iter().map(model).collect()
}

fn orthant() -> RestrictedSchedule {
    RestrictedSchedule::Fixed { family: RestrictedFamily::Orthant }
}

fn shifted() -> RestrictedSchedule {
    RestrictedSchedule::Fixed { family: RestrictedFamily::Shifted { c: vec![-1.0] } }
}

/// Convex augmented pairs at time `t`; every lift is a product and hence
/// time decomposable.
fn instances(sp: &ScenarioSpace, t: usize) -> Vec<(String, AugmentedProcessRiskMeasure)> {
    let combos = [
        ("worst_case/orthant", ProcessFamily::WorstCase, orthant(), Eligible::full(1)),
        ("bounded/shifted", ProcessFamily::BoundedExpectation { floor: 2.0 }, shifted(), Eligible::full(1)),
        ("terminal/orthant", ProcessFamily::TerminalExpectation, orthant(), Eligible::full(1)),
        ("worst_case/time_dependent", ProcessFamily::WorstCase, RestrictedSchedule::TimeDependent, Eligible::full(2)),
        ("shifted/orthant/m1", ProcessFamily::Shifted { c: vec![-1.0, -0.5] }, orthant(), Eligible::new(2, 1).unwrap()),
    ];
    combos
        .into_iter()
        .map(|(name, fam, schedule, e)| {
            let aug = augmented_family(sp, &fam, &schedule, t, e).unwrap_or_else(|err| panic!("{name} at t = {t}: {err}"));
            (format!("{name}@t{t}"), aug)
        })
        .collect()
}

fn vector_instances(sp: &ScenarioSpace, t: usize) -> Vec<(String, VectorAcceptanceSet)> {
    let e = Eligible::full(1);
    [("nonnegative", VectorFamily::NonNegative), ("shifted", VectorFamily::Shifted { c: vec![-1.0] })]
        .into_iter()
        .map(|(name, fam)| (format!("{name}@t{t}"), vector_family(sp, &fam, t, e).unwrap()))
        .collect()
}

// ---------------------------------------------------------------------------
// Oracle arithmetic

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn atom_mass(sp: &ScenarioSpace, q: &Measure, t: usize, a: usize) -> f64 {
    sp.atom_states(t, a).iter().map(|&w| q.mass(sp, w)).sum()
}

/// `inf_{x ∈ p} c·x` as an extended real.
fn inf(p: &Polyhedron, c: &[f64]) -> f64 {
    match p.minimize(c).expect("LP solves") {
        Support::Empty => f64::INFINITY,
        Support::Unbounded => f64::NEG_INFINITY,
        Support::Attained { value, .. } => value,
    }
}

fn same_extended(a: f64, b: f64, tol: f64) -> bool {
    if a.is_infinite() || b.is_infinite() {
        return a == b;
    }
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

/// `Z ↦ Σ_s w_s(a)·E^{Q_s}[Z_s | A]` on atom `a` of `F_t`, over `coords`.
fn process_functional(
    sp: &ScenarioSpace,
    coords: &risktree::acceptance::Coords,
    qw: &ProcessDualVariable,
    a: usize,
) -> Vec<f64> {
    let t = qw.t;
    coords
        .entries()
        .map(|(s, b, i)| {
            if s < t || sp.ancestor(s, b, t) != a {
                return 0.0;
            }
            let q = qw.q_at(s).component(i);
            let qa = atom_mass(sp, q, t, a);
            if qa <= 0.0 {
                return 0.0;
            }
            qw.w_at(s).get(a, i) * atom_mass(sp, q, s, b) / qa
        })
        .collect()
}

/// One functional per `F̄_t` cell: realized cells `(r, b)` with `r < t`
/// first, then the block atoms of `F_t`. The block averages the future
/// against the cell masses of `Q̄_i`.
fn vector_functionals(
    sp: &ScenarioSpace,
    coords: &risktree::acceptance::Coords,
    qw: &VectorDualVariable,
) -> Vec<Vec<f64>> {
    let t = qw.t;
    let mut out = Vec::new();
    for r in 0..t {
        for b in 0..sp.num_atoms(r) {
            out.push(coords.entries().map(|(s, c, i)| if (s, c) == (r, b) { qw.w.slice(r).get(b, i) } else { 0.0 }).collect());
        }
    }
    for a in 0..sp.num_atoms(t) {
        let totals: Vec<f64> = qw
            .q
            .iter()
            .map(|q| (t..=sp.horizon()).flat_map(|s| sp.descendants(t, a, s).into_iter().map(move |b| (s, b))).map(|(s, b)| q.cell(s, b)).sum())
            .collect();
        out.push(
            coords
                .entries()
                .map(|(s, b, i)| {
                    if s < t || sp.ancestor(s, b, t) != a || totals[i] <= 0.0 {
                        return 0.0;
                    }
                    qw.w.block().get(a, i) * qw.q[i].cell(s, b) / totals[i]
                })
                .collect(),
        );
    }
    out
}

/// Weak duality for one functional: `ℓ(X + u) ≥ inf_A ℓ` for all `u` in the
/// risk value `joint`, decided by one LP over `joint` and one over `A`.
fn weak_duality_holds(
    joint: &Polyhedron,
    lin: &risktree::acceptance::LinearSet,
    flat: &[f64],
    ell: &[f64],
    acceptance: &Polyhedron,
) -> bool {
    let base = dot(ell, flat);
    let coef: Vec<f64> = (0..joint.dim())
        .map(|k| {
            let mut unit = vec![0.0; joint.dim()];
            unit[k] = 1.0;
            dot(ell, &lin.shift(flat, &unit)) - base
        })
        .collect();
    let lo = inf(joint, &coef) + base;
    let bound = inf(acceptance, ell);
    lo == f64::INFINITY || bound == f64::NEG_INFINITY || lo >= bound - TOL * (1.0 + bound.abs())
}

/// `w_t^s(Q, w)(b) = w(a) ξ_{t,s}(Q)(b)` with `ξ = (Q(B)/Q(A)) / (P(B)/P(A))`.
fn w_t_s(sp: &ScenarioSpace, q: &VectorMeasure, w: &Field, s: usize) -> Field {
    let t = w.time();
    Field::from_fn(sp, s, w.dim(), |b, i| {
        let a = sp.ancestor(s, b, t);
        let qi = q.component(i);
        let qa = atom_mass(sp, qi, t, a);
        if qa <= 0.0 {
            return 0.0;
        }
        let ratio = (atom_mass(sp, qi, s, b) / qa) / (sp.atom_prob(s, b) / sp.atom_prob(t, a));
        w.get(a, i) * ratio
    })
}

// ---------------------------------------------------------------------------
// Criteria

fn criterion_1() -> Verdict {
    let start = Instant::now();
    let mut r = rng(1);
    let mut worst_expectation = 0.0f64;
    let mut worst_float_round_trip = 0.0f64;
    let mut rational_checked = 0;
    let models = spaces();
    for k in 0..50 {
        let m = &models[k % models.len()];
        let sp = &m.space;
        let qbar = random_optional_measure(sp, &mut r);
        let q = qbar.q();
        for j in 0..20 {
            let d = 1 + (j % 2);
            let x = random_process(sp, d, 0, 3.0, &mut r);
            for i in 0..d {
                let lhs: f64 = sp
                    .times()
                    .flat_map(|t| (0..sp.num_atoms(t)).map(move |a| (t, a)))
                    .map(|(t, a)| qbar.cell(t, a) * x.slice(t).get(a, i))
                    .sum();
                let rhs: f64 = (0..sp.num_states())
                    .map(|w| {
                        let inner: f64 = sp
                            .times()
                            .map(|t| qbar.psi_at(t, sp.atom_of(t, w)) * x.value_at_state(sp, t, w, i))
                            .sum();
                        q.mass(sp, w) * inner
                    })
                    .sum();
                for v in [lhs, qbar.expectation(sp, &x, i), qbar.factorized_expectation(sp, &x, i)] {
                    worst_expectation = worst_expectation.max((v - rhs).abs());
                }
            }
        }

        // Float mode: compose ∘ decompose on the same cells.
        let cells = qbar.cells().to_vec();
        let mu_f: Vec<Vec<f64>> = sp.mu_table().to_vec();
        let dec = decompose_exact(sp, sp.probs(), &mu_f, &cells).or_fail("float decomposition")?;
        let back = compose_exact(sp, &dec.q_mass, &dec.psi);
        for (row, orig) in back.iter().zip(&cells) {
            for (a, b) in row.iter().zip(orig) {
                worst_float_round_trip = worst_float_round_trip.max((a - b).abs());
            }
        }

        // Rational mode: random integer masses with frequent zeros.
        let mut weights: Vec<Vec<BigRational>> = sp
            .times()
            .map(|t| {
                (0..sp.num_atoms(t))
                    .map(|_| BigRational::from_integer(if r.random_bool(0.3) { 0 } else { r.random_range(1..7) }.into()))
                    .collect()
            })
            .collect();
        let zero = BigRational::from_integer(0.into());
        let total = weights.iter().flatten().fold(zero.clone(), |acc, v| acc + v);
        if total == zero {
            weights[0][0] = BigRational::from_integer(1.into());
        } else {
            weights.iter_mut().flatten().for_each(|v| *v = v.clone() / total.clone());
        }
        let dec = decompose_exact(sp, &m.exact_prob, &m.exact_mu, &weights).or_fail("rational decomposition")?;
        let back = compose_exact(sp, &dec.q_mass, &dec.psi);
        ensure(back == weights, || format!("rational compose ∘ decompose differs on {} (measure {k})", m.name))?;
        rational_checked += 1;
    }
    ensure(worst_expectation < 1e-9, || format!("expectation gap {worst_expectation:e}"))?;
    ensure(worst_float_round_trip <= 1e-12, || format!("float round trip gap {worst_float_round_trip:e}"))?;
    let took = within(start, Duration::from_secs(5), "decomposition fidelity")?;
    Ok(format!(
        "50 measures x 20 vectors, max gap {worst_expectation:.1e}; float round trip {worst_float_round_trip:.1e}; \
         {rational_checked} exact round trips; {took:.2?}"
    ))
}

fn criterion_2() -> Verdict {
    let mut r = rng(2);
    let models = spaces();
    let mut worst = 0.0f64;
    let mut compared = 0usize;
    for k in 0..50 {
        let sp = &models[k % models.len()].space;
        let qbar = random_optional_measure(sp, &mut r);
        let t = r.random_range(0..=sp.horizon());
        let x = random_process(sp, 2, 0, 3.0, &mut r);
        let bar = bar_cond_expectation(sp, &x, std::slice::from_ref(&qbar), t).or_fail("conditional expectation")?;
        for rr in 0..t {
            worst = worst.max(bar.slice(rr).max_abs_diff(x.slice(rr)));
        }
        for a in 0..sp.num_atoms(t) {
            let below: Vec<(usize, usize)> =
                (t..=sp.horizon()).flat_map(|s| sp.descendants(t, a, s).into_iter().map(move |b| (s, b))).collect();
            let mass: f64 = below.iter().map(|&(s, b)| qbar.cell(s, b)).sum();
            if mass <= 0.0 {
                continue;
            }
            for i in 0..2 {
                let direct: f64 = below.iter().map(|&(s, b)| qbar.cell(s, b) * x.slice(s).get(b, i)).sum::<f64>() / mass;
                worst = worst.max((direct - bar.block().get(a, i)).abs());
                compared += 1;
            }
        }
    }
    ensure(worst < 1e-9, || format!("max deviation {worst:e}"))?;
    Ok(format!("50 triples, {compared} positive block entries, max deviation {worst:.1e}"))
}

fn mutual_subset(a: &Polyhedron, b: &Polyhedron) -> Result<bool, String> {
    Ok(a.subset_of(b, TOL).or_fail("subset LP")? && b.subset_of(a, TOL).or_fail("subset LP")?)
}

fn augmented_equal(a: &AugmentedProcessRiskMeasure, b: &AugmentedProcessRiskMeasure) -> Result<bool, String> {
    let mut ok = mutual_subset(a.rho().polyhedron(), b.rho().polyhedron())?;
    ensure(a.restricted().len() == b.restricted().len(), || "restricted counts differ".into())?;
    for (x, y) in a.restricted().iter().zip(b.restricted()) {
        ok &= mutual_subset(x.polyhedron(), y.polyhedron())?;
    }
    Ok(ok)
}

fn axiom_verdicts(r: &risktree::axioms::AxiomReport) -> [bool; 3] {
    [r.is_normalized(), r.is_convex(), r.is_coherent()]
}

fn criterion_3() -> Verdict {
    let start = Instant::now();
    let mut lifts = 0;
    let mut projections = 0;
    let mut pool: Vec<(ScenarioSpace, AugmentedProcessRiskMeasure, String)> = Vec::new();
    for m in spaces() {
        let sp = &m.space;
        for t in sp.times() {
            for (name, aug) in instances(sp, t) {
                let lifted = lift(sp, &aug).or_fail("lift")?;
                let back = project(sp, &lifted).or_fail("project")?;
                ensure(augmented_equal(&back, &aug)?, || format!("project ∘ lift differs for {name} on {}", m.name))?;
                lifts += 1;
                pool.push((sp.clone(), aug, format!("{name} on {}", m.name)));
            }
            for (name, abar) in vector_instances(sp, t) {
                let report = check_axioms_vector(sp, &abar, 6, 0, TOL).or_fail("axioms")?;
                ensure(report.holds(Axiom::TimeDecomposable), || format!("{name} is not time decomposable"))?;
                let back = lift(sp, &project(sp, &abar).or_fail("project")?).or_fail("lift")?;
                ensure(mutual_subset(back.polyhedron(), abar.polyhedron())?, || {
                    format!("lift ∘ project differs for {name} on {}", m.name)
                })?;
                projections += 1;
            }
        }
    }

    let mut r = rng(3);
    let mut agreed = 0;
    for k in 0..20 {
        let (sp, aug, name) = &pool[r.random_range(0..pool.len())];
        let inh = inheritance_check(sp, aug, 8, k, TOL).or_fail("inheritance")?;
        ensure(inh.agrees(), || format!("inheritance disagrees for {name}: {inh:?}"))?;
        // Second route: each component and the lift sampled on their own.
        let seed = 100 + k;
        let mut parts = axiom_verdicts(&check_axioms_process(aug.rho(), 8, seed, TOL).or_fail("process axioms")?);
        for rs in aug.restricted() {
            let v = axiom_verdicts(&check_axioms_restricted(rs, 8, seed, TOL).or_fail("restricted axioms")?);
            for (p, q) in parts.iter_mut().zip(v) {
                *p &= q;
            }
        }
        let lifted = lift(sp, aug).or_fail("lift")?;
        let whole = axiom_verdicts(&check_axioms_vector(sp, &lifted, 8, seed, TOL).or_fail("vector axioms")?);
        ensure(parts == whole && parts == inh.augmented, || {
            format!("independent verdicts for {name}: parts {parts:?}, lift {whole:?}, harness {:?}", inh.augmented)
        })?;
        agreed += 1;
    }
    let took = within(start, Duration::from_secs(30), "primal equivalence")?;
    Ok(format!("{lifts} project∘lift and {projections} lift∘project identities; {agreed} inheritance verdicts agree; {took:.2?}"))
}

fn criterion_4() -> Verdict {
    let mut r = rng(4);
    let mut checked = 0;
    let mut inside = 0;
    for m in spaces() {
        let sp = &m.space;
        let mut augs = Vec::new();
        let mut vecs = Vec::new();
        for t in sp.times() {
            augs.extend(instances(sp, t));
            vecs.extend(vector_instances(sp, t));
        }
        let lifted: Vec<VectorAcceptanceSet> = augs.iter().map(|(_, a)| lift_acceptance(sp, a)).collect::<Result<_, _>>().or_fail("lift")?;
        let projected: Vec<AugmentedProcessRiskMeasure> =
            vecs.iter().map(|(_, v)| project_acceptance(sp, v)).collect::<Result<_, _>>().or_fail("project")?;
        for n in 0..200 {
            let (name, aug, abar) = if n % 2 == 0 {
                let k = r.random_range(0..augs.len());
                (&augs[k].0, &augs[k].1, &lifted[k])
            } else {
                let k = r.random_range(0..vecs.len());
                (&vecs[k].0, &projected[k], &vecs[k].1)
            };
            let t = aug.time();
            let d = aug.eligible().d;
            let x = if n % 3 == 0 {
                random_process(sp, d, 0, 2.0, &mut r)
            } else {
                random_integer_process(sp, d, 0, 2, &mut r)
            };
            let whole = abar.contains(&x, 1e-9);
            let parts = aug.rho().contains(&x.truncate_from(t), 1e-9)
                && aug.restricted().iter().all(|rs| rs.contains(x.slice(rs.time()), 1e-9));
            ensure(whole == parts, || format!("membership differs for {name} on {}: lifted {whole}, parts {parts}", m.name))?;
            inside += whole as usize;
            checked += 1;
        }
    }
    Ok(format!("{checked} memberships agree ({inside} accepted)"))
}

fn criterion_5() -> Verdict {
    let mut r = rng(5);
    let mut violations = Vec::new();
    let mut checked = 0;
    for m in spaces() {
        let sp = &m.space;
        for n in 0..100 {
            let t = r.random_range(0..=sp.horizon());
            let pool = instances(sp, t);
            let (name, aug) = &pool[n % pool.len()];
            let e = aug.eligible();
            let x = random_process(sp, e.d, 0, 3.0, &mut r);

            let a = aug.rho();
            let xt = x.truncate_from(t);
            let qw = random_process_dual(sp, t, e, &mut r);
            let library = rho_eval(a, &xt)
                .or_fail("ρ")?
                .subset_of(&dual_term_process(sp, a, &xt, &qw).or_fail("dual term")?, TOL)
                .or_fail("subset")?;
            let flat = a.coords().flatten(&xt);
            let joint = a.linear().eval_joint(&flat).or_fail("joint ρ")?;
            let oracle = (0..sp.num_atoms(t)).all(|atom| {
                weak_duality_holds(&joint, a.linear(), &flat, &process_functional(sp, a.coords(), &qw, atom), a.polyhedron())
            });
            if !(library && oracle) {
                violations.push(format!("ρ_{t} for {name} on {} (library {library}, oracle {oracle})", m.name));
            }

            let abar = lift(sp, aug).or_fail("lift")?;
            let vw = random_vector_dual(sp, t, e, &mut r);
            let library = rbar_eval(&abar, &x)
                .or_fail("R̄")?
                .subset_of(&dual_term_vector(sp, &abar, &x, &vw).or_fail("dual term")?, TOL)
                .or_fail("subset")?;
            let flat = abar.coords().flatten(&x);
            let joint = rbar_eval_joint(&abar, &x).or_fail("joint R̄")?;
            let oracle = vector_functionals(sp, abar.coords(), &vw)
                .iter()
                .all(|ell| weak_duality_holds(&joint, abar.linear(), &flat, ell, abar.polyhedron()));
            if !(library && oracle) {
                violations.push(format!("R̄_{t} for {name} on {} (library {library}, oracle {oracle})", m.name));
            }
            checked += 2;
        }
    }
    ensure(violations.is_empty(), || format!("{} violations, first: {}", violations.len(), violations[0]))?;
    Ok(format!("{checked} inclusions over 100 duals per fixture and side, 0 violations"))
}

fn lower_end(p: &Polyhedron) -> (f64, f64) {
    (inf(p, &[1.0]), -inf(p, &[-1.0]))
}

fn criterion_6() -> Verdict {
    let sp = risktree::fixtures::two_state_t1();
    let e = Eligible::full(1);
    let a = process_family(&sp, &ProcessFamily::WorstCase, 0, e).or_fail("worst case")?;
    let pduals = dirac_family_process(&sp, 0, e);
    let abar = vector_family(&sp, &VectorFamily::NonNegative, 0, e).or_fail("cone")?;
    let vduals = dirac_family_vector(&sp, 0, e);
    let mut r = rng(6);
    for k in 0..40 {
        let x = if k % 2 == 0 { random_process(&sp, 1, 0, 4.0, &mut r) } else { random_integer_process(&sp, 1, 0, 3, &mut r) };
        let min = x.slices().iter().flat_map(|f| f.values().to_vec()).fold(f64::INFINITY, f64::min);
        let dual = dual_eval_process(&sp, &a, &x, &pduals).or_fail("dual ρ")?;
        let (lo, hi) = lower_end(dual.cell(0));
        ensure((lo + min).abs() <= TOL && hi == f64::INFINITY, || format!("ρ_0 = [{lo}, {hi}], expected [{}, ∞)", -min))?;
        let primal = rho_eval(&a, &x).or_fail("ρ")?;
        ensure(primal.equals(&dual, TOL).or_fail("compare")?, || "primal ρ_0 differs from the Dirac dual".into())?;

        let dual = dual_eval_vector(&sp, &abar, &x, &vduals).or_fail("dual R̄")?;
        let (lo, hi) = lower_end(dual.cell(0));
        ensure((lo + min).abs() <= TOL && hi == f64::INFINITY, || format!("R̄_0 = [{lo}, {hi}], expected [{}, ∞)", -min))?;
        let primal = rbar_eval(&abar, &x).or_fail("R̄")?;
        ensure(primal.equals(&dual, TOL).or_fail("compare")?, || "primal R̄_0 differs from the Dirac dual".into())?;
    }
    Ok(format!("40 positions: ρ_0 and R̄_0 equal [−min X, ∞) via {} and {} Dirac duals", pduals.len(), vduals.len()))
}

fn criterion_7() -> Verdict {
    let mut r = rng(7);
    let models = spaces();
    let mut pairs = 0;
    let mut values = 0;
    while pairs < 50 {
        let sp = &models[pairs % models.len()].space;
        let t = r.random_range(0..=sp.horizon());
        let pool = instances(sp, t);
        let (name, aug) = &pool[r.random_range(0..pool.len())];
        let e = aug.eligible();
        let abar = lift(sp, aug).or_fail("lift")?;
        let rho = aug.rho();

        // Lifted dual split into its parts.
        let vw = random_vector_dual(sp, t, e, &mut r);
        ensure(penalty_decompose_check(sp, aug, &vw, TOL).or_fail("decompose")?.holds(), || format!("ᾱ split fails for {name}"))?;
        let mapped = map_dual_to_process(sp, &vw, e).or_fail("W_t")?;
        let fs = vector_functionals(sp, abar.coords(), &vw);
        let mut k = 0;
        for rs in aug.restricted() {
            let s = rs.time();
            for b in 0..sp.num_atoms(s) {
                let local: Vec<f64> =
                    rs.coords().entries().map(|(_, c, i)| if c == b { vw.w.slice(s).get(b, i) } else { 0.0 }).collect();
                let (lhs, rhs) = (inf(abar.polyhedron(), &fs[k]), inf(rs.polyhedron(), &local));
                ensure(same_extended(lhs, rhs, TOL), || format!("realized cell ({s},{b}) of {name}: {lhs} vs {rhs}"))?;
                k += 1;
                values += 1;
            }
        }
        for a in 0..sp.num_atoms(t) {
            let lhs = inf(abar.polyhedron(), &fs[k + a]);
            let rhs = inf(rho.polyhedron(), &process_functional(sp, rho.coords(), &mapped, a));
            ensure(same_extended(lhs, rhs, TOL), || format!("block atom {a} of {name}: {lhs} vs {rhs}"))?;
            values += 1;
        }

        // Process dual carried to the optional space.
        let pw = random_process_dual(sp, t, e, &mut r);
        ensure(penalty_reverse_process(sp, aug, &pw, TOL).or_fail("reverse")?.holds(), || format!("α_t reverse fails for {name}"))?;
        let vector = map_dual_to_vector(sp, &pw, e).or_fail("W̄_t")?;
        let fs = vector_functionals(sp, abar.coords(), &vector);
        let offset = fs.len() - sp.num_atoms(t);
        for a in 0..sp.num_atoms(t) {
            let lhs = inf(rho.polyhedron(), &process_functional(sp, rho.coords(), &pw, a));
            let rhs = inf(abar.polyhedron(), &fs[offset + a]);
            ensure(same_extended(lhs, rhs, TOL), || format!("α_t atom {a} of {name}: {lhs} vs {rhs}"))?;
            values += 1;
        }

        // A single realized weight paired with P̄.
        for rs in aug.restricted() {
            let s = rs.time();
            let w = Field::from_fn(sp, s, e.d, |_, i| if i < e.m { r.random_range(0.0..2.0) } else { 0.0 });
            ensure(penalty_reverse_restricted(sp, aug, s, &w, TOL).or_fail("reverse")?.holds(), || {
                format!("α_R{s} reverse fails for {name}")
            })?;
            let fs = vector_functionals(sp, abar.coords(), &slice_dual(sp, t, s, &w).or_fail("slice dual")?);
            let base: usize = (0..s).map(|q| sp.num_atoms(q)).sum();
            for b in 0..sp.num_atoms(s) {
                let local: Vec<f64> = rs.coords().entries().map(|(_, c, i)| if c == b { w.get(b, i) } else { 0.0 }).collect();
                let (lhs, rhs) = (inf(rs.polyhedron(), &local), inf(abar.polyhedron(), &fs[base + b]));
                ensure(same_extended(lhs, rhs, TOL), || format!("α_R{s} atom {b} of {name}: {lhs} vs {rhs}"))?;
                values += 1;
            }
        }
        pairs += 1;
    }
    Ok(format!("{pairs} convex pairs, {values} penalty values match in both directions"))
}

fn criterion_8() -> Verdict {
    let mut r = rng(8);
    let models = spaces();
    let mut worst = 0.0f64;
    for k in 0..100 {
        let sp = &models[k % models.len()].space;
        let t = r.random_range(0..=sp.horizon());
        let e = if k % 2 == 0 { Eligible::full(1) } else { Eligible::new(2, 1).unwrap() };
        let qw = random_process_dual(sp, t, e, &mut r);
        let back = map_dual_to_process(sp, &map_dual_to_vector(sp, &qw, e).or_fail("W̄_t")?, e).or_fail("W_t")?;
        for s in t..=sp.horizon() {
            let direct = w_t_s(sp, qw.q_at(s), qw.w_at(s), s);
            let round = w_t_s(sp, back.q_at(s), back.w_at(s), s);
            worst = worst.max(direct.max_abs_diff(&round));
            let lib = w_map(sp, qw.q_at(s), qw.w_at(s), s).or_fail("w map")?;
            let lib_back = w_map(sp, back.q_at(s), back.w_at(s), s).or_fail("w map")?;
            worst = worst.max(direct.max_abs_diff(&lib)).max(round.max_abs_diff(&lib_back));
        }
    }
    ensure(worst < 1e-9, || format!("max deviation {worst:e}"))?;
    Ok(format!("100 process duals, max deviation {worst:.1e}"))
}

fn fixture_config(m: &ModelConfig) -> FixtureConfig {
    FixtureConfig { per_pair: m.checks.fixtures_per_pair, seed: 0, ..FixtureConfig::default() }
}

fn union_options() -> UnionOptions {
    UnionOptions { seed: 0, ..UnionOptions::default() }
}

fn rebuild(sp: &ScenarioSpace, start: usize, d: usize, slices: &[Vec<f64>]) -> Process {
    let fields = slices.iter().enumerate().map(|(r, v)| Field::from_values(sp, r, d, v.clone()).unwrap()).collect();
    Process::from_slices(sp, start, fields).unwrap()
}

/// Replays a violation: the witness cash makes the pivot acceptable at `t`
/// while no comparison member is, and, for singleton families, the
/// hypothesis inclusion at `s` holds.
fn replay(
    sp: &ScenarioSpace,
    o: &FixtureOutcome,
    d: usize,
    start: usize,
    at: impl Fn(usize) -> (Polyhedron, risktree::acceptance::LinearSet, risktree::acceptance::Coords),
) -> Result<(), String> {
    let Implication::Violated { point, .. } = &o.implication else { return Err(format!("{} is not a violation", o.id)) };
    let inputs = o.inputs.as_ref().ok_or_else(|| format!("{} has no inputs", o.id))?;
    let pivot = rebuild(sp, start, d, &inputs.pivot);
    let family: Vec<Process> = inputs.family.iter().map(|y| rebuild(sp, start, d, y)).collect();
    let (set, lin, coords) = at(o.t);
    ensure(set.contains(&lin.shift(&coords.flatten(&pivot), point), TOL), || format!("{}: pivot not accepted", o.id))?;
    for y in &family {
        ensure(!set.contains(&lin.shift(&coords.flatten(y), point), TOL), || format!("{}: a member is accepted", o.id))?;
    }
    if let [y] = family.as_slice() {
        let (_, lin, coords) = at(o.t.max(o.s));
        let cut = |p: &Process| if start == 0 { p.clone() } else { p.truncate_from(o.s) };
        let hx = lin.eval_joint(&coords.flatten(&cut(&pivot))).or_fail("hypothesis")?;
        let hy = lin.eval_joint(&coords.flatten(&cut(y))).or_fail("hypothesis")?;
        ensure(hx.subset_of(&hy, TOL).or_fail("subset")?, || format!("{}: hypothesis does not hold", o.id))?;
    }
    Ok(())
}

fn parts_of_process(a: &ProcessAcceptanceSet) -> (Polyhedron, risktree::acceptance::LinearSet, risktree::acceptance::Coords) {
    (a.polyhedron().clone(), a.linear().clone(), a.coords().clone())
}

fn parts_of_vector(a: &VectorAcceptanceSet) -> (Polyhedron, risktree::acceptance::LinearSet, risktree::acceptance::Coords) {
    (a.polyhedron().clone(), a.linear().clone(), a.coords().clone())
}

fn criterion_9() -> Verdict {
    let start = Instant::now();
    let opts = union_options();
    let mut lines = Vec::new();
    for (name, _) in risktree_cli::SHIPPED {
        let m = model(name);
        let report: EquivalenceReport =
            equivalence_harness(&m.space, &m.family, &fixture_config(&m), &opts).or_fail("harness")?;
        ensure(report.agrees(), || format!("{name}: verdicts differ per fixture"))?;
        ensure(report.joint_holds() == report.vector_holds(), || format!("{name}: overall verdicts differ"))?;
        lines.push(format!("{name} {}", if report.joint_holds() { "holds" } else { "fails" }));
    }

    let good = model("binary_T2");
    let report = equivalence_harness(&good.space, &good.family, &fixture_config(&good), &opts).or_fail("harness")?;
    ensure(report.joint_holds() && report.vector_holds(), || "worst case family is not consistent".into())?;

    let bad = model("binary_T2_broken");
    let report = equivalence_harness(&bad.space, &bad.family, &fixture_config(&bad), &opts).or_fail("harness")?;
    ensure(!report.joint_holds() && !report.vector_holds(), || "broken family passes".into())?;
    let sp = &bad.space;
    let d = bad.eligible.d;
    let process_bad = report
        .joint
        .outcomes()
        .find(|o| o.condition == Condition::Process && !o.implication.holds())
        .ok_or("no process witness")?;
    replay(sp, process_bad, d, process_bad.t, |t| parts_of_process(bad.family.rho_at(t)))?;
    let lifted = bad.family.lift(sp).or_fail("lift")?;
    let vector_bad = report.vector.violations().next().ok_or("no vector witness")?;
    replay(sp, vector_bad, d, 0, |t| parts_of_vector(lifted.at(t)))?;

    let again = equivalence_harness(&bad.space, &bad.family, &fixture_config(&bad), &opts).or_fail("harness")?;
    ensure(again == report, || "reports differ between runs with seed 0".into())?;
    let took = within(start, Duration::from_secs(60), "MPTC equivalence")?;
    Ok(format!("{}; witnesses {} and {} replay; {took:.2?}", lines.join(", "), process_bad.id, vector_bad.id))
}

fn criterion_10() -> Verdict {
    let mut bytes = Vec::new();
    for _ in 0..2 {
        let dir = tempfile::tempdir().or_fail("tempdir")?;
        let out = dir.path().join("run");
        let argv = ["risktree", "two_state_T1", "--suite", "all", "--seed", "0", "--out", out.to_str().unwrap()];
        let (mut stdout, mut stderr) = (Vec::new(), Vec::new());
        let code = risktree_cli::run(argv, &mut stdout, &mut stderr);
        ensure(code == 0, || format!("exit code {code}: {}", String::from_utf8_lossy(&stderr)))?;
        bytes.push(std::fs::read(out.join("report.toml")).or_fail("report.toml")?);
    }
    ensure(bytes[0] == bytes[1], || "machine reports differ".into())?;
    Ok(format!("exit 0 twice, identical {}-byte machine reports", bytes[0].len()))
}

#[test]
fn acceptance_criteria() {
    let criteria: [(&str, fn() -> Verdict); 10] = [
        ("decomposition fidelity", criterion_1),
        ("optional conditional expectation", criterion_2),
        ("primal equivalence", criterion_3),
        ("acceptance membership", criterion_4),
        ("dual outer bounds", criterion_5),
        ("worst-case Dirac duals", criterion_6),
        ("penalty decomposition", criterion_7),
        ("dual map round trip", criterion_8),
        ("MPTC equivalence", criterion_9),
        ("suite determinism", criterion_10),
    ];
    let mut failed = Vec::new();
    for (n, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let verdict = std::panic::catch_unwind(f).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let took = start.elapsed().as_secs_f64();
        match verdict {
            Ok(detail) => println!("criterion {:>2} pass  {name}: {detail} [{took:.2} s]", n + 1),
            Err(why) => {
                println!("criterion {:>2} FAIL  {name}: {why} [{took:.2} s]", n + 1);
                failed.push(n + 1);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
