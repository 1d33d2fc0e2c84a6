//! Set-valued conditional risk measures for processes.
//!
//! `ρ_t(X) = {m ∈ M_t : X + m 1_{𝕋_t} ∈ A_t}` for a polyhedral acceptance
//! set `A_t` over the coordinates `(s, atom of F_s, asset)` with `s ≥ t`.

use crate::acceptance::{CashMap, Coords, LinearDual, LinearSet};
use crate::axioms::{check_linear, AxiomReport, Probe, RISK_AXIOMS};
use crate::error::{Error, Result};
use crate::polyhedra::{ConditionalPolyhedron, Halfspace, Layout, Polyhedron, Support};
use crate::space::{w_map, Eligible, Field, Measure, Process, ScenarioSpace, VectorMeasure};

/// An `F_t`-decomposable polyhedral acceptance set in `𝓡_t^{∞,d}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProcessAcceptanceSet {
    t: usize,
    eligible: Eligible,
    linear: LinearSet,
}

impl ProcessAcceptanceSet {
    /// Rows must each involve the subtree of a single `F_t` atom.
    pub fn new(space: &ScenarioSpace, t: usize, eligible: Eligible, set: Polyhedron) -> Result<Self> {
        space.check_time(t)?;
        let coords = Coords::process(space, t, eligible.d);
        let cash = CashMap::process(space, &coords, t, eligible.m);
        let linear = LinearSet::new(coords, set, cash, Layout::Atoms { time: t })?;
        if let Some((row, cells)) = linear.coupling_row() {
            return Err(Error::NotDecomposable(format!("row {row} couples the F_{t} atoms {cells:?}")));
        }
        Ok(Self { t, eligible, linear })
    }

    pub fn from_rows(space: &ScenarioSpace, t: usize, eligible: Eligible, rows: Vec<Halfspace>) -> Result<Self> {
        let dim = Coords::process(space, t, eligible.d).len();
        Self::new(space, t, eligible, Polyhedron::new(dim, rows)?)
    }

    pub fn time(&self) -> usize {
        self.t
    }

    pub fn eligible(&self) -> Eligible {
        self.eligible
    }

    pub fn linear(&self) -> &LinearSet {
        &self.linear
    }

    pub fn polyhedron(&self) -> &Polyhedron {
        self.linear.set()
    }

    pub fn coords(&self) -> &Coords {
        self.linear.coords()
    }

    pub fn contains(&self, x: &Process, tol: f64) -> bool {
        self.linear.contains(&self.coords().flatten(x), tol)
    }

    pub fn equals(&self, other: &ProcessAcceptanceSet, tol: f64) -> Result<bool> {
        Ok(self.t == other.t && self.polyhedron().equals(other.polyhedron(), tol)?)
    }
}

/// `ρ_t(X) = {m ∈ M_t : X + m 1_{𝕋_t} ∈ A_t}`; values before time `t` are
/// ignored.
pub fn rho_eval(a: &ProcessAcceptanceSet, x: &Process) -> Result<ConditionalPolyhedron> {
    check_dim(a, x)?;
    a.linear.eval(&a.coords().flatten(x))
}

fn check_dim(a: &ProcessAcceptanceSet, x: &Process) -> Result<()> {
    if x.dim() != a.eligible.d {
        return Err(Error::Dimension(format!("process of dimension {} for d = {}", x.dim(), a.eligible.d)));
    }
    Ok(())
}

/// A dynamic risk measure `(ρ_t)_{t ∈ 𝕋}` given by its acceptance sets.
#[derive(Debug, Clone, PartialEq)]
pub struct ProcessRiskMeasure {
    pub name: String,
    sets: Vec<ProcessAcceptanceSet>,
}

impl ProcessRiskMeasure {
    pub fn new(name: impl Into<String>, sets: Vec<ProcessAcceptanceSet>) -> Result<Self> {
        if sets.iter().enumerate().any(|(t, a)| a.t != t) {
            return Err(Error::InvalidArgument("acceptance sets must be listed for t = 0, 1, …, T".into()));
        }
        Ok(Self { name: name.into(), sets })
    }

    pub fn at(&self, t: usize) -> &ProcessAcceptanceSet {
        &self.sets[t]
    }

    pub fn sets(&self) -> &[ProcessAcceptanceSet] {
        &self.sets
    }

    pub fn horizon(&self) -> usize {
        self.sets.len() - 1
    }

    pub fn eval(&self, t: usize, x: &Process) -> Result<ConditionalPolyhedron> {
        rho_eval(&self.sets[t], x)
    }
}

/// Sampled verification of the risk-measure axioms and optional properties.
pub fn check_axioms_process(a: &ProcessAcceptanceSet, samples: usize, seed: u64, tol: f64) -> Result<AxiomReport> {
    let probe = Probe::random(&a.linear, samples, seed);
    check_linear(&a.linear, &probe, &RISK_AXIOMS, tol)
}

/// `(Q, w)` with `Q_s` a `d`-vector of measures and `w_s` an `F_t` field for
/// each `s ∈ {t, …, T}` (index `s − t`).
#[derive(Debug, Clone, PartialEq)]
pub struct ProcessDualVariable {
    pub t: usize,
    pub q: Vec<VectorMeasure>,
    pub w: Vec<Field>,
}

impl ProcessDualVariable {
    pub fn new(space: &ScenarioSpace, t: usize, q: Vec<VectorMeasure>, w: Vec<Field>) -> Result<Self> {
        space.check_time(t)?;
        let n = space.horizon() - t + 1;
        if q.len() != n || w.len() != n {
            return Err(Error::Dimension(format!("need {n} measures and weights for t = {t}")));
        }
        if w.iter().any(|f| f.time() != t) {
            return Err(Error::Dimension("weights must be F_t-measurable".into()));
        }
        let d = w[0].dim();
        if q.iter().any(|v| v.dim() != d) || w.iter().any(|f| f.dim() != d) {
            return Err(Error::Dimension("measures and weights must have d components".into()));
        }
        Ok(Self { t, q, w })
    }

    pub fn dim(&self) -> usize {
        self.w[0].dim()
    }

    pub fn q_at(&self, s: usize) -> &VectorMeasure {
        &self.q[s - self.t]
    }

    pub fn w_at(&self, s: usize) -> &Field {
        &self.w[s - self.t]
    }

    /// `Σ_s w_s` restricted to the eligible coordinates, per atom.
    pub fn total_weight(&self, space: &ScenarioSpace, m: usize) -> Vec<Vec<f64>> {
        (0..space.num_atoms(self.t))
            .map(|a| (0..m).map(|i| self.w.iter().map(|f| f.get(a, i)).sum()).collect())
            .collect()
    }

    /// Membership in `𝒲_t`, or the reason it fails.
    pub fn admissibility(&self, space: &ScenarioSpace, eligible: Eligible, tol: f64) -> Result<()> {
        let t = self.t;
        for (k, vm) in self.q.iter().enumerate() {
            for (i, qi) in vm.components().iter().enumerate() {
                if !qi.agrees_with_reference_on(space, t, tol) {
                    return Err(Error::NotAdmissible(format!("Q_{{{},{i}}} differs from P on F_{t}", t + k)));
                }
            }
        }
        for (k, f) in self.w.iter().enumerate() {
            let s = t + k;
            if (0..f.num_atoms()).any(|a| f.at(a)[..eligible.m].iter().any(|&v| v < -tol)) {
                return Err(Error::NotAdmissible(format!("w_{s} is negative on an eligible asset")));
            }
            let img = w_map(space, &self.q[k], f, s)?;
            if img.values().iter().any(|&v| v < -tol) {
                return Err(Error::NotAdmissible(format!("w_t^{s}(Q_{s}, w_{s}) has a negative entry")));
            }
        }
        let total = self.total_weight(space, eligible.m);
        if total.iter().flatten().all(|x| x.abs() <= tol) {
            return Err(Error::NotAdmissible("Σ_s w_s lies in the annihilator of M".into()));
        }
        Ok(())
    }

    pub fn is_admissible(&self, space: &ScenarioSpace, eligible: Eligible, tol: f64) -> bool {
        self.admissibility(space, eligible, tol).is_ok()
    }

    /// `Z ↦ Σ_s w_s(a)^⊤ E_t^{Q_s}[Z_s](a)` per atom `a`, as coefficient
    /// vectors over the process coordinates.
    pub fn linear_dual(&self, space: &ScenarioSpace, coords: &Coords, m: usize) -> LinearDual {
        let t = self.t;
        let d = self.dim();
        let mut functionals = vec![vec![0.0; coords.len()]; space.num_atoms(t)];
        for (a, ell) in functionals.iter_mut().enumerate() {
            for s in t..=space.horizon() {
                for i in 0..d {
                    let wi = self.w_at(s).get(a, i);
                    if wi == 0.0 {
                        continue;
                    }
                    for (b, p) in self.q_at(s).component(i).conditional_weights(space, t, a, s) {
                        let k = coords.index(s, b, i).expect("coordinate in range");
                        ell[k] += wi * p;
                    }
                }
            }
        }
        LinearDual { functionals, normals: self.total_weight(space, m) }
    }
}

fn dual_for(space: &ScenarioSpace, a: &ProcessAcceptanceSet, qw: &ProcessDualVariable) -> Result<LinearDual> {
    if qw.t != a.t || qw.dim() != a.eligible.d {
        return Err(Error::Dimension("dual variable does not match the acceptance set".into()));
    }
    qw.admissibility(space, a.eligible, 1e-9)?;
    Ok(qw.linear_dual(space, a.coords(), a.eligible.m))
}

/// `α_t(Q, w)` per atom. An unbounded supremum gives an empty cell.
pub fn penalty_process(
    space: &ScenarioSpace,
    a: &ProcessAcceptanceSet,
    qw: &ProcessDualVariable,
) -> Result<ConditionalPolyhedron> {
    let dual = dual_for(space, a, qw)?;
    ConditionalPolyhedron::new(Layout::Atoms { time: a.t }, a.eligible.m, dual.penalty(&a.linear)?)
}

/// The term of one dual variable in the dual representation.
pub fn dual_term_process(
    space: &ScenarioSpace,
    a: &ProcessAcceptanceSet,
    x: &Process,
    qw: &ProcessDualVariable,
) -> Result<ConditionalPolyhedron> {
    check_dim(a, x)?;
    let dual = dual_for(space, a, qw)?;
    ConditionalPolyhedron::new(Layout::Atoms { time: a.t }, a.eligible.m, dual.term(&a.linear, &a.coords().flatten(x))?)
}

/// Intersection of the dual terms over a finite list (`M_t` when empty).
pub fn dual_eval_process(
    space: &ScenarioSpace,
    a: &ProcessAcceptanceSet,
    x: &Process,
    duals: &[ProcessDualVariable],
) -> Result<ConditionalPolyhedron> {
    let mut out = ConditionalPolyhedron::full(space, Layout::Atoms { time: a.t }, a.eligible.m);
    for qw in duals {
        out = out.intersect(&dual_term_process(space, a, x, qw)?)?;
    }
    Ok(out)
}

/// The penalty formula applied without the `𝒲_t` membership check; a cell
/// whose weight vanishes comes out full or empty.
pub fn penalty_process_unchecked(
    space: &ScenarioSpace,
    a: &ProcessAcceptanceSet,
    qw: &ProcessDualVariable,
) -> Result<ConditionalPolyhedron> {
    if qw.t != a.t || qw.dim() != a.eligible.d {
        return Err(Error::Dimension("dual variable does not match the acceptance set".into()));
    }
    let dual = qw.linear_dual(space, a.coords(), a.eligible.m);
    ConditionalPolyhedron::new(Layout::Atoms { time: a.t }, a.eligible.m, dual.penalty(&a.linear)?)
}

/// Membership in `𝒲_t^max` for a conical acceptance set.
pub fn is_max_dual_process(space: &ScenarioSpace, a: &ProcessAcceptanceSet, qw: &ProcessDualVariable) -> Result<bool> {
    if !a.linear.is_cone()? {
        return Err(Error::NotCone);
    }
    dual_for(space, a, qw)?;
    pairing_nonnegative(space, a, qw)
}

/// `inf_{Z ∈ A_t} Σ_s w_s^⊤ E_t^{Q_s}[Z_s] ≥ 0` on every atom, without the
/// membership and cone checks.
pub fn pairing_nonnegative(space: &ScenarioSpace, a: &ProcessAcceptanceSet, qw: &ProcessDualVariable) -> Result<bool> {
    let dual = qw.linear_dual(space, a.coords(), a.eligible.m);
    for ell in &dual.functionals {
        match a.linear.inf_linear(ell)? {
            Support::Attained { value, .. } if value >= -1e-9 => {}
            Support::Empty => {}
            _ => return Ok(false),
        }
    }
    Ok(true)
}

/// Dirac duals covering every `(s, state, asset)`: within each `F_t` atom the
/// `k`-th state (cyclically) carries all of `Q_{s,i}`, and only `w_s = e_i`
/// is non-zero.
pub fn dirac_family_process(space: &ScenarioSpace, t: usize, eligible: Eligible) -> Vec<ProcessDualVariable> {
    let n = space.horizon() - t + 1;
    let width = (0..space.num_atoms(t)).map(|a| space.atom_states(t, a).len()).max().unwrap_or(1);
    let mut out = Vec::new();
    for s in t..=space.horizon() {
        for k in 0..width {
            let mut masses = vec![0.0; space.num_states()];
            for a in 0..space.num_atoms(t) {
                let states = space.atom_states(t, a);
                masses[states[k % states.len()]] = space.atom_prob(t, a);
            }
            let dirac = Measure::from_masses(space, &masses).expect("atomwise Dirac masses are normalized");
            for i in 0..eligible.m {
                let q = (0..n)
                    .map(|j| {
                        let comp = if t + j == s { dirac.clone() } else { Measure::reference(space) };
                        VectorMeasure::new(vec![comp; eligible.d])
                    })
                    .collect();
                let mut unit = vec![0.0; eligible.d];
                unit[i] = 1.0;
                let w = (0..n)
                    .map(|j| if t + j == s { Field::constant(space, t, &unit) } else { Field::zeros(space, t, eligible.d) })
                    .collect();
                out.push(ProcessDualVariable { t, q, w });
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{process_family, ProcessFamily};
    use crate::polyhedra::SET_TOL;

    fn two_state() -> ScenarioSpace {
        ScenarioSpace::new(
            vec!["u".into(), "dn".into()],
            vec![vec![vec![0, 1]], vec![vec![0], vec![1]]],
            vec![0.5, 0.5],
            None,
        )
        .unwrap()
    }

    fn x_of(sp: &ScenarioSpace, x0: f64, x1: [f64; 2]) -> Process {
        Process::from_fn(sp, 1, 0, |t, a, _| if t == 0 { x0 } else { x1[a] })
    }

    #[test]
    fn worst_case_values() {
        let sp = two_state();
        let a = process_family(&sp, &ProcessFamily::WorstCase, 0, Eligible::full(1)).unwrap();
        let v = rho_eval(&a, &Process::zeros(&sp, 1, 0)).unwrap();
        assert!(v.cell(0).equals(&Polyhedron::orthant(&[0.0]), SET_TOL).unwrap());
        let x = x_of(&sp, 0.0, [2.0, -1.0]);
        assert!(rho_eval(&a, &x).unwrap().cell(0).equals(&Polyhedron::orthant(&[1.0]), SET_TOL).unwrap());
        let shifted = x.add_cash(&sp, &Field::constant(&sp, 0, &[3.0]));
        assert!(rho_eval(&a, &shifted).unwrap().cell(0).equals(&Polyhedron::orthant(&[-2.0]), SET_TOL).unwrap());
    }

    #[test]
    fn worst_case_axioms() {
        let sp = two_state();
        let a = process_family(&sp, &ProcessFamily::WorstCase, 0, Eligible::full(1)).unwrap();
        let r = check_axioms_process(&a, 100, 1, SET_TOL).unwrap();
        assert!(r.is_risk_measure() && r.is_coherent() && r.is_normalized(), "{r:?}");
    }

    #[test]
    fn non_monotone_generator_is_caught() {
        let sp = two_state();
        let a = process_family(&sp, &ProcessFamily::NonMonotone, 0, Eligible::full(1)).unwrap();
        let r = check_axioms_process(&a, 20, 2, SET_TOL).unwrap();
        let mono = r.get(crate::axioms::Axiom::Monotone).unwrap();
        assert!(!mono.holds && mono.witness.is_some());
    }

    #[test]
    fn dirac_family_is_exact_for_the_worst_case_cone() {
        let sp = two_state();
        let a = process_family(&sp, &ProcessFamily::WorstCase, 0, Eligible::full(1)).unwrap();
        let duals = dirac_family_process(&sp, 0, Eligible::full(1));
        assert_eq!(duals.len(), 4);
        for x in [x_of(&sp, 0.5, [2.0, -1.0]), x_of(&sp, -4.0, [1.0, 3.0])] {
            let primal = rho_eval(&a, &x).unwrap();
            let dual = dual_eval_process(&sp, &a, &x, &duals).unwrap();
            assert!(primal.equals(&dual, SET_TOL).unwrap());
            for qw in &duals {
                assert!(is_max_dual_process(&sp, &a, qw).unwrap());
            }
        }
    }

    #[test]
    fn penalty_of_the_cone_and_its_shift() {
        let sp = two_state();
        let e = Eligible::full(1);
        let qw = &dirac_family_process(&sp, 0, e)[1];
        let cone = process_family(&sp, &ProcessFamily::WorstCase, 0, e).unwrap();
        assert!(penalty_process(&sp, &cone, qw).unwrap().cell(0).equals(&Polyhedron::orthant(&[0.0]), SET_TOL).unwrap());
        let shifted = process_family(&sp, &ProcessFamily::Shifted { c: vec![-2.0] }, 0, e).unwrap();
        let p = penalty_process(&sp, &shifted, qw).unwrap();
        assert!(p.cell(0).equals(&Polyhedron::orthant(&[2.0]), SET_TOL).unwrap());
    }

    #[test]
    fn empty_dual_list_and_rejections() {
        let sp = two_state();
        let e = Eligible::full(1);
        let a = process_family(&sp, &ProcessFamily::WorstCase, 0, e).unwrap();
        let x = x_of(&sp, 0.0, [1.0, 1.0]);
        assert!(dual_eval_process(&sp, &a, &x, &[]).unwrap().cell(0).is_full());
        let mut bad = dirac_family_process(&sp, 0, e)[0].clone();
        bad.w[0] = Field::constant(&sp, 0, &[-1.0]);
        assert!(matches!(penalty_process(&sp, &a, &bad), Err(Error::NotAdmissible(_))));
        let shifted = process_family(&sp, &ProcessFamily::Shifted { c: vec![1.0] }, 0, e).unwrap();
        assert_eq!(is_max_dual_process(&sp, &shifted, &dirac_family_process(&sp, 0, e)[0]), Err(Error::NotCone));
    }

    #[test]
    fn cone_without_later_constraints_is_not_maximal_for_later_weights() {
        let sp = two_state();
        let e = Eligible::full(1);
        let coords = Coords::process(&sp, 0, 1);
        // {X : X_0 ≥ 0}: nothing constrains time 1.
        let a = ProcessAcceptanceSet::from_rows(&sp, 0, e, vec![Halfspace::new(vec![1.0, 0.0, 0.0], 0.0)]).unwrap();
        assert_eq!(coords.len(), 3);
        let later = dirac_family_process(&sp, 0, e).into_iter().find(|qw| qw.w[1].get(0, 0) == 1.0).unwrap();
        assert!(!is_max_dual_process(&sp, &a, &later).unwrap());
    }

    #[test]
    fn coupled_rows_are_rejected() {
        let sp = two_state();
        // Couples the two time-1 atoms of F_1.
        let rows = vec![Halfspace::new(vec![0.0, 1.0, 1.0], 0.0)];
        assert!(matches!(
            ProcessAcceptanceSet::from_rows(&sp, 1, Eligible::full(1), rows.clone()),
            Err(Error::Dimension(_))
        ));
        let rows = vec![Halfspace::new(vec![1.0, 1.0], 0.0)];
        assert!(matches!(
            ProcessAcceptanceSet::from_rows(&sp, 1, Eligible::full(1), rows),
            Err(Error::NotDecomposable(_))
        ));
    }
}
