//! Set-valued conditional risk measures for random vectors on the optional
//! space, and restricted risk measures on a single time slice.

use crate::acceptance::{CashMap, Coords, LinearDual, LinearSet};
use crate::axioms::{check_linear, Axiom, AxiomOutcome, AxiomReport, Probe, RISK_AXIOMS};
use crate::error::{Error, Result};
use crate::polyhedra::{ConditionalPolyhedron, Halfspace, Layout, Polyhedron, Support};
use crate::space::{
    bar_cond_expectation, bar_w_map, lift_space, Eligible, Field, OptionalField, OptionalMeasure, Process,
    ScenarioSpace,
};

/// A polyhedral acceptance set `Ā_t ⊆ L̄^∞(ℝ^d)` with cash in `M̄_t`.
///
/// Rows may couple `F̄_t` cells; such sets are evaluated jointly.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorAcceptanceSet {
    t: usize,
    eligible: Eligible,
    linear: LinearSet,
}

impl VectorAcceptanceSet {
    pub fn new(space: &ScenarioSpace, t: usize, eligible: Eligible, set: Polyhedron) -> Result<Self> {
        space.check_time(t)?;
        let coords = Coords::process(space, 0, eligible.d);
        let cash = CashMap::optional(space, &coords, t, eligible.m);
        let linear = LinearSet::new(coords, set, cash, Layout::Optional { level: t })?;
        Ok(Self { t, eligible, linear })
    }

    pub fn from_rows(space: &ScenarioSpace, t: usize, eligible: Eligible, rows: Vec<Halfspace>) -> Result<Self> {
        let dim = Coords::process(space, 0, eligible.d).len();
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

    /// Whether every row stays inside one `F̄_t` cell.
    pub fn is_cellwise(&self) -> bool {
        self.linear.coupling_row().is_none()
    }

    pub fn equals(&self, other: &VectorAcceptanceSet, tol: f64) -> Result<bool> {
        Ok(self.t == other.t && self.polyhedron().equals(other.polyhedron(), tol)?)
    }
}

/// `R̄_t(X)` as a joint polyhedron over `F̄_t` cells × `m`.
pub fn rbar_eval_joint(a: &VectorAcceptanceSet, x: &Process) -> Result<Polyhedron> {
    check_dim(a.eligible, x.dim())?;
    a.linear.eval_joint(&a.coords().flatten(x))
}

/// `R̄_t(X) = {m ∈ M̄_t : X + m ∈ Ā_t}` per `F̄_t` cell. Fails with
/// `NotDecomposable` when the value itself couples cells.
pub fn rbar_eval(a: &VectorAcceptanceSet, x: &Process) -> Result<ConditionalPolyhedron> {
    check_dim(a.eligible, x.dim())?;
    a.linear.eval(&a.coords().flatten(x))
}

fn check_dim(e: Eligible, d: usize) -> Result<()> {
    if d != e.d {
        return Err(Error::Dimension(format!("input of dimension {d} for d = {}", e.d)));
    }
    Ok(())
}

/// A family `(R̄_t)_{t ∈ 𝕋}` given by acceptance sets.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorRiskMeasure {
    pub name: String,
    sets: Vec<VectorAcceptanceSet>,
}

impl VectorRiskMeasure {
    pub fn new(name: impl Into<String>, sets: Vec<VectorAcceptanceSet>) -> Result<Self> {
        if sets.iter().enumerate().any(|(t, a)| a.t != t) {
            return Err(Error::InvalidArgument("acceptance sets must be listed for t = 0, 1, …, T".into()));
        }
        Ok(Self { name: name.into(), sets })
    }

    pub fn at(&self, t: usize) -> &VectorAcceptanceSet {
        &self.sets[t]
    }

    pub fn sets(&self) -> &[VectorAcceptanceSet] {
        &self.sets
    }
}

/// Acceptance set `A_{R_s} ⊆ L_s^∞(ℝ^d)` of a restricted risk measure.
#[derive(Debug, Clone, PartialEq)]
pub struct RestrictedAcceptanceSet {
    s: usize,
    eligible: Eligible,
    linear: LinearSet,
}

impl RestrictedAcceptanceSet {
    pub fn new(space: &ScenarioSpace, s: usize, eligible: Eligible, set: Polyhedron) -> Result<Self> {
        space.check_time(s)?;
        let coords = Coords::slice(space, s, eligible.d);
        let cash = CashMap::atoms(space, &coords, eligible.m);
        let linear = LinearSet::new(coords, set, cash, Layout::Atoms { time: s })?;
        if let Some((row, cells)) = linear.coupling_row() {
            return Err(Error::NotDecomposable(format!("row {row} couples the F_{s} atoms {cells:?}")));
        }
        Ok(Self { s, eligible, linear })
    }

    pub fn from_rows(space: &ScenarioSpace, s: usize, eligible: Eligible, rows: Vec<Halfspace>) -> Result<Self> {
        let dim = Coords::slice(space, s, eligible.d).len();
        Self::new(space, s, eligible, Polyhedron::new(dim, rows)?)
    }

    pub fn time(&self) -> usize {
        self.s
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

    pub fn contains(&self, z: &Field, tol: f64) -> bool {
        self.linear.contains(&self.coords().flatten_field(z), tol)
    }

    pub fn equals(&self, other: &RestrictedAcceptanceSet, tol: f64) -> Result<bool> {
        Ok(self.s == other.s && self.polyhedron().equals(other.polyhedron(), tol)?)
    }
}

/// `R_s(Z) = {m ∈ M_s : Z + m ∈ A_{R_s}}`.
pub fn restricted_eval(a: &RestrictedAcceptanceSet, z: &Field) -> Result<ConditionalPolyhedron> {
    check_dim(a.eligible, z.dim())?;
    if z.time() != a.s {
        return Err(Error::Dimension(format!("expected an F_{} field, got time {}", a.s, z.time())));
    }
    a.linear.eval(&a.coords().flatten_field(z))
}

/// Penalty `{u ∈ M_s : w^⊤u ≥ sup_{Z ∈ A_{R_s}} w^⊤(−Z)}` of a restricted
/// risk measure; only the weight enters.
pub fn penalty_restricted(a: &RestrictedAcceptanceSet, w: &Field) -> Result<ConditionalPolyhedron> {
    if w.time() != a.s || w.dim() != a.eligible.d {
        return Err(Error::Dimension("weight does not match the restricted set".into()));
    }
    let dual = restricted_dual(a, w);
    ConditionalPolyhedron::new(Layout::Atoms { time: a.s }, a.eligible.m, dual.penalty(&a.linear)?)
}

fn restricted_dual(a: &RestrictedAcceptanceSet, w: &Field) -> LinearDual {
    let coords = a.coords();
    let n = w.num_atoms();
    let functionals = (0..n)
        .map(|b| coords.entries().map(|(_, c, i)| if c == b { w.get(b, i) } else { 0.0 }).collect())
        .collect();
    let normals = (0..n).map(|b| w.at(b)[..a.eligible.m].to_vec()).collect();
    LinearDual { functionals, normals }
}

/// `inf_{Z ∈ A_{R_s}} w(b)^⊤ Z(b) ≥ 0` on every atom.
pub fn is_max_dual_restricted(a: &RestrictedAcceptanceSet, w: &Field) -> Result<bool> {
    if !a.linear.is_cone()? {
        return Err(Error::NotCone);
    }
    for ell in &restricted_dual(a, w).functionals {
        match a.linear.inf_linear(ell)? {
            Support::Attained { value, .. } if value >= -1e-9 => {}
            _ => return Ok(false),
        }
    }
    Ok(true)
}

pub fn check_axioms_restricted(a: &RestrictedAcceptanceSet, samples: usize, seed: u64, tol: f64) -> Result<AxiomReport> {
    let probe = Probe::random(&a.linear, samples, seed);
    check_linear(&a.linear, &probe, &RISK_AXIOMS, tol)
}

/// Sampled axioms of `R̄_t`, including time decomposability.
pub fn check_axioms_vector(
    space: &ScenarioSpace,
    a: &VectorAcceptanceSet,
    samples: usize,
    seed: u64,
    tol: f64,
) -> Result<AxiomReport> {
    let probe = Probe::random(&a.linear, samples, seed);
    check_axioms_vector_with(space, a, &probe, tol)
}

pub fn check_axioms_vector_with(
    space: &ScenarioSpace,
    a: &VectorAcceptanceSet,
    probe: &Probe,
    tol: f64,
) -> Result<AxiomReport> {
    let mut report = check_linear(&a.linear, probe, &RISK_AXIOMS, tol)?;
    let witness = time_decomposability_witness(space, a, probe, tol)?;
    report.push(AxiomOutcome {
        axiom: Axiom::TimeDecomposable,
        holds: witness.is_none(),
        samples: probe.len(),
        witness,
    });
    Ok(report)
}

/// Checks `R̄_t(X) = Σ_{s<t} R̄_t(X 1_s) 1_s + R̄_t(X 1_{𝕋_t}) 1_{𝕋_t}` by
/// projecting each piece onto its own cells.
fn time_decomposability_witness(
    space: &ScenarioSpace,
    a: &VectorAcceptanceSet,
    probe: &Probe,
    tol: f64,
) -> Result<Option<String>> {
    let t = a.t;
    let m = a.eligible.m;
    let coords = a.coords();
    let os = lift_space(space);
    let zero = vec![0.0; coords.len()];
    for x in std::iter::once(&zero).chain(&probe.xs) {
        let full = a.linear.eval_joint(x)?;
        let mut assembled = Polyhedron::full(0);
        for r in 0..=t {
            let piece: Vec<f64> = coords
                .entries()
                .zip(x)
                .map(|((s, _, _), v)| if s == r || (r == t && s >= t) { *v } else { 0.0 })
                .collect();
            let value = a.linear.eval_joint(&piece)?;
            let first = os.slice_offset(r) * m;
            let keep: Vec<usize> = (first..first + space.num_atoms(r) * m).collect();
            assembled = assembled.product(&value.project(&keep)?);
        }
        if !full.equals(&assembled, tol)? {
            let parts: Vec<String> = x.iter().map(|v| format!("{v:.4}")).collect();
            return Ok(Some(format!("X = [{}]", parts.join(", "))));
        }
    }
    Ok(None)
}

/// `(Q̄, w̄)` with one optional measure per asset and an `F̄_t`-measurable
/// weight.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorDualVariable {
    pub t: usize,
    pub q: Vec<OptionalMeasure>,
    pub w: OptionalField,
}

impl VectorDualVariable {
    pub fn new(q: Vec<OptionalMeasure>, w: OptionalField) -> Result<Self> {
        if q.len() != w.dim() {
            return Err(Error::Dimension("one optional measure per asset is required".into()));
        }
        Ok(Self { t: w.level(), q, w })
    }

    pub fn dim(&self) -> usize {
        self.w.dim()
    }

    /// Membership in `𝒲̄_t`, or the reason it fails.
    pub fn admissibility(&self, space: &ScenarioSpace, eligible: Eligible, tol: f64) -> Result<()> {
        for (i, q) in self.q.iter().enumerate() {
            if !q.is_mt_preserving(space, self.t, tol) {
                return Err(Error::NotAdmissible(format!("Q̄_{i} does not agree with P̄ on F̄_{}", self.t)));
            }
        }
        let eligible_part = self.w.slices().iter().flat_map(|f| (0..f.num_atoms()).map(move |a| &f.at(a)[..eligible.m]));
        let mut all_zero = true;
        for v in eligible_part {
            if v.iter().any(|&x| x < -tol) {
                return Err(Error::NotAdmissible("w̄ is negative on an eligible asset".into()));
            }
            all_zero &= v.iter().all(|x| x.abs() <= tol);
        }
        if all_zero {
            return Err(Error::NotAdmissible("w̄ lies in the annihilator of M̄_t".into()));
        }
        let tail = bar_w_map(space, &self.q, &self.w, space.horizon())?;
        if tail.slices().iter().any(|f| f.values().iter().any(|&v| v < -tol)) {
            return Err(Error::NotAdmissible("w̄_t^T(Q̄, w̄) has a negative entry".into()));
        }
        Ok(())
    }

    pub fn is_admissible(&self, space: &ScenarioSpace, eligible: Eligible, tol: f64) -> bool {
        self.admissibility(space, eligible, tol).is_ok()
    }

    /// `Z ↦ w̄_c^⊤ Ē_t^{Q̄}[Z]_c` per `F̄_t` cell, from the images of the
    /// coordinate basis.
    pub fn linear_dual(&self, space: &ScenarioSpace, coords: &Coords, m: usize) -> Result<LinearDual> {
        let d = self.dim();
        let weights = self.w.flat();
        let cells = weights.len() / d;
        let mut functionals = vec![vec![0.0; coords.len()]; cells];
        for (k, (s, b, i)) in coords.entries().enumerate() {
            let basis = Process::from_fn(space, d, 0, |r, c, j| if (r, c, j) == (s, b, i) { 1.0 } else { 0.0 });
            let img = bar_cond_expectation(space, &basis, &self.q, self.t)?.flat();
            for (c, ell) in functionals.iter_mut().enumerate() {
                ell[k] = weights[c * d + i] * img[c * d + i];
            }
        }
        let normals = (0..cells).map(|c| weights[c * d..c * d + m].to_vec()).collect();
        Ok(LinearDual { functionals, normals })
    }
}

fn vector_dual_for(space: &ScenarioSpace, a: &VectorAcceptanceSet, qw: &VectorDualVariable) -> Result<LinearDual> {
    if qw.t != a.t || qw.dim() != a.eligible.d {
        return Err(Error::Dimension("dual variable does not match the acceptance set".into()));
    }
    qw.admissibility(space, a.eligible, 1e-9)?;
    qw.linear_dual(space, a.coords(), a.eligible.m)
}

/// `ᾱ_t(Q̄, w̄)` per `F̄_t` cell.
pub fn penalty_vector(
    space: &ScenarioSpace,
    a: &VectorAcceptanceSet,
    qw: &VectorDualVariable,
) -> Result<ConditionalPolyhedron> {
    let dual = vector_dual_for(space, a, qw)?;
    ConditionalPolyhedron::new(Layout::Optional { level: a.t }, a.eligible.m, dual.penalty(&a.linear)?)
}

pub fn dual_term_vector(
    space: &ScenarioSpace,
    a: &VectorAcceptanceSet,
    x: &Process,
    qw: &VectorDualVariable,
) -> Result<ConditionalPolyhedron> {
    check_dim(a.eligible, x.dim())?;
    let dual = vector_dual_for(space, a, qw)?;
    ConditionalPolyhedron::new(
        Layout::Optional { level: a.t },
        a.eligible.m,
        dual.term(&a.linear, &a.coords().flatten(x))?,
    )
}

/// Intersection of the dual terms (`M̄_t` for an empty list).
pub fn dual_eval_vector(
    space: &ScenarioSpace,
    a: &VectorAcceptanceSet,
    x: &Process,
    duals: &[VectorDualVariable],
) -> Result<ConditionalPolyhedron> {
    let mut out = ConditionalPolyhedron::full(space, Layout::Optional { level: a.t }, a.eligible.m);
    for qw in duals {
        out = out.intersect(&dual_term_vector(space, a, x, qw)?)?;
    }
    Ok(out)
}

/// `w̄_t^T(Q̄, w̄)` lies in the dual cone of a conical `Ā_t`.
pub fn is_max_dual_vector(space: &ScenarioSpace, a: &VectorAcceptanceSet, qw: &VectorDualVariable) -> Result<bool> {
    if !a.linear.is_cone()? {
        return Err(Error::NotCone);
    }
    vector_dual_for(space, a, qw)?;
    let tail = bar_w_map(space, &qw.q, &qw.w, space.horizon())?;
    let os = lift_space(space);
    let c: Vec<f64> = a.coords().entries().map(|(r, b, i)| os.pbar(r, b) * tail.slice(r).get(b, i)).collect();
    Ok(matches!(a.linear.inf_linear(&c)?, Support::Attained { value, .. } if value >= -1e-9))
}

/// Per-cell Dirac duals: realized cells keep `P̄`, and each block puts its
/// mass on the `k`-th point cell below it at time `s`.
pub fn dirac_family_vector(space: &ScenarioSpace, t: usize, eligible: Eligible) -> Vec<VectorDualVariable> {
    let os = lift_space(space);
    let mut out = Vec::new();
    for s in t..=space.horizon() {
        let width = (0..space.num_atoms(t)).map(|a| space.descendants(t, a, s).len()).max().unwrap_or(1);
        for k in 0..width {
            let mut cells: Vec<Vec<f64>> = space.times().map(|r| vec![0.0; space.num_atoms(r)]).collect();
            for (r, row) in cells.iter_mut().enumerate().take(t) {
                for (b, v) in row.iter_mut().enumerate() {
                    *v = os.pbar(r, b);
                }
            }
            for a in 0..space.num_atoms(t) {
                let below = space.descendants(t, a, s);
                let cell = crate::space::Cell { time: t, atom: a, block: true };
                cells[s][below[k % below.len()]] += os.cell_pbar(cell);
            }
            let q = OptionalMeasure::from_cells(space, cells).expect("cell masses form a probability");
            for i in 0..eligible.m {
                let mut unit = vec![0.0; eligible.d];
                unit[i] = 1.0;
                let slices = (0..=t).map(|r| Field::constant(space, r, &unit)).collect();
                let w = OptionalField::from_slices(slices).expect("consistent slices");
                out.push(VectorDualVariable { t, q: vec![q.clone(); eligible.d], w });
            }
        }
    }
    out
}
