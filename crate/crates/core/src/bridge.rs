//! Passing between a process risk measure with its restricted companions and
//! a time decomposable risk measure on the optional space.
//!
//! `R̄_t(X) = Σ_{s<t} R_s(X_s) 1_s + ρ_t(π_{t,T} X) 1_{𝕋_t}` on the primal
//! side, and the maps `W_t`, `W̄_t` between the two dual variable sets.

use crate::acceptance::Coords;
use crate::axioms::{check_linear, AxiomReport, Probe, RISK_AXIOMS};
use crate::error::{Error, Result};
use crate::families::{process_family, restricted_family, ProcessFamily, RestrictedSchedule};
use crate::polyhedra::{ConditionalPolyhedron, Halfspace, Layout, Polyhedron, Support};
use crate::riskproc::{
    is_max_dual_process, pairing_nonnegative, penalty_process, penalty_process_unchecked, rho_eval,
    ProcessAcceptanceSet, ProcessDualVariable,
};
use crate::riskvec::{
    check_axioms_vector_with, is_max_dual_restricted, is_max_dual_vector, penalty_restricted, penalty_vector,
    rbar_eval, restricted_eval, RestrictedAcceptanceSet, VectorAcceptanceSet, VectorDualVariable,
};
use crate::space::{
    lift_space, Eligible, Field, Measure, OptionalField, OptionalMeasure, Process, ScenarioSpace, VectorMeasure,
};
use serde::Serialize;

/// `ρ_t` together with restricted risk measures `R_s` for `s < t`.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedProcessRiskMeasure {
    rho: ProcessAcceptanceSet,
    restricted: Vec<RestrictedAcceptanceSet>,
}

impl AugmentedProcessRiskMeasure {
    pub fn new(rho: ProcessAcceptanceSet, restricted: Vec<RestrictedAcceptanceSet>) -> Result<Self> {
        if restricted.len() != rho.time() {
            return Err(Error::InvalidArgument(format!(
                "need {} restricted sets for t = {}, got {}",
                rho.time(),
                rho.time(),
                restricted.len()
            )));
        }
        for (s, r) in restricted.iter().enumerate() {
            if r.time() != s || r.eligible() != rho.eligible() {
                return Err(Error::InvalidArgument(format!("restricted set {s} does not match")));
            }
        }
        Ok(Self { rho, restricted })
    }

    pub fn time(&self) -> usize {
        self.rho.time()
    }

    pub fn eligible(&self) -> Eligible {
        self.rho.eligible()
    }

    pub fn rho(&self) -> &ProcessAcceptanceSet {
        &self.rho
    }

    pub fn restricted(&self) -> &[RestrictedAcceptanceSet] {
        &self.restricted
    }

    pub fn equals(&self, other: &AugmentedProcessRiskMeasure, tol: f64) -> Result<bool> {
        if !self.rho.equals(&other.rho, tol)? || self.restricted.len() != other.restricted.len() {
            return Ok(false);
        }
        for (a, b) in self.restricted.iter().zip(&other.restricted) {
            if !a.equals(b, tol)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// The augmented pair of a named family at time `t`.
pub fn augmented_family(
    space: &ScenarioSpace,
    family: &ProcessFamily,
    schedule: &RestrictedSchedule,
    t: usize,
    eligible: Eligible,
) -> Result<AugmentedProcessRiskMeasure> {
    let rho = process_family(space, family, t, eligible)?;
    let restricted =
        (0..t).map(|s| restricted_family(space, &schedule.family_at(s, t), s, eligible)).collect::<Result<_>>()?;
    AugmentedProcessRiskMeasure::new(rho, restricted)
}

fn embed(dst: &Coords, src: &Coords, rows: &[Halfspace]) -> Vec<Halfspace> {
    let map: Vec<usize> =
        src.entries().map(|(s, b, i)| dst.index(s, b, i).expect("source coordinates embed")).collect();
    rows.iter()
        .map(|r| {
            let mut normal = vec![0.0; dst.len()];
            for (k, v) in r.normal.iter().enumerate() {
                normal[map[k]] += v;
            }
            Halfspace::new(normal, r.offset)
        })
        .collect()
}

/// `Ā_t = Σ_{s<t} A_{R_s} 1_s + A_t 1_{𝕋_t}`.
pub fn lift_acceptance(space: &ScenarioSpace, aug: &AugmentedProcessRiskMeasure) -> Result<VectorAcceptanceSet> {
    let e = aug.eligible();
    let coords = Coords::process(space, 0, e.d);
    let mut rows = Vec::new();
    let mut empty = aug.rho.polyhedron().is_flagged_empty();
    for r in &aug.restricted {
        empty |= r.polyhedron().is_flagged_empty();
        rows.extend(embed(&coords, r.coords(), r.polyhedron().rows()));
    }
    rows.extend(embed(&coords, aug.rho.coords(), aug.rho.polyhedron().rows()));
    let set = if empty { Polyhedron::empty(coords.len()) } else { Polyhedron::new(coords.len(), rows)? };
    VectorAcceptanceSet::new(space, aug.time(), e, set)
}

/// The lifted risk measure is carried by its acceptance set.
pub fn lift(space: &ScenarioSpace, aug: &AugmentedProcessRiskMeasure) -> Result<VectorAcceptanceSet> {
    lift_acceptance(space, aug)
}

/// Evaluates the lift through its defining sum, without forming `Ā_t`.
pub fn lift_eval(aug: &AugmentedProcessRiskMeasure, x: &Process) -> Result<ConditionalPolyhedron> {
    let t = aug.time();
    let mut cells = Vec::new();
    for r in &aug.restricted {
        cells.extend(restricted_eval(r, x.slice(r.time()))?.into_cells());
    }
    cells.extend(rho_eval(&aug.rho, &x.truncate_from(t))?.into_cells());
    ConditionalPolyhedron::new(Layout::Optional { level: t }, aug.eligible().m, cells)
}

/// Projects `Ā_t` onto `keep` after substituting free cash on the cells
/// listed in `free`: each free variable is `(cell of F̄_t, asset)`.
fn existential_projection(
    abar: &VectorAcceptanceSet,
    kept: &Coords,
    free: &[(usize, usize)],
) -> Result<Polyhedron> {
    let lcoords = abar.coords();
    let cash = abar.linear().cash();
    let n1 = kept.len();
    let dim = n1 + free.len();
    if abar.polyhedron().is_flagged_empty() {
        return Ok(Polyhedron::empty(n1));
    }
    let mut rows = Vec::with_capacity(abar.polyhedron().rows().len());
    for r in abar.polyhedron().rows() {
        let mut normal = vec![0.0; dim];
        for (k, (s, b, i)) in kept.entries().enumerate() {
            normal[k] = r.normal[lcoords.index(s, b, i).expect("kept coordinate")];
        }
        for (j, &(cell, i)) in free.iter().enumerate() {
            normal[n1 + j] = cash.targets(cell, i).iter().map(|&k| r.normal[k]).sum();
        }
        rows.push(Halfspace::new(normal, r.offset));
    }
    Polyhedron::new(dim, rows)?.project(&(0..n1).collect::<Vec<_>>())?.canonicalize()
}

/// `A_t = {X : ∃ m on the realized cells, X 1_{𝕋_t} + m ∈ Ā_t}` and
/// `A_{R_s} = {Z : ∃ m off slice s, Z 1_s + m ∈ Ā_t}`.
pub fn project_acceptance(space: &ScenarioSpace, abar: &VectorAcceptanceSet) -> Result<AugmentedProcessRiskMeasure> {
    let t = abar.time();
    let e = abar.eligible();
    let os = lift_space(space);
    let cells = os.num_cells(t);
    let all_cells = |skip: &dyn Fn(usize) -> bool| -> Vec<(usize, usize)> {
        (0..cells).filter(|c| !skip(*c)).flat_map(|c| (0..e.m).map(move |i| (c, i))).collect()
    };
    let block_start = os.slice_offset(t);
    let past = all_cells(&|c| c >= block_start);
    let rho_coords = Coords::process(space, t, e.d);
    let rho = ProcessAcceptanceSet::new(space, t, e, existential_projection(abar, &rho_coords, &past)?)?;
    let mut restricted = Vec::with_capacity(t);
    for s in 0..t {
        let lo = os.slice_offset(s);
        let hi = lo + space.num_atoms(s);
        let free = all_cells(&|c| (lo..hi).contains(&c));
        let coords = Coords::slice(space, s, e.d);
        let set = existential_projection(abar, &coords, &free)?;
        restricted.push(RestrictedAcceptanceSet::new(space, s, e, set)?);
    }
    AugmentedProcessRiskMeasure::new(rho, restricted)
}

pub fn project(space: &ScenarioSpace, abar: &VectorAcceptanceSet) -> Result<AugmentedProcessRiskMeasure> {
    project_acceptance(space, abar)
}

/// A point of `a` outside `b`, if any.
pub fn witness_outside(a: &Polyhedron, b: &Polyhedron, tol: f64) -> Result<Option<Vec<f64>>> {
    let Some(start) = a.feasible_point()? else { return Ok(None) };
    if b.is_flagged_empty() {
        return Ok(Some(start));
    }
    for r in b.rows() {
        match a.minimize(&r.normal)? {
            Support::Attained { value, point } if value < r.offset - tol => return Ok(Some(point)),
            Support::Unbounded => {
                // Walk from a feasible point along a ray that decreases the row.
                let mut rows = a.rows().to_vec();
                rows.push(Halfspace::new(r.normal.iter().map(|v| -v).collect(), 1.0 - r.offset));
                if let Some(p) = Polyhedron::new(a.dim(), rows)?.feasible_point()? {
                    return Ok(Some(p));
                }
            }
            _ => {}
        }
    }
    Ok(None)
}

/// Outcome of a round trip between the two forms.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundTrip {
    pub identical: bool,
    /// A point in exactly one of the two acceptance sets.
    pub witness: Option<Vec<f64>>,
}

/// `lift(project(Ā_t)) = Ā_t`, with a witness when it fails.
pub fn project_lift_round_trip(space: &ScenarioSpace, abar: &VectorAcceptanceSet, tol: f64) -> Result<RoundTrip> {
    let back = lift(space, &project(space, abar)?)?;
    let (a, b) = (abar.polyhedron(), back.polyhedron());
    let witness = match witness_outside(a, b, tol)? {
        Some(p) => Some(p),
        None => witness_outside(b, a, tol)?,
    };
    Ok(RoundTrip { identical: witness.is_none(), witness })
}

/// `project(lift(aug)) = aug`.
pub fn lift_project_round_trip(space: &ScenarioSpace, aug: &AugmentedProcessRiskMeasure, tol: f64) -> Result<bool> {
    project(space, &lift(space, aug)?)?.equals(aug, tol)
}

/// `W_t(Q̄, w̄)`.
pub fn map_dual_to_process(space: &ScenarioSpace, qw: &VectorDualVariable, eligible: Eligible) -> Result<ProcessDualVariable> {
    qw.admissibility(space, eligible, 1e-9)?;
    Ok(map_dual_to_process_unchecked(space, qw))
}

fn map_dual_to_process_unchecked(space: &ScenarioSpace, qw: &VectorDualVariable) -> ProcessDualVariable {
    let t = qw.t;
    let d = qw.dim();
    let big_t = space.horizon();
    let mut q: Vec<Vec<Measure>> = vec![Vec::with_capacity(d); big_t - t + 1];
    let mut w: Vec<Field> = (t..=big_t).map(|_| Field::zeros(space, t, d)).collect();
    for (i, qbar) in qw.q.iter().enumerate() {
        let qi = qbar.q();
        for s in t..=big_t {
            // e(a) = E_t^{Q_i}[ψ_{s,i}] on each F_t atom.
            let e: Vec<f64> = (0..space.num_atoms(t))
                .map(|a| qi.conditional_weights(space, t, a, s).into_iter().map(|(b, p)| p * qbar.psi_at(s, b)).sum())
                .collect();
            let xi = crate::space::xi(space, qi, t, s).expect("valid times");
            let density: Vec<f64> = (0..space.num_states())
                .map(|om| {
                    let a = space.atom_of(t, om);
                    let b = space.atom_of(s, om);
                    if e[a] > 0.0 {
                        qbar.psi_at(s, b) / e[a] * xi.get(b, 0)
                    } else {
                        let mean_mu: f64 = space
                            .descendants(t, a, s)
                            .into_iter()
                            .map(|c| space.atom_prob(s, c) * space.mu(s, c))
                            .sum::<f64>()
                            / space.atom_prob(t, a);
                        space.mu(s, b) / mean_mu
                    }
                })
                .collect();
            q[s - t].push(Measure::from_density(space, density).expect("conditional density integrates to one"));
            for (a, ea) in e.iter().enumerate() {
                let scale = ea / (1.0 - space.mu_before(t, a));
                w[s - t].set(a, i, scale * qw.w.block().get(a, i));
            }
        }
    }
    ProcessDualVariable { t, q: q.into_iter().map(VectorMeasure::new).collect(), w }
}

/// `W̄_t(Q, w)`. Where `w̄_{t,i}` vanishes, the time weights are spread
/// evenly over `𝕋_t` so that `Q̄_i` stays a probability.
pub fn map_dual_to_vector(space: &ScenarioSpace, qw: &ProcessDualVariable, eligible: Eligible) -> Result<VectorDualVariable> {
    qw.admissibility(space, eligible, 1e-9)?;
    let t = qw.t;
    let d = qw.dim();
    let big_t = space.horizon();
    let os = lift_space(space);
    let block = Field::from_fn(space, t, d, |a, i| (t..=big_t).map(|s| qw.w_at(s).get(a, i).max(0.0)).sum());
    let mut slices: Vec<Field> = (0..t).map(|r| Field::zeros(space, r, d)).collect();
    slices.push(block.clone());
    let wbar = OptionalField::from_slices(slices)?;
    let spread = 1.0 / (big_t - t + 1) as f64;
    let mut q = Vec::with_capacity(d);
    for i in 0..d {
        let mut cells: Vec<Vec<f64>> = space.times().map(|r| vec![0.0; space.num_atoms(r)]).collect();
        for (r, row) in cells.iter_mut().enumerate() {
            for (b, v) in row.iter_mut().enumerate() {
                if r < t {
                    *v = os.pbar(r, b);
                    continue;
                }
                let a = space.ancestor(r, b, t);
                let total = block.get(a, i);
                let frac = if total > 0.0 { qw.w_at(r).get(a, i).max(0.0) / total } else { spread };
                let xi = crate::space::xi(space, qw.q_at(r).component(i), t, r)?.get(b, 0);
                // P̄(B × {r}) times the density (1 − Σ_{u<t} μ_u)/μ_r · frac · ξ.
                *v = space.atom_prob(r, b) * (1.0 - space.mu_before(t, a)) * frac * xi;
            }
        }
        q.push(OptionalMeasure::from_cells(space, cells)?);
    }
    VectorDualVariable::new(q, wbar)
}

/// Per-cell comparison of two conditional sets.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellwiseComparison {
    pub equal: Vec<bool>,
}

impl CellwiseComparison {
    pub fn holds(&self) -> bool {
        self.equal.iter().all(|&e| e)
    }

    fn of(a: &[Polyhedron], b: &[Polyhedron], tol: f64) -> Result<Self> {
        let equal = a.iter().zip(b).map(|(x, y)| x.equals(y, tol)).collect::<Result<_>>()?;
        Ok(Self { equal })
    }
}

/// `ᾱ_t(Q̄, w̄) = Σ_{s<t} α_{R_s}(w̄_s) 1_s + α_t(W_t(Q̄, w̄)) 1_{𝕋_t}`.
pub fn penalty_decompose_check(
    space: &ScenarioSpace,
    aug: &AugmentedProcessRiskMeasure,
    qw: &VectorDualVariable,
    tol: f64,
) -> Result<CellwiseComparison> {
    let lifted = lift(space, aug)?;
    let lhs = penalty_vector(space, &lifted, qw)?;
    let mut rhs = Vec::new();
    for r in &aug.restricted {
        rhs.extend(penalty_restricted(r, qw.w.slice(r.time()))?.into_cells());
    }
    let process_dual = map_dual_to_process_unchecked(space, qw);
    rhs.extend(penalty_process_unchecked(space, &aug.rho, &process_dual)?.into_cells());
    CellwiseComparison::of(lhs.cells(), &rhs, tol)
}

/// `w 1_s` paired with `P̄` in every component.
pub fn slice_dual(space: &ScenarioSpace, t: usize, s: usize, w: &Field) -> Result<VectorDualVariable> {
    let d = w.dim();
    let slices = (0..=t).map(|r| if r == s { w.clone() } else { Field::zeros(space, r, d) }).collect();
    VectorDualVariable::new(vec![OptionalMeasure::reference(space); d], OptionalField::from_slices(slices)?)
}

/// `α_{R_s}(w_s) = ᾱ_t(P̄, w_s 1_s)_s` for each listed weight.
pub fn penalty_reverse_restricted(
    space: &ScenarioSpace,
    aug: &AugmentedProcessRiskMeasure,
    s: usize,
    w: &Field,
    tol: f64,
) -> Result<CellwiseComparison> {
    let lifted = lift(space, aug)?;
    let full = penalty_vector(space, &lifted, &slice_dual(space, aug.time(), s, w)?)?;
    let lo = lift_space(space).slice_offset(s);
    let part = &full.cells()[lo..lo + space.num_atoms(s)];
    CellwiseComparison::of(penalty_restricted(&aug.restricted[s], w)?.cells(), part, tol)
}

/// `α_t(Q, w) = ᾱ_t(W̄_t(Q, w))_t`.
pub fn penalty_reverse_process(
    space: &ScenarioSpace,
    aug: &AugmentedProcessRiskMeasure,
    qw: &ProcessDualVariable,
    tol: f64,
) -> Result<CellwiseComparison> {
    let lifted = lift(space, aug)?;
    let vector = map_dual_to_vector(space, qw, aug.eligible())?;
    let full = penalty_vector(space, &lifted, &vector)?;
    let lo = lift_space(space).slice_offset(aug.time());
    CellwiseComparison::of(penalty_process(space, &aug.rho, qw)?.cells(), &full.cells()[lo..], tol)
}

/// `C_s = R̄_t(0)_s` and `ρ_t` for `M = ℝ^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct FullEligible {
    pub c: Vec<ConditionalPolyhedron>,
    pub rho: ProcessAcceptanceSet,
}

pub fn full_eligible_simplify(space: &ScenarioSpace, abar: &VectorAcceptanceSet) -> Result<FullEligible> {
    let e = abar.eligible();
    if !e.is_full() {
        return Err(Error::NotFullyEligible { m: e.m, d: e.d });
    }
    let aug = project(space, abar)?;
    let c = aug
        .restricted
        .iter()
        .map(|r| restricted_eval(r, &Field::zeros(space, r.time(), e.d)))
        .collect::<Result<_>>()?;
    Ok(FullEligible { c, rho: aug.rho })
}

/// `Σ_{s<t} (−X_s + C_s) 1_s + ρ_t(π_{t,T} X) 1_{𝕋_t}`.
pub fn full_eligible_eval(simple: &FullEligible, x: &Process) -> Result<ConditionalPolyhedron> {
    let t = simple.rho.time();
    let mut cells = Vec::new();
    for (s, c) in simple.c.iter().enumerate() {
        let f = x.slice(s);
        for (b, cell) in c.cells().iter().enumerate() {
            cells.push(cell.translate(&f.at(b).iter().map(|v| -v).collect::<Vec<_>>()));
        }
    }
    cells.extend(rho_eval(&simple.rho, &x.truncate_from(t))?.into_cells());
    ConditionalPolyhedron::new(Layout::Optional { level: t }, simple.rho.eligible().m, cells)
}

/// One sampled vector dual, with maximality on both sides.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaxDualComparison {
    pub vector_side: bool,
    pub restricted_side: Vec<bool>,
    pub process_side: bool,
}

impl MaxDualComparison {
    pub fn agrees(&self) -> bool {
        self.vector_side == (self.restricted_side.iter().all(|&b| b) && self.process_side)
    }
}

/// `(Q̄, w̄) ∈ 𝒲̄_t^max ⇔ w̄_s ∈ 𝒲_{R_s}^max ∀s and W_t(Q̄, w̄) ∈ 𝒲_t^max`.
pub fn max_dual_correspondence(
    space: &ScenarioSpace,
    aug: &AugmentedProcessRiskMeasure,
    duals: &[VectorDualVariable],
) -> Result<Vec<MaxDualComparison>> {
    let lifted = lift(space, aug)?;
    duals
        .iter()
        .map(|qw| {
            let vector_side = is_max_dual_vector(space, &lifted, qw)?;
            let restricted_side =
                aug.restricted.iter().map(|r| is_max_dual_restricted(r, qw.w.slice(r.time()))).collect::<Result<_>>()?;
            let process_dual = map_dual_to_process_unchecked(space, qw);
            let process_side = match is_max_dual_process(space, &aug.rho, &process_dual) {
                Err(Error::NotAdmissible(_)) => pairing_nonnegative(space, &aug.rho, &process_dual)?,
                other => other?,
            };
            Ok(MaxDualComparison { vector_side, restricted_side, process_side })
        })
        .collect()
}

/// Property verdicts of an augmented pair against those of its lift.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Inheritance {
    pub augmented: [bool; 3],
    pub lifted: [bool; 3],
}

impl Inheritance {
    pub fn agrees(&self) -> bool {
        self.augmented == self.lifted
    }
}

fn verdicts(r: &AxiomReport) -> [bool; 3] {
    [r.is_normalized(), r.is_convex(), r.is_coherent()]
}

/// Restricts a probe on the optional coordinates to a sub-coordinate system
/// and a contiguous range of cells.
fn restrict_probe(probe: &Probe, map: &[usize], cells: std::ops::Range<usize>, m: usize) -> Probe {
    let pick = |v: &Vec<f64>| map.iter().map(|&k| v[k]).collect::<Vec<f64>>();
    let cash = |v: &Vec<f64>| v[cells.start * m..cells.end * m].to_vec();
    let cell = |v: &Vec<f64>| v[cells.clone()].to_vec();
    Probe {
        xs: probe.xs.iter().map(pick).collect(),
        ys: probe.ys.iter().map(pick).collect(),
        bumps: probe.bumps.iter().map(pick).collect(),
        shifts: probe.shifts.iter().map(cash).collect(),
        lambdas: probe.lambdas.iter().map(cell).collect(),
        factors: probe.factors.iter().map(cell).collect(),
    }
}

/// Normalized / convex / coherent verdicts of `(ρ_t, (R_s))` and of its lift,
/// on probes derived from a common sample on the optional space.
pub fn inheritance_check(
    space: &ScenarioSpace,
    aug: &AugmentedProcessRiskMeasure,
    samples: usize,
    seed: u64,
    tol: f64,
) -> Result<Inheritance> {
    let lifted = lift(space, aug)?;
    let probe = Probe::random(lifted.linear(), samples, seed);
    let lcoords = lifted.coords();
    let os = lift_space(space);
    let m = aug.eligible().m;
    let mut combined = [true; 3];
    let mut merge = |r: &AxiomReport| {
        for (c, v) in combined.iter_mut().zip(verdicts(r)) {
            *c &= v;
        }
    };
    for r in &aug.restricted {
        let map: Vec<usize> = r.coords().entries().map(|(s, b, i)| lcoords.index(s, b, i).expect("slice")).collect();
        let lo = os.slice_offset(r.time());
        let sub = restrict_probe(&probe, &map, lo..lo + space.num_atoms(r.time()), m);
        merge(&check_linear(r.linear(), &sub, &RISK_AXIOMS, tol)?);
    }
    let map: Vec<usize> = aug.rho.coords().entries().map(|(s, b, i)| lcoords.index(s, b, i).expect("suffix")).collect();
    let lo = os.slice_offset(aug.time());
    let sub = restrict_probe(&probe, &map, lo..os.num_cells(aug.time()), m);
    merge(&check_linear(aug.rho.linear(), &sub, &RISK_AXIOMS, tol)?);
    let lifted_report = check_axioms_vector_with(space, &lifted, &probe, tol)?;
    Ok(Inheritance { augmented: combined, lifted: verdicts(&lifted_report) })
}

/// `R̄_t(X)` from the lift agrees with the defining sum.
pub fn lift_matches_sum(space: &ScenarioSpace, aug: &AugmentedProcessRiskMeasure, x: &Process, tol: f64) -> Result<bool> {
    let a = rbar_eval(&lift(space, aug)?, x)?;
    a.equals(&lift_eval(aug, x)?, tol)
}
