//! Multiportfolio time consistency on finite comparison families.
//!
//! Every check is an implication between two union inclusions of joint
//! polyhedra. A fixture whose hypothesis fails is vacuous; a fixture whose
//! conclusion fails ships a point of the left-hand set together with the
//! facet of each union member it violates.

use crate::bridge::{lift, project, AugmentedProcessRiskMeasure};
use crate::error::{Error, Result};
use crate::families::{ProcessFamily, RestrictedSchedule};
use crate::polyhedra::{union_inclusion, Certificate, InclusionVerdict, Polyhedron, Support, Tier, UnionOptions};
use crate::riskproc::{ProcessAcceptanceSet, ProcessRiskMeasure};
use crate::riskvec::{rbar_eval_joint, RestrictedAcceptanceSet, VectorAcceptanceSet, VectorRiskMeasure};
use crate::sample::{random_integer_process, rng, SampleRng};
use crate::space::{lift_space, Eligible, Field, Process, ScenarioSpace};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

/// `(ρ_t, (R_s^t)_{s<t})` for every `t ∈ 𝕋`.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedFamily {
    pub name: String,
    sets: Vec<AugmentedProcessRiskMeasure>,
}

impl AugmentedFamily {
    pub fn new(name: impl Into<String>, sets: Vec<AugmentedProcessRiskMeasure>) -> Result<Self> {
        if sets.is_empty() || sets.iter().enumerate().any(|(t, a)| a.time() != t) {
            return Err(Error::InvalidArgument("augmented pairs must be listed for t = 0, 1, …, T".into()));
        }
        Ok(Self { name: name.into(), sets })
    }

    pub fn at(&self, t: usize) -> &AugmentedProcessRiskMeasure {
        &self.sets[t]
    }

    pub fn horizon(&self) -> usize {
        self.sets.len() - 1
    }

    pub fn eligible(&self) -> Eligible {
        self.sets[0].eligible()
    }

    pub fn rho_at(&self, t: usize) -> &ProcessAcceptanceSet {
        self.sets[t].rho()
    }

    /// `R_r^t`, defined for `r < t`.
    pub fn restricted(&self, r: usize, t: usize) -> &RestrictedAcceptanceSet {
        &self.sets[t].restricted()[r]
    }

    pub fn rho(&self) -> Result<ProcessRiskMeasure> {
        ProcessRiskMeasure::new(self.name.clone(), self.sets.iter().map(|a| a.rho().clone()).collect())
    }

    pub fn lift(&self, space: &ScenarioSpace) -> Result<VectorRiskMeasure> {
        let sets = self.sets.iter().map(|a| lift(space, a)).collect::<Result<_>>()?;
        VectorRiskMeasure::new(format!("lift({})", self.name), sets)
    }
}

/// The augmented family of a named process family with restricted sets from
/// `schedule`.
pub fn augmented_measure(
    space: &ScenarioSpace,
    family: &ProcessFamily,
    schedule: &RestrictedSchedule,
    eligible: Eligible,
) -> Result<AugmentedFamily> {
    let sets = space
        .times()
        .map(|t| crate::bridge::augmented_family(space, family, schedule, t, eligible))
        .collect::<Result<_>>()?;
    AugmentedFamily::new(family.name(), sets)
}

pub fn project_family(space: &ScenarioSpace, rbar: &VectorRiskMeasure) -> Result<AugmentedFamily> {
    let sets = rbar.sets().iter().map(|a| project(space, a)).collect::<Result<_>>()?;
    AugmentedFamily::new(format!("project({})", rbar.name), sets)
}

/// Which implication a fixture exercises.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    /// `ρ_s(X) ⊆ ⋃ ρ_s(Y) ⇒ ρ_t(Z1_{[t,s)} + X1_{𝕋_s}) ⊆ ⋃ ρ_t(Z1_{[t,s)} + Y1_{𝕋_s})`.
    Process,
    /// `R̄_s(X) ⊆ ⋃ R̄_s(Y) ⇒ R̄_t(X) ⊆ ⋃ R̄_t(Y)` over a product family.
    Vector,
    /// The same implication over an arbitrary finite family.
    VectorUnrestricted,
    /// Restricted orderings on `[t, s)` carry over to `ρ_t`.
    RestrictedToProcess,
    /// `R_r^s(X) ⊆ ⋃ R_r^s(Y) ⇒ R_r^t(X) ⊆ ⋃ R_r^t(Y)` for `r < t < s`.
    CrossHorizon,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Implication {
    /// The hypothesis inclusion fails.
    Vacuous,
    Holds { tier: Tier },
    Violated { point: Vec<f64>, certificates: Vec<Certificate>, hypothesis: Tier },
}

impl Implication {
    pub fn holds(&self) -> bool {
        !matches!(self, Implication::Violated { .. })
    }
}

fn worse(a: Tier, b: Tier) -> Tier {
    if a == Tier::Exact && b == Tier::Exact {
        Tier::Exact
    } else {
        Tier::Sampled
    }
}

fn decide(
    hyp: (&Polyhedron, &[Polyhedron]),
    con: (&Polyhedron, &[Polyhedron]),
    opts: &UnionOptions,
) -> Result<Implication> {
    let hypothesis = match union_inclusion(hyp.0, hyp.1, opts)? {
        InclusionVerdict::Included { tier } => tier,
        InclusionVerdict::Violated { .. } => return Ok(Implication::Vacuous),
    };
    Ok(match union_inclusion(con.0, con.1, opts)? {
        InclusionVerdict::Included { tier } => Implication::Holds { tier: worse(hypothesis, tier) },
        InclusionVerdict::Violated { point, certificates } => Implication::Violated { point, certificates, hypothesis },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixtureOutcome {
    pub id: String,
    pub condition: Condition,
    pub t: usize,
    pub s: usize,
    pub implication: Implication,
    /// The positions involved, kept for violated fixtures only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inputs: Option<FixtureInputs>,
}

/// Slice values (`slices[r]` lists atom-major entries of time `r`) of the
/// left-hand position and of every comparison member, as they enter the
/// conclusion.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixtureInputs {
    pub pivot: Vec<Vec<f64>>,
    pub family: Vec<Vec<Vec<f64>>>,
}

fn slices_of(x: &Process) -> Vec<Vec<f64>> {
    x.slices().iter().map(|f| f.values().to_vec()).collect()
}

impl FixtureInputs {
    fn of(x: &Process, b: impl IntoIterator<Item = Process>) -> Self {
        Self { pivot: slices_of(x), family: b.into_iter().map(|y| slices_of(&y)).collect() }
    }

    fn of_fields(x: &Field, b: &[Field]) -> Self {
        Self { pivot: vec![x.values().to_vec()], family: b.iter().map(|y| vec![y.values().to_vec()]).collect() }
    }
}

impl FixtureOutcome {
    fn new(
        id: &str,
        condition: Condition,
        (t, s): (usize, usize),
        implication: Implication,
        inputs: impl FnOnce() -> FixtureInputs,
    ) -> Self {
        let inputs = (!implication.holds()).then(inputs);
        Self { id: id.to_string(), condition, t, s, implication, inputs }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct MptcReport {
    pub outcomes: Vec<FixtureOutcome>,
}

impl MptcReport {
    pub fn holds(&self) -> bool {
        self.outcomes.iter().all(|o| o.implication.holds())
    }

    pub fn violations(&self) -> impl Iterator<Item = &FixtureOutcome> {
        self.outcomes.iter().filter(|o| !o.implication.holds())
    }

    pub fn vacuous(&self) -> usize {
        self.outcomes.iter().filter(|o| o.implication == Implication::Vacuous).count()
    }

    /// `Sampled` if any decided fixture fell back to sampling.
    pub fn tier(&self) -> Tier {
        self.outcomes.iter().fold(Tier::Exact, |acc, o| match &o.implication {
            Implication::Holds { tier } => worse(acc, *tier),
            Implication::Violated { hypothesis, .. } => worse(acc, *hypothesis),
            Implication::Vacuous => acc,
        })
    }
}

/// A fixture for the process condition: pivot `X ∈ 𝓡_s`, prefix `Z` on
/// `[t, s)` and a finite family `B ⊆ 𝓡_s`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProcessFixture {
    pub id: String,
    pub t: usize,
    pub s: usize,
    pub x: Process,
    pub z: Process,
    pub b: Vec<Process>,
}

/// A product family `{(b_0, …, b_{s−1}, b_s) : b_r ∈ B_r, b_s ∈ B_s}`,
/// expanded on demand.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductFamily {
    /// `B_r` for `r < s`.
    pub slices: Vec<Vec<Field>>,
    /// `B_s ⊆ 𝓡_s`.
    pub tail: Vec<Process>,
}

impl ProductFamily {
    pub fn len(&self) -> usize {
        self.slices.iter().map(Vec::len).product::<usize>() * self.tail.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The `k`-th member in mixed-radix order.
    pub fn member(&self, space: &ScenarioSpace, mut k: usize) -> Process {
        let s = self.slices.len();
        let tail = &self.tail[k % self.tail.len()];
        k /= self.tail.len();
        let mut out: Vec<Field> = tail.slices().to_vec();
        for r in (0..s).rev() {
            let options = &self.slices[r];
            out[r] = options[k % options.len()].clone();
            k /= options.len();
        }
        Process::from_slices(space, 0, out).expect("product members have consistent shapes")
    }

    pub fn members<'a>(&'a self, space: &'a ScenarioSpace) -> impl Iterator<Item = Process> + 'a {
        (0..self.len()).map(move |k| self.member(space, k))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VectorFixture {
    pub id: String,
    pub t: usize,
    pub s: usize,
    pub x: Process,
    pub b: ProductFamily,
}

/// A vector fixture whose family need not have product form.
#[derive(Debug, Clone, PartialEq)]
pub struct FreeVectorFixture {
    pub id: String,
    pub t: usize,
    pub s: usize,
    pub x: Process,
    pub b: Vec<Process>,
}

/// Restricted pivots `X_r` and families `B_r` for `r ∈ [t, s)`, and a common
/// tail `Z ∈ 𝓡_s`.
#[derive(Debug, Clone, PartialEq)]
pub struct RestrictedFixture {
    pub id: String,
    pub t: usize,
    pub s: usize,
    pub x: Vec<Field>,
    pub b: Vec<Vec<Field>>,
    pub z: Process,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrossHorizonFixture {
    pub id: String,
    pub r: usize,
    pub t: usize,
    pub s: usize,
    pub x: Field,
    pub b: Vec<Field>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct JointFixtures {
    pub process: Vec<ProcessFixture>,
    pub restricted: Vec<RestrictedFixture>,
    pub cross: Vec<CrossHorizonFixture>,
}

impl JointFixtures {
    pub fn len(&self) -> usize {
        self.process.len() + self.restricted.len() + self.cross.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn rho_joint(a: &ProcessAcceptanceSet, x: &Process) -> Result<Polyhedron> {
    a.linear().eval_joint(&a.coords().flatten(x))
}

fn restricted_joint(a: &RestrictedAcceptanceSet, z: &Field) -> Result<Polyhedron> {
    a.linear().eval_joint(&a.coords().flatten_field(z))
}

/// `Z 1_{[t,s)} + X 1_{𝕋_s}` as a process starting at `t`.
pub fn splice(space: &ScenarioSpace, t: usize, s: usize, z: &Process, x: &Process) -> Process {
    let d = x.dim();
    let slices = space
        .times()
        .map(|r| match r {
            r if r < t => Field::zeros(space, r, d),
            r if r < s => z.slice(r).clone(),
            r => x.slice(r).clone(),
        })
        .collect();
    Process::from_slices(space, t, slices).expect("spliced slices have consistent shapes")
}

fn pivot_ok(a: &ProcessAcceptanceSet, x: &Process) -> Result<()> {
    if x.dim() != a.eligible().d {
        return Err(Error::Dimension("fixture dimension does not match the risk measure".into()));
    }
    Ok(())
}

pub fn check_mptc_process(
    space: &ScenarioSpace,
    rho: &ProcessRiskMeasure,
    fixtures: &[ProcessFixture],
    opts: &UnionOptions,
) -> Result<MptcReport> {
    let outcomes = fixtures
        .par_iter()
        .map(|f| {
            let (at_t, at_s) = (rho.at(f.t), rho.at(f.s));
            pivot_ok(at_s, &f.x)?;
            let hyp_left = rho_joint(at_s, &f.x)?;
            let hyp_right = f.b.iter().map(|y| rho_joint(at_s, y)).collect::<Result<Vec<_>>>()?;
            let con_left = rho_joint(at_t, &splice(space, f.t, f.s, &f.z, &f.x))?;
            let con_right =
                f.b.iter().map(|y| rho_joint(at_t, &splice(space, f.t, f.s, &f.z, y))).collect::<Result<Vec<_>>>()?;
            let implication = decide((&hyp_left, &hyp_right), (&con_left, &con_right), opts)?;
            Ok(FixtureOutcome::new(&f.id, Condition::Process, (f.t, f.s), implication, || {
                let lift = |y: &Process| splice(space, f.t, f.s, &f.z, y);
                FixtureInputs::of(&lift(&f.x), f.b.iter().map(lift))
            }))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MptcReport { outcomes })
}

fn vector_implication(
    rbar: &VectorRiskMeasure,
    t: usize,
    s: usize,
    x: &Process,
    b: impl Iterator<Item = Process>,
    opts: &UnionOptions,
) -> Result<Implication> {
    let (at_t, at_s) = (rbar.at(t), rbar.at(s));
    let members: Vec<Process> = b.collect();
    let hyp_left = rbar_eval_joint(at_s, x)?;
    let hyp_right = members.iter().map(|y| rbar_eval_joint(at_s, y)).collect::<Result<Vec<_>>>()?;
    let con_left = rbar_eval_joint(at_t, x)?;
    let con_right = members.iter().map(|y| rbar_eval_joint(at_t, y)).collect::<Result<Vec<_>>>()?;
    decide((&hyp_left, &hyp_right), (&con_left, &con_right), opts)
}

pub fn check_mptc_vector(
    space: &ScenarioSpace,
    rbar: &VectorRiskMeasure,
    fixtures: &[VectorFixture],
    opts: &UnionOptions,
) -> Result<MptcReport> {
    let outcomes = fixtures
        .par_iter()
        .map(|f| {
            let implication = vector_implication(rbar, f.t, f.s, &f.x, f.b.members(space), opts)?;
            Ok(FixtureOutcome::new(&f.id, Condition::Vector, (f.t, f.s), implication, || {
                FixtureInputs::of(&f.x, f.b.members(space))
            }))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MptcReport { outcomes })
}

pub fn check_mptc_vector_unrestricted(
    rbar: &VectorRiskMeasure,
    fixtures: &[FreeVectorFixture],
    opts: &UnionOptions,
) -> Result<MptcReport> {
    let outcomes = fixtures
        .par_iter()
        .map(|f| {
            let implication = vector_implication(rbar, f.t, f.s, &f.x, f.b.iter().cloned(), opts)?;
            Ok(FixtureOutcome::new(&f.id, Condition::VectorUnrestricted, (f.t, f.s), implication, || {
                FixtureInputs::of(&f.x, f.b.iter().cloned())
            }))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MptcReport { outcomes })
}

/// Every member of `∏_{r ∈ [t,s)} B_r`, as lists of fields.
fn product_of(options: &[Vec<Field>]) -> Vec<Vec<Field>> {
    let mut out: Vec<Vec<Field>> = vec![Vec::new()];
    for opts in options {
        out = out.into_iter().flat_map(|prefix| opts.iter().map(move |f| [prefix.clone(), vec![f.clone()]].concat())).collect();
    }
    out
}

/// `Σ_{r ∈ [t,s)} X_r 1_r + Z 1_{𝕋_s}`.
fn restricted_process(space: &ScenarioSpace, t: usize, s: usize, x: &[Field], z: &Process) -> Process {
    let d = z.dim();
    let slices = space
        .times()
        .map(|r| match r {
            r if r < t => Field::zeros(space, r, d),
            r if r < s => x[r - t].clone(),
            r => z.slice(r).clone(),
        })
        .collect();
    Process::from_slices(space, t, slices).expect("consistent shapes")
}

/// The three conditions of joint consistency.
#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct JointReport {
    pub process: MptcReport,
    pub restricted: MptcReport,
    pub cross: MptcReport,
}

impl JointReport {
    pub fn holds(&self) -> bool {
        self.process.holds() && self.restricted.holds() && self.cross.holds()
    }

    /// Outcomes in fixture order: process, restricted, cross-horizon.
    pub fn outcomes(&self) -> impl Iterator<Item = &FixtureOutcome> + Clone {
        self.process.outcomes.iter().chain(&self.restricted.outcomes).chain(&self.cross.outcomes)
    }
}

pub fn check_joint_mptc(
    space: &ScenarioSpace,
    aug: &AugmentedFamily,
    fixtures: &JointFixtures,
    opts: &UnionOptions,
) -> Result<JointReport> {
    let process = check_mptc_process(space, &aug.rho()?, &fixtures.process, opts)?;
    let restricted = fixtures
        .restricted
        .par_iter()
        .map(|f| {
            let mut holds = true;
            let mut tier = Tier::Exact;
            for (k, r) in (f.t..f.s).enumerate() {
                let a = aug.restricted(r, f.s);
                let left = restricted_joint(a, &f.x[k])?;
                let right = f.b[k].iter().map(|y| restricted_joint(a, y)).collect::<Result<Vec<_>>>()?;
                match union_inclusion(&left, &right, opts)? {
                    InclusionVerdict::Included { tier: h } => tier = worse(tier, h),
                    InclusionVerdict::Violated { .. } => holds = false,
                }
            }
            let implication = if !holds {
                Implication::Vacuous
            } else {
                let at_t = aug.rho_at(f.t);
                let left = rho_joint(at_t, &restricted_process(space, f.t, f.s, &f.x, &f.z))?;
                let right = product_of(&f.b)
                    .iter()
                    .map(|ys| rho_joint(at_t, &restricted_process(space, f.t, f.s, ys, &f.z)))
                    .collect::<Result<Vec<_>>>()?;
                match union_inclusion(&left, &right, opts)? {
                    InclusionVerdict::Included { tier: c } => Implication::Holds { tier: worse(tier, c) },
                    InclusionVerdict::Violated { point, certificates } => {
                        Implication::Violated { point, certificates, hypothesis: tier }
                    }
                }
            };
            Ok(FixtureOutcome::new(&f.id, Condition::RestrictedToProcess, (f.t, f.s), implication, || {
                let members = product_of(&f.b).into_iter().map(|ys| restricted_process(space, f.t, f.s, &ys, &f.z));
                FixtureInputs::of(&restricted_process(space, f.t, f.s, &f.x, &f.z), members)
            }))
        })
        .collect::<Result<Vec<_>>>()?;
    let cross = fixtures
        .cross
        .par_iter()
        .map(|f| {
            let (at_t, at_s) = (aug.restricted(f.r, f.t), aug.restricted(f.r, f.s));
            let hyp_left = restricted_joint(at_s, &f.x)?;
            let hyp_right = f.b.iter().map(|y| restricted_joint(at_s, y)).collect::<Result<Vec<_>>>()?;
            let con_left = restricted_joint(at_t, &f.x)?;
            let con_right = f.b.iter().map(|y| restricted_joint(at_t, y)).collect::<Result<Vec<_>>>()?;
            let implication = decide((&hyp_left, &hyp_right), (&con_left, &con_right), opts)?;
            Ok(FixtureOutcome::new(&f.id, Condition::CrossHorizon, (f.t, f.s), implication, || {
                FixtureInputs::of_fields(&f.x, &f.b)
            }))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(JointReport {
        process,
        restricted: MptcReport { outcomes: restricted },
        cross: MptcReport { outcomes: cross },
    })
}

/// Rewrites each joint fixture as a vector fixture on the optional space, in
/// the order of [`JointReport::outcomes`].
pub fn joint_to_vector(space: &ScenarioSpace, fixtures: &JointFixtures, d: usize) -> Vec<VectorFixture> {
    let zero = |r: usize| vec![Field::zeros(space, r, d)];
    let zero_tail = |s: usize| vec![Process::zeros(space, d, s)];
    let mut out = Vec::with_capacity(fixtures.len());
    for f in &fixtures.process {
        let slices = (0..f.s).map(|r| if r < f.t { zero(r) } else { vec![f.z.slice(r).clone()] }).collect();
        let x = splice(space, f.t, f.s, &f.z, &f.x).with_start(0);
        let tail = f.b.iter().map(|y| y.truncate_from(f.s)).collect();
        out.push(VectorFixture { id: f.id.clone(), t: f.t, s: f.s, x, b: ProductFamily { slices, tail } });
    }
    for f in &fixtures.restricted {
        let slices = (0..f.s).map(|r| if r < f.t { zero(r) } else { f.b[r - f.t].clone() }).collect();
        let x = restricted_process(space, f.t, f.s, &f.x, &f.z).with_start(0);
        let tail = vec![f.z.truncate_from(f.s)];
        out.push(VectorFixture { id: f.id.clone(), t: f.t, s: f.s, x, b: ProductFamily { slices, tail } });
    }
    for f in &fixtures.cross {
        let slices = (0..f.s).map(|q| if q == f.r { f.b.clone() } else { zero(q) }).collect();
        let x = Process::indicator(space, &f.x);
        out.push(VectorFixture { id: f.id.clone(), t: f.t, s: f.s, x, b: ProductFamily { slices, tail: zero_tail(f.s) } });
    }
    out
}

/// Per-fixture verdicts of the joint conditions and of the vector condition.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixtureAgreement {
    pub id: String,
    pub joint: bool,
    pub vector: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquivalenceReport {
    pub joint: JointReport,
    pub vector: MptcReport,
    pub agreements: Vec<FixtureAgreement>,
}

impl EquivalenceReport {
    pub fn joint_holds(&self) -> bool {
        self.joint.holds()
    }

    pub fn vector_holds(&self) -> bool {
        self.vector.holds()
    }

    pub fn agrees(&self) -> bool {
        self.joint_holds() == self.vector_holds() && self.agreements.iter().all(|a| a.joint == a.vector)
    }
}

fn compare(joint: JointReport, vector: MptcReport) -> EquivalenceReport {
    let agreements = joint
        .outcomes()
        .zip(&vector.outcomes)
        .map(|(j, v)| FixtureAgreement { id: j.id.clone(), joint: j.implication.holds(), vector: v.implication.holds() })
        .collect();
    EquivalenceReport { joint, vector, agreements }
}

/// Joint consistency of `(ρ, R)` against consistency of its lift, fixture by
/// fixture.
pub fn equivalence_harness(
    space: &ScenarioSpace,
    aug: &AugmentedFamily,
    cfg: &FixtureConfig,
    opts: &UnionOptions,
) -> Result<EquivalenceReport> {
    let fixtures = joint_fixtures(space, aug, cfg)?;
    let joint = check_joint_mptc(space, aug, &fixtures, opts)?;
    let vfx = joint_to_vector(space, &fixtures, aug.eligible().d);
    let vector = check_mptc_vector(space, &aug.lift(space)?, &vfx, opts)?;
    Ok(compare(joint, vector))
}

/// Consistency of a time decomposable `R̄` against joint consistency of its
/// projection.
pub fn equivalence_from_vector(
    space: &ScenarioSpace,
    rbar: &VectorRiskMeasure,
    cfg: &FixtureConfig,
    opts: &UnionOptions,
) -> Result<EquivalenceReport> {
    let aug = project_family(space, rbar)?;
    let fixtures = joint_fixtures(space, &aug, cfg)?;
    let joint = check_joint_mptc(space, &aug, &fixtures, opts)?;
    let vfx = joint_to_vector(space, &fixtures, aug.eligible().d);
    let vector = check_mptc_vector(space, rbar, &vfx, opts)?;
    Ok(compare(joint, vector))
}

/// Verdicts on one-step fixtures and on all pairs `t < s`.
///
/// The one-step side replaces every multi-step fixture by its chain of
/// single steps; both sides share the chain links, so a multi-step violation
/// must surface as a failing link.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OneStepReport {
    pub one_step: bool,
    pub all_pairs: bool,
    pub one_step_fixtures: usize,
    pub all_pair_fixtures: usize,
}

impl OneStepReport {
    pub fn agrees(&self) -> bool {
        self.one_step == self.all_pairs
    }
}

/// The single steps `(r, r + 1)`, `r = s − 1, …, t`, whose conclusions feed
/// the next hypothesis and end in the conclusion of `f`.
pub fn chain_links(space: &ScenarioSpace, f: &ProcessFixture) -> Vec<ProcessFixture> {
    (f.t..f.s)
        .rev()
        .map(|r| ProcessFixture {
            id: format!("{}/link{r}", f.id),
            t: r,
            s: r + 1,
            x: splice(space, r + 1, f.s, &f.z, &f.x),
            z: f.z.clone(),
            b: f.b.iter().map(|y| splice(space, r + 1, f.s, &f.z, y)).collect(),
        })
        .collect()
}

pub fn one_step_sufficiency(
    space: &ScenarioSpace,
    rho: &ProcessRiskMeasure,
    cfg: &FixtureConfig,
    opts: &UnionOptions,
) -> Result<OneStepReport> {
    let direct = process_fixtures(space, rho, &FixtureConfig { one_step_only: false, ..cfg.clone() })?;
    let (single, multi): (Vec<_>, Vec<_>) = direct.into_iter().partition(|f| f.s == f.t + 1);
    let links: Vec<ProcessFixture> = multi.iter().flat_map(|f| chain_links(space, f)).collect();
    let one: Vec<ProcessFixture> = single.iter().chain(&links).cloned().collect();
    let all: Vec<ProcessFixture> = single.iter().chain(&multi).chain(&links).cloned().collect();
    Ok(OneStepReport {
        one_step: check_mptc_process(space, rho, &one, opts)?.holds(),
        all_pairs: check_mptc_process(space, rho, &all, opts)?.holds(),
        one_step_fixtures: one.len(),
        all_pair_fixtures: all.len(),
    })
}

/// Product-form and unrestricted comparison families on the same `R̄`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProductFamilyReport {
    pub product: MptcReport,
    pub unrestricted: MptcReport,
}

impl ProductFamilyReport {
    pub fn agrees(&self) -> bool {
        self.product.holds() == self.unrestricted.holds()
    }
}

pub fn product_family_check(
    space: &ScenarioSpace,
    rbar: &VectorRiskMeasure,
    cfg: &FixtureConfig,
    opts: &UnionOptions,
) -> Result<ProductFamilyReport> {
    let product = check_mptc_vector(space, rbar, &vector_fixtures(space, rbar, cfg)?, opts)?;
    let unrestricted = check_mptc_vector_unrestricted(rbar, &free_vector_fixtures(space, rbar, cfg)?, opts)?;
    Ok(ProductFamilyReport { product, unrestricted })
}

/// How many fixtures to draw and from which pairs of times.
#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct FixtureConfig {
    pub per_pair: usize,
    pub seed: u64,
    /// Entries are integers in `[-range, range]`.
    pub range: i32,
    pub one_step_only: bool,
}

impl Default for FixtureConfig {
    fn default() -> Self {
        Self { per_pair: 6, seed: 0, range: 2, one_step_only: false }
    }
}

impl FixtureConfig {
    fn pairs(&self, horizon: usize) -> Vec<(usize, usize)> {
        (0..horizon)
            .flat_map(|t| (t + 1..=horizon).map(move |s| (t, s)))
            .filter(|(t, s)| !self.one_step_only || *s == t + 1)
            .collect()
    }

    fn seed_for(&self, tag: u64, t: usize, s: usize) -> SampleRng {
        rng(self.seed ^ (tag << 48) ^ ((t as u64) << 24) ^ (s as u64))
    }
}

/// The ways a comparison family is built from its pivot. `equal_risk`
/// fixtures also hold the realized part at `range`, so that the pivot's
/// values after `s` decide the conclusion.
const KINDS: [&str; 6] = ["reflexive", "dominated", "equal_risk", "pair", "asset_swap", "random"];

/// `x` with every entry before `s` set to `range`.
fn capped_prefix(space: &ScenarioSpace, x: &Process, s: usize, range: i32) -> Process {
    let mut out = x.clone();
    for r in x.start()..s {
        *out.slice_mut(r) = Field::constant(space, r, &vec![range as f64; x.dim()]);
    }
    out
}

fn int_field(space: &ScenarioSpace, t: usize, d: usize, k: i32, rng: &mut SampleRng) -> Field {
    Field::from_fn(space, t, d, |_, _| rng.random_range(-k..=k) as f64)
}

fn bump_field(space: &ScenarioSpace, t: usize, d: usize, rng: &mut SampleRng) -> Field {
    Field::from_fn(space, t, d, |_, _| rng.random_range(0..=2) as f64)
}


fn bumped(space: &ScenarioSpace, x: &Process, rng: &mut SampleRng) -> Process {
    x.add(&Process::from_fn(space, x.dim(), x.start(), |_, _, _| rng.random_range(0..=2) as f64))
}

fn swap_field(f: &Field) -> Field {
    let d = f.dim();
    let mut out = f.clone();
    for a in 0..f.num_atoms() {
        for i in 0..d {
            out.set(a, i, f.get(a, d - 1 - i));
        }
    }
    out
}

fn swap_process(space: &ScenarioSpace, x: &Process) -> Process {
    let slices = x.slices().iter().map(swap_field).collect();
    Process::from_slices(space, x.start(), slices).expect("same shapes")
}

/// A minimal point of a joint value, found by minimizing the sum of its
/// coordinates.
fn minimal_point(p: &Polyhedron) -> Result<Option<Vec<f64>>> {
    Ok(match p.minimize(&vec![1.0; p.dim()])? {
        Support::Attained { point, .. } => Some(point),
        _ => None,
    })
}

/// `−u` as an `F_t` field, with `u` listed per atom and eligible asset.
fn negated_cash(space: &ScenarioSpace, t: usize, d: usize, m: usize, u: &[f64]) -> Field {
    Field::from_fn(space, t, d, |a, i| if i < m { -u[a * m + i] } else { 0.0 })
}

pub fn process_fixtures(space: &ScenarioSpace, rho: &ProcessRiskMeasure, cfg: &FixtureConfig) -> Result<Vec<ProcessFixture>> {
    let e = rho.at(0).eligible();
    let (d, m) = (e.d, e.m);
    let mut out = Vec::new();
    for (t, s) in cfg.pairs(space.horizon()) {
        let mut r = cfg.seed_for(1, t, s);
        for k in 0..cfg.per_pair {
            let kind = KINDS[k % KINDS.len()];
            let x = random_integer_process(space, d, s, cfg.range, &mut r);
            let mut z = random_integer_process(space, d, t, cfg.range, &mut r);
            if kind == "equal_risk" {
                z = capped_prefix(space, &z, s, cfg.range);
            }
            let equal_risk = |x: &Process| -> Result<Process> {
                Ok(match minimal_point(&rho_joint(rho.at(s), x)?)? {
                    Some(u) => Process::frozen(space, &negated_cash(space, s, d, m, &u)),
                    None => x.clone(),
                })
            };
            let b = match kind {
                "reflexive" => vec![x.clone()],
                "dominated" => vec![bumped(space, &x, &mut r)],
                "equal_risk" => vec![equal_risk(&x)?],
                "pair" => vec![equal_risk(&x)?, bumped(space, &x, &mut r)],
                "asset_swap" => vec![swap_process(space, &x)],
                _ => vec![random_integer_process(space, d, s, cfg.range, &mut r), random_integer_process(space, d, s, cfg.range, &mut r)],
            };
            out.push(ProcessFixture { id: format!("process/t{t}s{s}/{kind}/{k}"), t, s, x, z, b });
        }
    }
    Ok(out)
}

pub fn joint_fixtures(space: &ScenarioSpace, aug: &AugmentedFamily, cfg: &FixtureConfig) -> Result<JointFixtures> {
    let e = aug.eligible();
    let (d, m) = (e.d, e.m);
    let process = process_fixtures(space, &aug.rho()?, cfg)?;
    let equal_risk = |a: &RestrictedAcceptanceSet, x: &Field| -> Result<Field> {
        Ok(match minimal_point(&restricted_joint(a, x)?)? {
            Some(u) => negated_cash(space, x.time(), d, m, &u),
            None => x.clone(),
        })
    };
    let family = |kind: &str, a: &RestrictedAcceptanceSet, x: &Field, r: &mut SampleRng| -> Result<Vec<Field>> {
        let q = x.time();
        Ok(match kind {
            "reflexive" => vec![x.clone()],
            "dominated" => vec![x.add(&bump_field(space, q, d, r))],
            "equal_risk" => vec![equal_risk(a, x)?],
            "pair" => vec![equal_risk(a, x)?, x.add(&bump_field(space, q, d, r))],
            "asset_swap" => vec![swap_field(x)],
            _ => vec![int_field(space, q, d, cfg.range, r), int_field(space, q, d, cfg.range, r)],
        })
    };
    let mut restricted = Vec::new();
    for (t, s) in cfg.pairs(space.horizon()) {
        let mut r = cfg.seed_for(2, t, s);
        for k in 0..cfg.per_pair {
            let kind = KINDS[k % KINDS.len()];
            let x: Vec<Field> = (t..s).map(|q| int_field(space, q, d, cfg.range, &mut r)).collect();
            let b = (t..s).map(|q| family(kind, aug.restricted(q, s), &x[q - t], &mut r)).collect::<Result<Vec<_>>>()?;
            let z = random_integer_process(space, d, s, cfg.range, &mut r);
            restricted.push(RestrictedFixture { id: format!("restricted/t{t}s{s}/{kind}/{k}"), t, s, x, b, z });
        }
    }
    let mut cross = Vec::new();
    for (t, s) in cfg.pairs(space.horizon()) {
        let mut rg = cfg.seed_for(3, t, s);
        for q in 0..t {
            for k in 0..cfg.per_pair {
                let kind = KINDS[k % KINDS.len()];
                let x = int_field(space, q, d, cfg.range, &mut rg);
                let b = family(kind, aug.restricted(q, s), &x, &mut rg)?;
                cross.push(CrossHorizonFixture { id: format!("cross/r{q}t{t}s{s}/{kind}/{k}"), r: q, t, s, x, b });
            }
        }
    }
    Ok(JointFixtures { process, restricted, cross })
}

/// `−u` for a minimal point `u` of `R̄_s(X)`, split into realized slices and
/// the frozen block.
fn vector_equal_risk(space: &ScenarioSpace, at_s: &VectorAcceptanceSet, x: &Process) -> Result<Option<(Vec<Field>, Process)>> {
    let e = at_s.eligible();
    let s = at_s.time();
    let Some(u) = minimal_point(&rbar_eval_joint(at_s, x)?)? else { return Ok(None) };
    let os = lift_space(space);
    let part = |r: usize| {
        let lo = os.slice_offset(r) * e.m;
        negated_cash(space, r, e.d, e.m, &u[lo..lo + space.num_atoms(r) * e.m])
    };
    let slices = (0..s).map(part).collect();
    Ok(Some((slices, Process::frozen(space, &part(s)))))
}

pub fn vector_fixtures(space: &ScenarioSpace, rbar: &VectorRiskMeasure, cfg: &FixtureConfig) -> Result<Vec<VectorFixture>> {
    let d = rbar.at(0).eligible().d;
    let mut out = Vec::new();
    for (t, s) in cfg.pairs(space.horizon()) {
        let mut r = cfg.seed_for(4, t, s);
        for k in 0..cfg.per_pair {
            let kind = KINDS[k % KINDS.len()];
            let mut x = random_integer_process(space, d, 0, cfg.range, &mut r);
            if kind == "equal_risk" {
                x = capped_prefix(space, &x, s, cfg.range);
            }
            let own: Vec<Vec<Field>> = (0..s).map(|q| vec![x.slice(q).clone()]).collect();
            let tail = x.truncate_from(s);
            let equal = vector_equal_risk(space, rbar.at(s), &x)?;
            let b = match (kind, equal) {
                ("dominated", _) => ProductFamily {
                    slices: (0..s).map(|q| vec![x.slice(q).add(&bump_field(space, q, d, &mut r))]).collect(),
                    tail: vec![bumped(space, &tail, &mut r)],
                },
                ("equal_risk", Some((sl, tl))) => {
                    ProductFamily { slices: sl.into_iter().map(|f| vec![f]).collect(), tail: vec![tl] }
                }
                ("pair", Some((sl, tl))) => ProductFamily {
                    slices: sl.into_iter().zip(&own).map(|(f, o)| vec![f, o[0].clone()]).collect(),
                    tail: vec![tl, bumped(space, &tail, &mut r)],
                },
                ("asset_swap", _) => ProductFamily {
                    slices: (0..s).map(|q| vec![swap_field(x.slice(q))]).collect(),
                    tail: vec![swap_process(space, &tail)],
                },
                ("random", _) => ProductFamily {
                    slices: (0..s).map(|q| vec![int_field(space, q, d, cfg.range, &mut r)]).collect(),
                    tail: vec![random_integer_process(space, d, s, cfg.range, &mut r), random_integer_process(space, d, s, cfg.range, &mut r)],
                },
                _ => ProductFamily { slices: own.clone(), tail: vec![tail.clone()] },
            };
            out.push(VectorFixture { id: format!("vector/t{t}s{s}/{kind}/{k}"), t, s, x, b });
        }
    }
    Ok(out)
}

/// Families that mix realized and future parts across members, so they are
/// not products.
pub fn free_vector_fixtures(
    space: &ScenarioSpace,
    rbar: &VectorRiskMeasure,
    cfg: &FixtureConfig,
) -> Result<Vec<FreeVectorFixture>> {
    let d = rbar.at(0).eligible().d;
    let mut out = Vec::new();
    for (t, s) in cfg.pairs(space.horizon()) {
        let mut r = cfg.seed_for(5, t, s);
        for k in 0..cfg.per_pair {
            let kind = KINDS[k % KINDS.len()];
            let mut x = random_integer_process(space, d, 0, cfg.range, &mut r);
            if kind == "equal_risk" {
                x = capped_prefix(space, &x, s, cfg.range);
            }
            let equal = vector_equal_risk(space, rbar.at(s), &x)?.map(|(sl, tl)| {
                let mut slices = tl.slices().to_vec();
                slices[..s].clone_from_slice(&sl);
                Process::from_slices(space, 0, slices).expect("consistent shapes")
            });
            let b = match (kind, equal) {
                ("dominated", _) => vec![bumped(space, &x, &mut r)],
                ("equal_risk", Some(y)) => vec![y],
                ("pair", Some(y)) => {
                    // One member moves the realized part, the other the future.
                    let mut early = x.clone();
                    let mut late = y.clone();
                    for q in 0..s {
                        *early.slice_mut(q) = y.slice(q).clone();
                        *late.slice_mut(q) = x.slice(q).add(&bump_field(space, q, d, &mut r));
                    }
                    vec![early, late]
                }
                ("asset_swap", _) => vec![swap_process(space, &x)],
                ("random", _) => vec![random_integer_process(space, d, 0, cfg.range, &mut r), random_integer_process(space, d, 0, cfg.range, &mut r)],
                _ => vec![x.clone()],
            };
            out.push(FreeVectorFixture { id: format!("free/t{t}s{s}/{kind}/{k}"), t, s, x, b });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests;
