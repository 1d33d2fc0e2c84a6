//! The check registry and the suite runner.

use crate::config::{Mode, ModelConfig, RiskSource};
use crate::report::{CheckRecord, Report, Status};
use num_rational::BigRational;
use rand::Rng;
use risktree::bridge::{
    inheritance_check, lift_matches_sum, lift_project_round_trip, map_dual_to_process, map_dual_to_vector,
    max_dual_correspondence, penalty_decompose_check, penalty_reverse_process, penalty_reverse_restricted,
    project_lift_round_trip,
};
use risktree::consistency::{
    equivalence_from_vector, equivalence_harness, one_step_sufficiency, product_family_check, EquivalenceReport,
    FixtureOutcome,
};
use risktree::riskproc::{check_axioms_process, dirac_family_process, dual_eval_process, dual_term_process, rho_eval};
use risktree::riskvec::{
    check_axioms_restricted, check_axioms_vector, dirac_family_vector, dual_eval_vector, dual_term_vector, rbar_eval,
};
use risktree::sample::{
    random_integer_process, random_optional_measure, random_process, random_process_dual, random_vector_dual, rng,
    SampleRng,
};
use risktree::space::{bar_cond_expectation, compose_exact, decompose_exact, w_map};
use risktree::{
    Field, FixtureConfig, Implication, OptionalMeasure, Process, ProcessFamily, RestrictedFamily, RestrictedSchedule, Tier, UnionOptions, VectorRiskMeasure,
};
use rayon::prelude::*;
use serde::Serialize;
use std::sync::OnceLock;
use std::time::Instant;

pub const SUITES: [&str; 5] = ["axioms", "equivalence", "duality", "consistency", "all"];

/// Static description of a check, shown by `--explain`.
#[derive(Debug, Clone, Copy)]
pub struct CheckInfo {
    pub id: &'static str,
    pub suite: &'static str,
    pub statement: &'static str,
    pub inputs: &'static str,
    pub procedure: &'static str,
}

pub const CHECKS: &[CheckInfo] = &[
    CheckInfo {
        id: "axioms.process",
        suite: "axioms",
        statement: "each ρ_t is a conditional risk measure: cash invariant in the eligible assets, monotone, and finite at zero",
        inputs: "the process acceptance sets A_t for every t",
        procedure: "sampled axiom probes on the joint polyhedron of each A_t; LP membership and inclusion tests",
    },
    CheckInfo {
        id: "axioms.restricted",
        suite: "axioms",
        statement: "each restricted measure R_s^t is a conditional risk measure on F_s-measurable positions",
        inputs: "the restricted acceptance sets for every s < t",
        procedure: "the same sampled axiom probes as axioms.process, on a single time slice",
    },
    CheckInfo {
        id: "axioms.vector",
        suite: "axioms",
        statement: "the lifted measure R̄_t is a time decomposable risk measure on the optional space",
        inputs: "Ā_t = Σ_{s<t} A_{R_s} 1_s + A_t 1_{𝕋_t} for every t",
        procedure: "sampled axiom probes plus a search for a point of the summed cell projections outside Ā_t",
    },
    CheckInfo {
        id: "axioms.inheritance",
        suite: "axioms",
        statement: "normalization, convexity and coherence verdicts of (ρ_t, R_s) agree with those of the lift",
        inputs: "the augmented pair at every t and its lift",
        procedure: "one shared random probe set, mapped to both coordinate systems",
    },
    CheckInfo {
        id: "equivalence.decomposition",
        suite: "equivalence",
        statement: "every optional measure factors as Q ⊗ ψ, with Ē^Q̄[X] = E^Q[Σ_t ψ_t X_t] and compose ∘ decompose = id",
        inputs: "random optional measures (duals.count of them) and random processes (checks.samples per measure)",
        procedure: "exact decomposition in the selected arithmetic; expectations compared at 1e-9, round trip exactly (rational) or at 1e-12 (float)",
    },
    CheckInfo {
        id: "equivalence.conditional_expectation",
        suite: "equivalence",
        statement: "the conditional expectation given F̄_t keeps realized cells and averages the block mass-weighted",
        inputs: "random (Q̄, X, t) triples",
        procedure: "the engine's formula against direct per-cell mass-weighted averaging on Q̄-positive cells, at 1e-9",
    },
    CheckInfo {
        id: "equivalence.round_trip",
        suite: "equivalence",
        statement: "project ∘ lift and lift ∘ project are the identity on time decomposable sets",
        inputs: "the augmented pair at every t",
        procedure: "Fourier-Motzkin projection, then mutual-subset LPs at the tolerance",
    },
    CheckInfo {
        id: "equivalence.acceptance",
        suite: "equivalence",
        statement: "X ∈ Ā_t exactly when π_{t,T}X ∈ A_t and X_s ∈ A_{R_s} for every s < t",
        inputs: "random integer processes on the optional space",
        procedure: "membership tests on both sides",
    },
    CheckInfo {
        id: "equivalence.lift_sum",
        suite: "equivalence",
        statement: "R̄_t(X) equals the cellwise sum Σ_{s<t} R_s(X_s) 1_s + ρ_t(π_{t,T}X) 1_{𝕋_t}",
        inputs: "random processes",
        procedure: "per-cell polyhedral evaluation on both sides and mutual-subset LPs",
    },
    CheckInfo {
        id: "duality.outer_bound",
        suite: "duality",
        statement: "for every admissible dual, ρ_t(X) and R̄_t(X) lie inside the corresponding dual term",
        inputs: "duals.count random process and vector duals per time, one random position each",
        procedure: "penalty by LP, then a per-cell subset LP",
    },
    CheckInfo {
        id: "duality.coherent_exactness",
        suite: "duality",
        statement: "for the worst-case cone the Dirac duals reproduce ρ_t(X) and R̄_t(X) exactly",
        inputs: "the worst-case family with orthant restricted sets; skipped otherwise",
        procedure: "intersection of the Dirac dual terms compared with the primal value by mutual-subset LPs",
    },
    CheckInfo {
        id: "duality.penalty_decomposition",
        suite: "duality",
        statement: "ᾱ_t(Q̄, w̄) splits into restricted penalties on realized slices and α_t(W_t(Q̄, w̄)) on the block, and both reverse identities hold",
        inputs: "random vector duals, random restricted weights and random process duals",
        procedure: "penalties by LP on both sides, compared per cell",
    },
    CheckInfo {
        id: "duality.dual_map_round_trip",
        suite: "duality",
        statement: "w_t^s(Q_s, w_s) is unchanged by mapping a process dual to the optional space and back",
        inputs: "random process duals",
        procedure: "componentwise comparison at 1e-9",
    },
    CheckInfo {
        id: "duality.max_dual",
        suite: "duality",
        statement: "a vector dual is maximal exactly when its restricted weights and W_t image are maximal",
        inputs: "random vector duals; skipped unless every Ā_t is a cone",
        procedure: "maximality by LP on each side",
    },
    CheckInfo {
        id: "consistency.joint",
        suite: "consistency",
        statement: "(ρ, R) is jointly multiportfolio time consistent on the generated comparison families",
        inputs: "seeded finite comparison families for every t < s",
        procedure: "hypothesis and conclusion union inclusions by LP and branch and bound, with sampling past the node budget",
    },
    CheckInfo {
        id: "consistency.lift",
        suite: "consistency",
        statement: "the lift R̄ is multiportfolio time consistent on the same families, rewritten on the optional space",
        inputs: "the joint fixtures mapped to product-form vector fixtures",
        procedure: "union inclusions of lifted values",
    },
    CheckInfo {
        id: "consistency.equivalence",
        suite: "consistency",
        statement: "joint consistency of (ρ, R) and consistency of its lift give the same verdict on every fixture, in both directions",
        inputs: "the augmented family, its lift, and the projection of the lift",
        procedure: "per-fixture comparison of the two verdicts",
    },
    CheckInfo {
        id: "consistency.one_step",
        suite: "consistency",
        statement: "fixtures with s = t + 1 decide process consistency the same way as all pairs t < s",
        inputs: "process fixtures for one-step and for all pairs",
        procedure: "two runs of the process implication checker",
    },
    CheckInfo {
        id: "consistency.product_families",
        suite: "consistency",
        statement: "for a normalized lift, product-form and unrestricted comparison families give the same verdict",
        inputs: "product and free vector fixtures; skipped unless every R̄_t is normalized",
        procedure: "two runs of the vector implication checker",
    },
];

pub fn check_info(id: &str) -> Option<&'static CheckInfo> {
    CHECKS.iter().find(|c| c.id == id)
}

pub fn explain(id: &str) -> Result<String, String> {
    let Some(c) = check_info(id) else {
        let ids: Vec<&str> = CHECKS.iter().map(|c| c.id).collect();
        return Err(format!("unknown check id \"{id}\"; valid ids: {}", ids.join(", ")));
    };
    Ok(format!(
        "{}\n  suite:     {}\n  statement: {}\n  inputs:    {}\n  procedure: {}\n",
        c.id, c.suite, c.statement, c.inputs, c.procedure
    ))
}

/// Overrides taken from the command line.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    pub suite: String,
    pub seed: u64,
    pub tolerance: f64,
    pub mode: Mode,
    pub threads: Option<usize>,
}

impl RunOptions {
    pub fn from_model(model: &ModelConfig) -> Self {
        Self {
            suite: model.checks.suite.clone(),
            seed: model.duals.seed,
            tolerance: model.checks.tolerance,
            mode: model.checks.mode,
            threads: None,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SuiteError {
    #[error("no suite selected; choose one of axioms, equivalence, duality, consistency, all")]
    Empty,
    #[error("unknown suite \"{0}\"; choose one of axioms, equivalence, duality, consistency, all")]
    Unknown(String),
    #[error("cannot start worker threads: {0}")]
    Threads(String),
}

pub fn selected(suite: &str) -> Result<Vec<&'static CheckInfo>, SuiteError> {
    match suite.trim() {
        "" => Err(SuiteError::Empty),
        "all" => Ok(CHECKS.iter().collect()),
        s if SUITES.contains(&s) => Ok(CHECKS.iter().filter(|c| c.suite == s).collect()),
        s => Err(SuiteError::Unknown(s.to_string())),
    }
}

/// What one check found.
struct Outcome {
    status: Status,
    summary: String,
    witness: Option<toml::Value>,
}

impl Outcome {
    fn verdict(ok: bool, summary: String) -> Self {
        Self { status: if ok { Status::Pass } else { Status::Fail }, summary, witness: None }
    }

    fn skipped(summary: &str) -> Self {
        Self { status: Status::Skipped, summary: summary.into(), witness: None }
    }

    fn with_witness(mut self, w: impl Serialize) -> Self {
        self.witness = toml::Value::try_from(w).ok();
        self
    }

    fn sampled_if(mut self, tier: Tier) -> Self {
        if self.status == Status::Pass && tier == Tier::Sampled {
            self.status = Status::Sampled;
        }
        self
    }
}

type CheckResult = risktree::Result<Outcome>;

struct Ctx<'a> {
    model: &'a ModelConfig,
    opts: &'a RunOptions,
    harness: OnceLock<risktree::Result<(EquivalenceReport, EquivalenceReport)>>,
}

impl Ctx<'_> {
    fn seed(&self, id: &str) -> SampleRng {
        // FNV-1a keeps per-check streams independent of evaluation order.
        let h = id.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x100_0000_01b3));
        rng(self.opts.seed ^ h)
    }

    fn union_options(&self) -> UnionOptions {
        UnionOptions { tol: self.opts.tolerance, seed: self.opts.seed, ..UnionOptions::default() }
    }

    fn fixture_config(&self) -> FixtureConfig {
        FixtureConfig { per_pair: self.model.checks.fixtures_per_pair, seed: self.opts.seed, ..FixtureConfig::default() }
    }

    fn lift(&self) -> risktree::Result<VectorRiskMeasure> {
        self.model.family.lift(&self.model.space)
    }

    fn harness(&self) -> risktree::Result<&(EquivalenceReport, EquivalenceReport)> {
        self.harness
            .get_or_init(|| {
                let sp = &self.model.space;
                let cfg = self.fixture_config();
                let forward = equivalence_harness(sp, &self.model.family, &cfg, &self.union_options())?;
                let backward = equivalence_from_vector(sp, &self.lift()?, &cfg, &self.union_options())?;
                Ok((forward, backward))
            })
            .as_ref()
            .map_err(Clone::clone)
    }
}

/// Runs the selected checks; records come back in registry order.
pub fn run_suite(model: &ModelConfig, opts: &RunOptions) -> Result<Report, SuiteError> {
    let checks = selected(&opts.suite)?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = opts.threads {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| SuiteError::Threads(e.to_string()))?;
    let ctx = Ctx { model, opts, harness: OnceLock::new() };
    let records = pool.install(|| {
        checks
            .par_iter()
            .map(|info| {
                let start = Instant::now();
                let out = run_check(&ctx, info.id).unwrap_or_else(|e| Outcome {
                    status: Status::Fail,
                    summary: format!("engine error: {e}"),
                    witness: None,
                });
                CheckRecord {
                    id: info.id.to_string(),
                    suite: info.suite.to_string(),
                    statement: info.statement.to_string(),
                    status: out.status,
                    summary: out.summary,
                    witness: out.witness,
                    elapsed: start.elapsed(),
                }
            })
            .collect()
    });
    Ok(Report::new(model, opts, records))
}

fn run_check(ctx: &Ctx, id: &str) -> CheckResult {
    match id {
        "axioms.process" => axioms_process(ctx),
        "axioms.restricted" => axioms_restricted(ctx),
        "axioms.vector" => axioms_vector(ctx),
        "axioms.inheritance" => axioms_inheritance(ctx),
        "equivalence.decomposition" => decomposition(ctx),
        "equivalence.conditional_expectation" => conditional_expectation(ctx),
        "equivalence.round_trip" => round_trip(ctx),
        "equivalence.acceptance" => acceptance(ctx),
        "equivalence.lift_sum" => lift_sum(ctx),
        "duality.outer_bound" => outer_bound(ctx),
        "duality.coherent_exactness" => coherent_exactness(ctx),
        "duality.penalty_decomposition" => penalty_decomposition(ctx),
        "duality.dual_map_round_trip" => dual_map_round_trip(ctx),
        "duality.max_dual" => max_dual(ctx),
        "consistency.joint" => consistency_joint(ctx),
        "consistency.lift" => consistency_lift(ctx),
        "consistency.equivalence" => consistency_equivalence(ctx),
        "consistency.one_step" => one_step(ctx),
        "consistency.product_families" => product_families(ctx),
        other => unreachable!("check {other} is registered but has no runner"),
    }
}

#[derive(Serialize)]
struct AxiomFailure {
    time: usize,
    slice: Option<usize>,
    axiom: String,
    detail: String,
}

fn first_failure(r: &risktree::axioms::AxiomReport) -> Option<(String, String)> {
    r.outcomes
        .iter()
        .find(|o| !o.holds)
        .map(|o| (o.axiom.name().to_string(), o.witness.clone().unwrap_or_default()))
}

fn axioms_process(ctx: &Ctx) -> CheckResult {
    let m = ctx.model;
    let samples = m.checks.samples;
    let mut failure = None;
    for t in m.space.times() {
        let r = check_axioms_process(m.family.rho_at(t), samples, ctx.opts.seed, ctx.opts.tolerance)?;
        if !r.is_risk_measure() && failure.is_none() {
            let (axiom, detail) = first_failure(&r).unwrap_or_default();
            failure = Some(AxiomFailure { time: t, slice: None, axiom, detail });
        }
    }
    let n = m.space.horizon() + 1;
    Ok(match failure {
        None => Outcome::verdict(true, format!("{n} acceptance sets, {samples} probes each")),
        Some(f) => Outcome::verdict(false, format!("A_{} fails {}", f.time, f.axiom)).with_witness(f),
    })
}

fn axioms_restricted(ctx: &Ctx) -> CheckResult {
    let m = ctx.model;
    let mut count = 0;
    for t in m.space.times() {
        for s in 0..t {
            count += 1;
            let r = check_axioms_restricted(m.family.restricted(s, t), m.checks.samples, ctx.opts.seed, ctx.opts.tolerance)?;
            if !r.is_risk_measure() {
                let (axiom, detail) = first_failure(&r).unwrap_or_default();
                let f = AxiomFailure { time: t, slice: Some(s), axiom, detail };
                return Ok(Outcome::verdict(false, format!("R_{s}^{t} fails {}", f.axiom)).with_witness(f));
            }
        }
    }
    Ok(Outcome::verdict(true, format!("{count} restricted set{}", if count == 1 { "" } else { "s" })))
}

fn axioms_vector(ctx: &Ctx) -> CheckResult {
    let m = ctx.model;
    let lifted = ctx.lift()?;
    for (t, a) in lifted.sets().iter().enumerate() {
        let r = check_axioms_vector(&m.space, a, m.checks.samples, ctx.opts.seed, ctx.opts.tolerance)?;
        if !r.is_risk_measure() || !r.holds(risktree::axioms::Axiom::TimeDecomposable) {
            let (axiom, detail) = first_failure(&r).unwrap_or_default();
            let f = AxiomFailure { time: t, slice: None, axiom, detail };
            return Ok(Outcome::verdict(false, format!("Ā_{t} fails {}", f.axiom)).with_witness(f));
        }
    }
    Ok(Outcome::verdict(true, format!("{} lifted sets, all time decomposable", lifted.sets().len())))
}

fn axioms_inheritance(ctx: &Ctx) -> CheckResult {
    let m = ctx.model;
    let mut verdicts = Vec::new();
    for t in m.space.times() {
        let inh = inheritance_check(&m.space, m.family.at(t), m.checks.samples, ctx.opts.seed, ctx.opts.tolerance)?;
        if !inh.agrees() {
            #[derive(Serialize)]
            struct W {
                time: usize,
                augmented: [bool; 3],
                lifted: [bool; 3],
            }
            let w = W { time: t, augmented: inh.augmented, lifted: inh.lifted };
            return Ok(Outcome::verdict(false, format!("verdicts differ at t = {t}")).with_witness(w));
        }
        verdicts.push(inh.augmented);
    }
    let fmt = |v: &[bool; 3]| format!("normalized={} convex={} coherent={}", v[0], v[1], v[2]);
    Ok(Outcome::verdict(true, format!("agree at every t; t = 0: {}", fmt(&verdicts[0]))))
}

fn random_cells(ctx: &Ctx, r: &mut SampleRng) -> Vec<Vec<f64>> {
    random_optional_measure(&ctx.model.space, r).cells().to_vec()
}

/// Cells snapped to a grid of 1/1024 and renormalized exactly.
fn rational_cells(cells: &[Vec<f64>]) -> Vec<Vec<BigRational>> {
    let grid: Vec<Vec<BigRational>> = cells
        .iter()
        .map(|row| row.iter().map(|v| BigRational::new(((v * 1024.0).round() as i64).into(), 1024.into())).collect())
        .collect();
    let total = grid.iter().flatten().fold(BigRational::new(0.into(), 1.into()), |a, b| a + b);
    if total == BigRational::new(0.into(), 1.into()) {
        let mut g = grid;
        g[0][0] = BigRational::new(1.into(), 1.into());
        return g;
    }
    grid.into_iter().map(|row| row.into_iter().map(|v| v / &total).collect()).collect()
}

fn decomposition(ctx: &Ctx) -> CheckResult {
    let m = ctx.model;
    let sp = &m.space;
    let mut r = ctx.seed("equivalence.decomposition");
    let mut worst_expectation = 0.0f64;
    let mut worst_round_trip = 0.0f64;
    for _ in 0..m.duals.count {
        let cells = random_cells(ctx, &mut r);
        let exact_ok = match ctx.opts.mode {
            Mode::Float => {
                let d = decompose_exact(sp, sp.probs(), sp.mu_table(), &cells)?;
                let back = compose_exact(sp, &d.q_mass, &d.psi);
                let diff = back.iter().flatten().zip(cells.iter().flatten()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                worst_round_trip = worst_round_trip.max(diff);
                diff <= 1e-12
            }
            Mode::Rational => {
                let q = rational_cells(&cells);
                let d = decompose_exact(sp, &m.exact_prob, &m.exact_mu, &q)?;
                compose_exact(sp, &d.q_mass, &d.psi) == q
            }
        };
        if !exact_ok {
            return Ok(Outcome::verdict(false, format!("compose ∘ decompose differs by {worst_round_trip:e}"))
                .with_witness(cells));
        }
        let qbar = OptionalMeasure::from_cells(sp, cells)?;
        for _ in 0..m.checks.samples {
            let x = random_process(sp, 1, 0, 5.0, &mut r);
            let gap = (qbar.expectation(sp, &x, 0) - qbar.factorized_expectation(sp, &x, 0)).abs();
            worst_expectation = worst_expectation.max(gap);
        }
    }
    let ok = worst_expectation < 1e-9;
    let trip = match ctx.opts.mode {
        Mode::Float => format!("round trip within {worst_round_trip:e}"),
        Mode::Rational => "round trip exact".to_string(),
    };
    Ok(Outcome::verdict(ok, format!("{} measures, largest expectation gap {worst_expectation:e}, {trip}", m.duals.count)))
}

fn conditional_expectation(ctx: &Ctx) -> CheckResult {
    let m = ctx.model;
    let sp = &m.space;
    let d = m.eligible.d;
    let mut r = ctx.seed("equivalence.conditional_expectation");
    let mut worst = 0.0f64;
    for _ in 0..m.duals.count {
        let qbar: Vec<OptionalMeasure> = (0..d).map(|_| random_optional_measure(sp, &mut r)).collect();
        let x = random_process(sp, d, 0, 5.0, &mut r);
        let t = r.random_range(0..=sp.horizon());
        let got = bar_cond_expectation(sp, &x, &qbar, t)?;
        for (i, q) in qbar.iter().enumerate() {
            for s in 0..t {
                for b in 0..sp.num_atoms(s) {
                    if q.cell(s, b) > 1e-12 {
                        worst = worst.max((got.slice(s).get(b, i) - x.slice(s).get(b, i)).abs());
                    }
                }
            }
            for a in 0..sp.num_atoms(t) {
                let (mut mass, mut sum) = (0.0, 0.0);
                for s in t..=sp.horizon() {
                    for b in sp.descendants(t, a, s) {
                        mass += q.cell(s, b);
                        sum += q.cell(s, b) * x.slice(s).get(b, i);
                    }
                }
                if mass > 1e-12 {
                    worst = worst.max((got.block().get(a, i) - sum / mass).abs());
                }
            }
        }
    }
    Ok(Outcome::verdict(worst < 1e-9, format!("{} triples, largest gap {worst:e}", m.duals.count)))
}

fn round_trip(ctx: &Ctx) -> CheckResult {
    let m = ctx.model;
    let lifted = ctx.lift()?;
    for t in m.space.times() {
        if !lift_project_round_trip(&m.space, m.family.at(t), ctx.opts.tolerance)? {
            return Ok(Outcome::verdict(false, format!("project(lift(ρ_{t}, R)) differs from (ρ_{t}, R)")));
        }
        let rt = project_lift_round_trip(&m.space, lifted.at(t), ctx.opts.tolerance)?;
        if !rt.identical {
            return Ok(Outcome::verdict(false, format!("lift(project(Ā_{t})) differs from Ā_{t}")).with_witness(rt));
        }
    }
    Ok(Outcome::verdict(true, format!("identity in both orders at all {} times", m.space.horizon() + 1)))
}

fn acceptance(ctx: &Ctx) -> CheckResult {
    let m = ctx.model;
    let sp = &m.space;
    let tol = ctx.opts.tolerance;
    let lifted = ctx.lift()?;
    let mut r = ctx.seed("equivalence.acceptance");
    let n = 10 * m.checks.samples;
    let mut accepted = 0;
    for t in sp.times() {
        let aug = m.family.at(t);
        for k in 0..n {
            // Every other position is shifted up so both verdicts occur often.
            let mut x = random_integer_process(sp, m.eligible.d, 0, 2, &mut r);
            if k % 2 == 1 {
                x = x.add(&Process::from_fn(sp, m.eligible.d, 0, |_, _, _| 2.0));
            }
            let left = aug.rho().contains(&x.truncate_from(t), tol)
                && aug.restricted().iter().all(|a| a.contains(x.slice(a.time()), tol));
            let right = lifted.at(t).contains(&x, tol);
            if left != right {
                #[derive(Serialize)]
                struct W {
                    time: usize,
                    process: Vec<Vec<f64>>,
                    augmented: bool,
                    lifted: bool,
                }
                let w = W { time: t, process: x.slices().iter().map(|f| f.values().to_vec()).collect(), augmented: left, lifted: right };
                return Ok(Outcome::verdict(false, format!("membership differs at t = {t}")).with_witness(w));
            }
            accepted += left as usize;
        }
    }
    Ok(Outcome::verdict(true, format!("{} positions per time, {accepted} accepted in total", n)))
}

fn lift_sum(ctx: &Ctx) -> CheckResult {
    let m = ctx.model;
    let mut r = ctx.seed("equivalence.lift_sum");
    for t in m.space.times() {
        for _ in 0..m.checks.samples {
            let x = random_integer_process(&m.space, m.eligible.d, 0, 3, &mut r);
            if !lift_matches_sum(&m.space, m.family.at(t), &x, ctx.opts.tolerance)? {
                let w: Vec<Vec<f64>> = x.slices().iter().map(|f| f.values().to_vec()).collect();
                return Ok(Outcome::verdict(false, format!("mismatch at t = {t}")).with_witness(w));
            }
        }
    }
    Ok(Outcome::verdict(true, format!("{} positions per time", m.checks.samples)))
}

fn outer_bound(ctx: &Ctx) -> CheckResult {
    let m = ctx.model;
    let sp = &m.space;
    let e = m.eligible;
    let tol = ctx.opts.tolerance;
    let lifted = ctx.lift()?;
    let mut r = ctx.seed("duality.outer_bound");
    let mut violations = Vec::new();
    let mut tested = 0;
    for t in sp.times() {
        let a = m.family.rho_at(t);
        for k in 0..m.duals.count {
            let qw = random_process_dual(sp, t, e, &mut r);
            let x = random_process(sp, e.d, t, 3.0, &mut r);
            tested += 1;
            if !rho_eval(a, &x)?.subset_of(&dual_term_process(sp, a, &x, &qw)?, tol)? {
                violations.push(format!("process dual {k} at t = {t}"));
            }
            let vw = random_vector_dual(sp, t, e, &mut r);
            let y = random_process(sp, e.d, 0, 3.0, &mut r);
            tested += 1;
            if !rbar_eval(lifted.at(t), &y)?.subset_of(&dual_term_vector(sp, lifted.at(t), &y, &vw)?, tol)? {
                violations.push(format!("vector dual {k} at t = {t}"));
            }
        }
    }
    let summary = format!("{tested} dual terms, {} violations", violations.len());
    Ok(if violations.is_empty() { Outcome::verdict(true, summary) } else { Outcome::verdict(false, summary).with_witness(violations) })
}

fn coherent_exactness(ctx: &Ctx) -> CheckResult {
    let m = ctx.model;
    let orthant = RestrictedSchedule::Fixed { family: RestrictedFamily::Orthant };
    if m.source != RiskSource::Family(ProcessFamily::WorstCase) || m.schedule != orthant {
        return Ok(Outcome::skipped("applies to the worst-case family with orthant restricted sets only"));
    }
    let sp = &m.space;
    let e = m.eligible;
    let tol = ctx.opts.tolerance;
    let lifted = ctx.lift()?;
    let mut r = ctx.seed("duality.coherent_exactness");
    for t in sp.times() {
        let a = m.family.rho_at(t);
        let pd = dirac_family_process(sp, t, e);
        let vd = dirac_family_vector(sp, t, e);
        for _ in 0..m.checks.samples {
            let x = random_process(sp, e.d, 0, 3.0, &mut r);
            let xt = x.truncate_from(t);
            if !rho_eval(a, &xt)?.equals(&dual_eval_process(sp, a, &xt, &pd)?, tol)? {
                return Ok(Outcome::verdict(false, format!("process side differs at t = {t}")));
            }
            if !rbar_eval(lifted.at(t), &x)?.equals(&dual_eval_vector(sp, lifted.at(t), &x, &vd)?, tol)? {
                return Ok(Outcome::verdict(false, format!("optional side differs at t = {t}")));
            }
        }
    }
    Ok(Outcome::verdict(true, format!("{} positions per time, both sides exact", m.checks.samples)))
}

fn penalty_decomposition(ctx: &Ctx) -> CheckResult {
    let m = ctx.model;
    let sp = &m.space;
    let e = m.eligible;
    let tol = ctx.opts.tolerance;
    let mut r = ctx.seed("duality.penalty_decomposition");
    let mut pairs = 0;
    for t in sp.times() {
        let aug = m.family.at(t);
        for k in 0..m.duals.count {
            pairs += 1;
            let vw = random_vector_dual(sp, t, e, &mut r);
            if !penalty_decompose_check(sp, aug, &vw, tol)?.holds() {
                return Ok(Outcome::verdict(false, format!("forward identity fails for vector dual {k} at t = {t}")));
            }
            for s in 0..t {
                let w = Field::from_fn(sp, s, e.d, |_, _| r.random_range(0.0..2.0));
                if !penalty_reverse_restricted(sp, aug, s, &w, tol)?.holds() {
                    return Ok(Outcome::verdict(false, format!("restricted identity fails at s = {s}, t = {t}")));
                }
            }
            let pw = random_process_dual(sp, t, e, &mut r);
            if !penalty_reverse_process(sp, aug, &pw, tol)?.holds() {
                return Ok(Outcome::verdict(false, format!("process identity fails for dual {k} at t = {t}")));
            }
        }
    }
    Ok(Outcome::verdict(true, format!("{pairs} dual pairs, all three identities hold")))
}

fn dual_map_round_trip(ctx: &Ctx) -> CheckResult {
    let m = ctx.model;
    let sp = &m.space;
    let e = m.eligible;
    let mut r = ctx.seed("duality.dual_map_round_trip");
    let mut worst = 0.0f64;
    for t in sp.times() {
        for _ in 0..m.duals.count {
            let qw = random_process_dual(sp, t, e, &mut r);
            let back = map_dual_to_process(sp, &map_dual_to_vector(sp, &qw, e)?, e)?;
            for s in t..=sp.horizon() {
                let a = w_map(sp, qw.q_at(s), qw.w_at(s), s)?;
                let b = w_map(sp, back.q_at(s), back.w_at(s), s)?;
                worst = worst.max(a.max_abs_diff(&b));
            }
        }
    }
    Ok(Outcome::verdict(worst < 1e-9, format!("largest componentwise gap {worst:e}")))
}

fn max_dual(ctx: &Ctx) -> CheckResult {
    let m = ctx.model;
    let sp = &m.space;
    let lifted = ctx.lift()?;
    for a in lifted.sets() {
        if !a.linear().is_cone()? {
            return Ok(Outcome::skipped("maximal duals are defined for conical acceptance sets only"));
        }
    }
    let mut r = ctx.seed("duality.max_dual");
    let mut maximal = 0;
    for t in sp.times() {
        let duals: Vec<_> = (0..m.duals.count).map(|_| random_vector_dual(sp, t, m.eligible, &mut r)).collect();
        for (k, c) in max_dual_correspondence(sp, m.family.at(t), &duals)?.iter().enumerate() {
            if !c.agrees() {
                return Ok(Outcome::verdict(false, format!("vector dual {k} at t = {t}: sides disagree")));
            }
            maximal += c.vector_side as usize;
        }
    }
    Ok(Outcome::verdict(true, format!("sides agree; {maximal} of the sampled duals are maximal")))
}

fn implication_outcome<'a>(
    outcomes: impl Iterator<Item = &'a FixtureOutcome> + Clone,
    tier: Tier,
    what: &str,
) -> Outcome {
    let total = outcomes.clone().count();
    let vacuous = outcomes.clone().filter(|o| o.implication == Implication::Vacuous).count();
    let failures: Vec<&FixtureOutcome> = outcomes.filter(|o| !o.implication.holds()).collect();
    let summary = format!(
        "{what}: {total} finite fixtures, {vacuous} vacuous, {} violated",
        failures.len()
    );
    match failures.first() {
        None => Outcome::verdict(true, summary).sampled_if(tier),
        Some(f) => Outcome::verdict(false, summary)
            .with_witness(*f),
    }
}

fn joint_tier(r: &EquivalenceReport) -> Tier {
    let tiers = [r.joint.process.tier(), r.joint.restricted.tier(), r.joint.cross.tier()];
    if tiers.contains(&Tier::Sampled) {
        Tier::Sampled
    } else {
        Tier::Exact
    }
}

fn consistency_joint(ctx: &Ctx) -> CheckResult {
    let (forward, _) = ctx.harness()?;
    Ok(implication_outcome(forward.joint.outcomes(), joint_tier(forward), "joint conditions"))
}

fn consistency_lift(ctx: &Ctx) -> CheckResult {
    let (forward, _) = ctx.harness()?;
    Ok(implication_outcome(forward.vector.outcomes.iter(), forward.vector.tier(), "lifted measure"))
}

fn consistency_equivalence(ctx: &Ctx) -> CheckResult {
    let (forward, backward) = ctx.harness()?;
    let ok = forward.agrees() && backward.agrees();
    let summary = format!(
        "lift direction: joint {} / lifted {}; projection direction: joint {} / vector {}",
        forward.joint_holds(),
        forward.vector_holds(),
        backward.joint_holds(),
        backward.vector_holds()
    );
    let mismatch: Vec<&str> = forward
        .agreements
        .iter()
        .chain(&backward.agreements)
        .filter(|a| a.joint != a.vector)
        .map(|a| a.id.as_str())
        .collect();
    Ok(if ok { Outcome::verdict(true, summary) } else { Outcome::verdict(false, summary).with_witness(mismatch) })
}

fn one_step(ctx: &Ctx) -> CheckResult {
    let m = ctx.model;
    let rep = one_step_sufficiency(&m.space, &m.family.rho()?, &ctx.fixture_config(), &ctx.union_options())?;
    Ok(Outcome::verdict(
        rep.agrees(),
        format!(
            "one-step {} on {} fixtures, all pairs {} on {}",
            rep.one_step, rep.one_step_fixtures, rep.all_pairs, rep.all_pair_fixtures
        ),
    ))
}

fn product_families(ctx: &Ctx) -> CheckResult {
    let m = ctx.model;
    let lifted = ctx.lift()?;
    for a in lifted.sets() {
        let r = check_axioms_vector(&m.space, a, m.checks.samples, ctx.opts.seed, ctx.opts.tolerance)?;
        if !r.is_normalized() {
            return Ok(Outcome::skipped("the lift is not normalized"));
        }
    }
    let rep = product_family_check(&m.space, &lifted, &ctx.fixture_config(), &ctx.union_options())?;
    Ok(Outcome::verdict(
        rep.agrees(),
        format!("product families {}, unrestricted families {}", rep.product.holds(), rep.unrestricted.holds()),
    ))
}
