//! Sampled axiom checks shared by process and vector risk measures.

use crate::acceptance::{joint_sum, LinearSet};
use crate::error::Result;
use crate::polyhedra::{scaled_sum_subset_of, Polyhedron};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Axiom {
    CashInvariant,
    Monotone,
    FiniteAtZero,
    Normalized,
    ConditionallyConvex,
    PositivelyHomogeneous,
    TimeDecomposable,
}

impl Axiom {
    pub fn name(&self) -> &'static str {
        match self {
            Axiom::CashInvariant => "cash_invariant",
            Axiom::Monotone => "monotone",
            Axiom::FiniteAtZero => "finite_at_zero",
            Axiom::Normalized => "normalized",
            Axiom::ConditionallyConvex => "conditionally_convex",
            Axiom::PositivelyHomogeneous => "positively_homogeneous",
            Axiom::TimeDecomposable => "time_decomposable",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxiomOutcome {
    pub axiom: Axiom,
    pub holds: bool,
    pub samples: usize,
    pub witness: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct AxiomReport {
    pub outcomes: Vec<AxiomOutcome>,
}

impl AxiomReport {
    pub fn get(&self, axiom: Axiom) -> Option<&AxiomOutcome> {
        self.outcomes.iter().find(|o| o.axiom == axiom)
    }

    pub fn holds(&self, axiom: Axiom) -> bool {
        self.get(axiom).is_some_and(|o| o.holds)
    }

    /// The defining axioms of a conditional risk measure.
    pub fn is_risk_measure(&self) -> bool {
        [Axiom::CashInvariant, Axiom::Monotone, Axiom::FiniteAtZero].iter().all(|a| self.holds(*a))
    }

    pub fn is_normalized(&self) -> bool {
        self.holds(Axiom::Normalized)
    }

    pub fn is_convex(&self) -> bool {
        self.holds(Axiom::ConditionallyConvex)
    }

    pub fn is_coherent(&self) -> bool {
        self.is_convex() && self.holds(Axiom::PositivelyHomogeneous)
    }

    pub fn all_hold(&self) -> bool {
        self.outcomes.iter().all(|o| o.holds)
    }

    pub fn push(&mut self, outcome: AxiomOutcome) {
        self.outcomes.push(outcome);
    }
}

/// Sample inputs for the axiom checks, in flat coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Probe {
    pub xs: Vec<Vec<f64>>,
    pub ys: Vec<Vec<f64>>,
    pub bumps: Vec<Vec<f64>>,
    /// Joint cash vectors.
    pub shifts: Vec<Vec<f64>>,
    /// One scalar in `(0, 1)` per result cell.
    pub lambdas: Vec<Vec<f64>>,
    /// One positive scalar per result cell.
    pub factors: Vec<Vec<f64>>,
}

impl Probe {
    pub fn random(set: &LinearSet, samples: usize, seed: u64) -> Self {
        Self::random_dims(set.coords().len(), set.num_cells(), set.m(), samples, seed)
    }

    pub fn random_dims(coords: usize, cells: usize, m: usize, samples: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let vecs = |n: usize, lo: f64, hi: f64, rng: &mut ChaCha8Rng| -> Vec<Vec<f64>> {
            (0..samples).map(|_| (0..n).map(|_| rng.random_range(lo..hi)).collect()).collect()
        };
        let xs = vecs(coords, -3.0, 3.0, &mut rng);
        let ys = vecs(coords, -3.0, 3.0, &mut rng);
        let bumps = vecs(coords, 0.0, 2.0, &mut rng);
        let shifts = vecs(cells * m, -2.0, 2.0, &mut rng);
        let lambdas = vecs(cells, 0.05, 0.95, &mut rng);
        let factors = vecs(cells, 0.2, 3.0, &mut rng);
        Self { xs, ys, bumps, shifts, lambdas, factors }
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }
}

fn fmt(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.4}")).collect();
    format!("[{}]", parts.join(", "))
}

fn outcome(axiom: Axiom, samples: usize, witness: Option<String>) -> AxiomOutcome {
    AxiomOutcome { axiom, holds: witness.is_none(), samples, witness }
}

/// Runs the sampled checks of the listed axioms against `set`.
pub fn check_linear(set: &LinearSet, probe: &Probe, axioms: &[Axiom], tol: f64) -> Result<AxiomReport> {
    let mut report = AxiomReport::default();
    for &axiom in axioms {
        let witness = match axiom {
            Axiom::CashInvariant => cash_invariance(set, probe, tol)?,
            Axiom::Monotone => monotone(set, probe, tol)?,
            Axiom::FiniteAtZero => finite_at_zero(set)?,
            Axiom::Normalized => normalized(set, probe, tol)?,
            Axiom::ConditionallyConvex => convex(set, probe, tol)?,
            Axiom::PositivelyHomogeneous => homogeneous(set, probe, tol)?,
            Axiom::TimeDecomposable => continue,
        };
        report.push(outcome(axiom, probe.len(), witness));
    }
    Ok(report)
}

pub const RISK_AXIOMS: [Axiom; 6] = [
    Axiom::CashInvariant,
    Axiom::Monotone,
    Axiom::FiniteAtZero,
    Axiom::Normalized,
    Axiom::ConditionallyConvex,
    Axiom::PositivelyHomogeneous,
];

fn cash_invariance(set: &LinearSet, probe: &Probe, tol: f64) -> Result<Option<String>> {
    for (x, m) in probe.xs.iter().zip(&probe.shifts) {
        let lhs = set.eval_joint(&set.shift(x, m))?;
        let neg: Vec<f64> = m.iter().map(|v| -v).collect();
        let rhs = set.eval_joint(x)?.translate(&neg);
        if !lhs.equals(&rhs, tol)? {
            return Ok(Some(format!("X = {}, m = {}", fmt(x), fmt(m))));
        }
    }
    Ok(None)
}

fn monotone(set: &LinearSet, probe: &Probe, tol: f64) -> Result<Option<String>> {
    for (x, b) in probe.xs.iter().zip(&probe.bumps) {
        let y: Vec<f64> = x.iter().zip(b).map(|(u, v)| u + v).collect();
        if !set.eval_joint(x)?.subset_of(&set.eval_joint(&y)?, tol)? {
            return Ok(Some(format!("X = {}, Y = {}", fmt(x), fmt(&y))));
        }
    }
    // Unit bumps on single coordinates catch violations confined to one entry.
    let zero = vec![0.0; set.coords().len()];
    let base = set.eval_joint(&zero)?;
    for k in 0..zero.len() {
        let mut y = zero.clone();
        y[k] = 10.0;
        if !base.subset_of(&set.eval_joint(&y)?, tol)? {
            return Ok(Some(format!("X = 0, Y = 10 e_{k}")));
        }
    }
    Ok(None)
}

fn finite_at_zero(set: &LinearSet) -> Result<Option<String>> {
    let zero = vec![0.0; set.coords().len()];
    let joint = set.eval_joint(&zero)?;
    if joint.is_empty()? {
        return Ok(Some("the value at 0 is empty".into()));
    }
    let m = set.m();
    for c in 0..set.num_cells() {
        let keep: Vec<usize> = (c * m..(c + 1) * m).collect();
        if joint.project(&keep)?.is_full() {
            return Ok(Some(format!("the value at 0 is the whole space on cell {c}")));
        }
    }
    Ok(None)
}

fn normalized(set: &LinearSet, probe: &Probe, tol: f64) -> Result<Option<String>> {
    let zero = vec![0.0; set.coords().len()];
    let at_zero = set.eval_joint(&zero)?;
    for x in std::iter::once(&zero).chain(&probe.xs) {
        let v = set.eval_joint(x)?;
        let sum = joint_sum(set.layout(), set.m(), &v, &at_zero)?;
        if !v.equals(&sum, tol)? {
            return Ok(Some(format!("X = {}", fmt(x))));
        }
    }
    Ok(None)
}

fn convex(set: &LinearSet, probe: &Probe, tol: f64) -> Result<Option<String>> {
    for ((x, y), lam) in probe.xs.iter().zip(&probe.ys).zip(&probe.lambdas) {
        let rest: Vec<f64> = lam.iter().map(|l| 1.0 - l).collect();
        let mix: Vec<f64> =
            set.scale_cells(x, lam).iter().zip(set.scale_cells(y, &rest)).map(|(a, b)| a + b).collect();
        let (lj, rj) = (set.joint_scalars(lam), set.joint_scalars(&rest));
        let (vx, vy) = (set.eval_joint(x)?, set.eval_joint(y)?);
        let target = set.eval_joint(&mix)?;
        if !scaled_sum_subset_of(&[(&lj, &vx), (&rj, &vy)], &target, tol)? {
            return Ok(Some(format!("X = {}, Y = {}, λ = {}", fmt(x), fmt(y), fmt(lam))));
        }
    }
    Ok(None)
}

fn homogeneous(set: &LinearSet, probe: &Probe, tol: f64) -> Result<Option<String>> {
    // Samples with an empty value are uninformative when some constraint
    // ignores the cash, so the origin and a point of A are probed as well.
    let mut points = vec![vec![0.0; set.coords().len()]];
    points.extend(set.set().feasible_point()?);
    points.extend(probe.xs.iter().cloned());
    for (x, lam) in points.iter().zip(probe.factors.iter().cycle()) {
        let lhs = set.eval_joint(&set.scale_cells(x, lam))?;
        let rhs: Polyhedron = set.eval_joint(x)?.scale_diag(&set.joint_scalars(lam))?;
        if !lhs.equals(&rhs, tol)? {
            return Ok(Some(format!("X = {}, λ = {}", fmt(x), fmt(lam))));
        }
    }
    Ok(None)
}
