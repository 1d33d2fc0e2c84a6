//! Named acceptance-set families used by the fixtures and the CLI.

use crate::acceptance::Coords;
use crate::error::{Error, Result};
use crate::polyhedra::{Halfspace, Polyhedron};
use crate::riskproc::{ProcessAcceptanceSet, ProcessRiskMeasure};
use crate::riskvec::{RestrictedAcceptanceSet, VectorAcceptanceSet};
use crate::space::{Eligible, ScenarioSpace};
use serde::{Deserialize, Serialize};

/// Families of process acceptance sets `A_t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProcessFamily {
    /// `X_s ≥ 0` for every `s ≥ t`.
    WorstCase,
    /// `X_s ≥ c` componentwise for every `s ≥ t`.
    Shifted { c: Vec<f64> },
    /// `E_t[X_T] ≥ 0` per component.
    TerminalExpectation,
    /// `X_s ≥ −floor` together with `E_t[X_T] ≥ 0`.
    BoundedExpectation { floor: f64 },
    /// The worst case with an upper bound `X_T ≤ 3` on the first terminal
    /// atom and asset, which breaks monotonicity.
    NonMonotone,
    /// At `t = 0`: `X_0 ≥ 0` and `E[X_T] ≥ 0`, ignoring intermediate times.
    /// Later times use the worst case.
    NonRecursive,
}

impl ProcessFamily {
    pub fn name(&self) -> String {
        match self {
            ProcessFamily::WorstCase => "worst_case".into(),
            ProcessFamily::Shifted { c } => format!("shifted{c:?}"),
            ProcessFamily::TerminalExpectation => "terminal_expectation".into(),
            ProcessFamily::BoundedExpectation { floor } => format!("bounded_expectation({floor})"),
            ProcessFamily::NonMonotone => "non_monotone".into(),
            ProcessFamily::NonRecursive => "non_recursive".into(),
        }
    }
}

fn unit(n: usize, k: usize, v: f64) -> Vec<f64> {
    let mut e = vec![0.0; n];
    e[k] = v;
    e
}

fn lower_bounds(coords: &Coords, c: &[f64], times: impl Fn(usize) -> bool) -> Vec<Halfspace> {
    coords
        .entries()
        .enumerate()
        .filter(|(_, (s, _, _))| times(*s))
        .map(|(k, (_, _, i))| Halfspace::new(unit(coords.len(), k, 1.0), c[i % c.len()]))
        .collect()
}

/// `E_t[X_T]_i ≥ 0` on every atom of `F_t`.
fn terminal_expectation_rows(space: &ScenarioSpace, coords: &Coords, t: usize) -> Vec<Halfspace> {
    let big_t = space.horizon();
    let mut rows = Vec::new();
    for a in 0..space.num_atoms(t) {
        for i in 0..coords.d() {
            let mut normal = vec![0.0; coords.len()];
            for b in space.descendants(t, a, big_t) {
                normal[coords.index(big_t, b, i).expect("terminal coordinate")] =
                    space.atom_prob(big_t, b) / space.atom_prob(t, a);
            }
            rows.push(Halfspace::new(normal, 0.0));
        }
    }
    rows
}

pub fn process_family_rows(
    space: &ScenarioSpace,
    family: &ProcessFamily,
    t: usize,
    eligible: Eligible,
) -> Result<Vec<Halfspace>> {
    space.check_time(t)?;
    let coords = Coords::process(space, t, eligible.d);
    let zero = vec![0.0];
    Ok(match family {
        ProcessFamily::WorstCase => lower_bounds(&coords, &zero, |_| true),
        ProcessFamily::Shifted { c } => {
            if c.is_empty() || (c.len() != 1 && c.len() != eligible.d) {
                return Err(Error::InvalidArgument(format!("shift must have 1 or d = {} entries", eligible.d)));
            }
            lower_bounds(&coords, c, |_| true)
        }
        ProcessFamily::TerminalExpectation => terminal_expectation_rows(space, &coords, t),
        ProcessFamily::BoundedExpectation { floor } => {
            let mut rows = lower_bounds(&coords, &[-floor], |_| true);
            rows.extend(terminal_expectation_rows(space, &coords, t));
            rows
        }
        ProcessFamily::NonMonotone => {
            let mut rows = lower_bounds(&coords, &zero, |_| true);
            let k = coords.index(space.horizon(), 0, 0).expect("terminal coordinate");
            rows.push(Halfspace::new(unit(coords.len(), k, -1.0), -3.0));
            rows
        }
        ProcessFamily::NonRecursive => {
            if t == 0 {
                let mut rows = lower_bounds(&coords, &zero, |s| s == 0);
                rows.extend(terminal_expectation_rows(space, &coords, 0));
                rows
            } else {
                lower_bounds(&coords, &zero, |_| true)
            }
        }
    })
}

pub fn process_family(
    space: &ScenarioSpace,
    family: &ProcessFamily,
    t: usize,
    eligible: Eligible,
) -> Result<ProcessAcceptanceSet> {
    ProcessAcceptanceSet::from_rows(space, t, eligible, process_family_rows(space, family, t, eligible)?)
}

/// The dynamic risk measure of a family, one acceptance set per time.
pub fn process_measure(space: &ScenarioSpace, family: &ProcessFamily, eligible: Eligible) -> Result<ProcessRiskMeasure> {
    let sets = space.times().map(|t| process_family(space, family, t, eligible)).collect::<Result<_>>()?;
    ProcessRiskMeasure::new(family.name(), sets)
}

/// Families of restricted acceptance sets `A_{R_s}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RestrictedFamily {
    /// `Z ≥ 0`.
    Orthant,
    /// `Z ≥ c`.
    Shifted { c: Vec<f64> },
    /// `Σ_i Z_i ≥ 0` per atom.
    HalfPlane,
}

pub fn restricted_family(
    space: &ScenarioSpace,
    family: &RestrictedFamily,
    s: usize,
    eligible: Eligible,
) -> Result<RestrictedAcceptanceSet> {
    space.check_time(s)?;
    let coords = Coords::slice(space, s, eligible.d);
    let rows = match family {
        RestrictedFamily::Orthant => lower_bounds(&coords, &[0.0], |_| true),
        RestrictedFamily::Shifted { c } => {
            if c.is_empty() || (c.len() != 1 && c.len() != eligible.d) {
                return Err(Error::InvalidArgument(format!("shift must have 1 or d = {} entries", eligible.d)));
            }
            lower_bounds(&coords, c, |_| true)
        }
        RestrictedFamily::HalfPlane => (0..space.num_atoms(s))
            .map(|b| {
                let normal = coords.entries().map(|(_, c, _)| if c == b { 1.0 } else { 0.0 }).collect();
                Halfspace::new(normal, 0.0)
            })
            .collect(),
    };
    RestrictedAcceptanceSet::from_rows(space, s, eligible, rows)
}

/// How the restricted sets `A_{R_s^t}` depend on the evaluation time `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RestrictedSchedule {
    /// The same family for every `t`.
    Fixed { family: RestrictedFamily },
    /// The orthant one step after `s` and the half-plane afterwards.
    TimeDependent,
}

impl RestrictedSchedule {
    pub fn family_at(&self, s: usize, t: usize) -> RestrictedFamily {
        match self {
            RestrictedSchedule::Fixed { family } => family.clone(),
            RestrictedSchedule::TimeDependent => {
                if t == s + 1 {
                    RestrictedFamily::Orthant
                } else {
                    RestrictedFamily::HalfPlane
                }
            }
        }
    }
}

/// Families of vector acceptance sets `Ā_t` defined directly on the optional
/// space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum VectorFamily {
    /// `Z ≥ 0` on every point of `Ω̄`.
    NonNegative,
    /// `Z ≥ c` everywhere.
    Shifted { c: Vec<f64> },
    /// The non-negative cone plus `Z_0 + Z_T(first atom) ≥ 1` on the first
    /// asset, which couples a realized cell with a block when `t ≥ 1`.
    Coupled,
}

pub fn vector_family(
    space: &ScenarioSpace,
    family: &VectorFamily,
    t: usize,
    eligible: Eligible,
) -> Result<VectorAcceptanceSet> {
    let coords = Coords::process(space, 0, eligible.d);
    let rows = match family {
        VectorFamily::NonNegative => lower_bounds(&coords, &[0.0], |_| true),
        VectorFamily::Shifted { c } => lower_bounds(&coords, c, |_| true),
        VectorFamily::Coupled => {
            let mut rows = lower_bounds(&coords, &[0.0], |_| true);
            let mut normal = vec![0.0; coords.len()];
            normal[coords.index(0, 0, 0).expect("time 0")] = 1.0;
            normal[coords.index(space.horizon(), 0, 0).expect("terminal")] = 1.0;
            rows.push(Halfspace::new(normal, 1.0));
            rows
        }
    };
    VectorAcceptanceSet::new(space, t, eligible, Polyhedron::new(coords.len(), rows)?)
}
