//! Thin wrapper over the HiGHS simplex solver.
//!
//! Every program has free variables and constraints of the form `a·x ≥ b`.

use crate::error::{Error, Result};
use highs::{HighsModelStatus, RowProblem, Sense};

/// Coefficients below this magnitude are dropped before handing rows to the solver.
const COEF_EPS: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { value: f64, point: Vec<f64> },
    Unbounded,
    Infeasible,
}

impl LpOutcome {
    pub fn is_feasible(&self) -> bool {
        !matches!(self, LpOutcome::Infeasible)
    }
}

/// A constraint row `coef·x ≥ rhs`.
#[derive(Debug, Clone, Copy)]
pub struct Row<'a> {
    pub coef: &'a [f64],
    pub rhs: f64,
}

/// Minimizes `objective·x` over `{x : coef·x ≥ rhs}` with all variables free.
pub fn minimize<'a, I>(objective: &[f64], rows: I) -> Result<LpOutcome>
where
    I: IntoIterator<Item = Row<'a>>,
{
    solve(objective, rows, None)
}

/// Minimizes with per-variable bounds `lo_i ≤ x_i ≤ hi_i` (infinite bounds allowed).
pub fn minimize_bounded<'a, I>(
    objective: &[f64],
    rows: I,
    bounds: &[(f64, f64)],
) -> Result<LpOutcome>
where
    I: IntoIterator<Item = Row<'a>>,
{
    solve(objective, rows, Some(bounds))
}

/// Maximizes; the reported value is the maximum.
pub fn maximize<'a, I>(objective: &[f64], rows: I) -> Result<LpOutcome>
where
    I: IntoIterator<Item = Row<'a>>,
{
    let neg: Vec<f64> = objective.iter().map(|c| -c).collect();
    Ok(match minimize(&neg, rows)? {
        LpOutcome::Optimal { value, point } => LpOutcome::Optimal { value: -value, point },
        other => other,
    })
}

/// Returns a feasible point, or `None` when the system is infeasible.
pub fn feasible_point<'a, I>(dim: usize, rows: I) -> Result<Option<Vec<f64>>>
where
    I: IntoIterator<Item = Row<'a>>,
{
    match minimize(&vec![0.0; dim], rows)? {
        LpOutcome::Optimal { point, .. } => Ok(Some(point)),
        LpOutcome::Infeasible => Ok(None),
        LpOutcome::Unbounded => Err(Error::Lp("zero objective reported unbounded".into())),
    }
}

fn solve<'a, I>(objective: &[f64], rows: I, bounds: Option<&[(f64, f64)]>) -> Result<LpOutcome>
where
    I: IntoIterator<Item = Row<'a>>,
{
    let dim = objective.len();
    let mut problem = RowProblem::default();
    let cols: Vec<_> = (0..dim)
        .map(|j| {
            let (lo, hi) = bounds.map(|b| b[j]).unwrap_or((f64::NEG_INFINITY, f64::INFINITY));
            problem.add_column(objective[j], lo..=hi)
        })
        .collect();
    let mut feasibility = RowProblem::default();
    let fcols: Vec<_> = (0..dim)
        .map(|j| {
            let (lo, hi) = bounds.map(|b| b[j]).unwrap_or((f64::NEG_INFINITY, f64::INFINITY));
            feasibility.add_column(0.0, lo..=hi)
        })
        .collect();
    let mut trivially_infeasible = false;
    let mut num_rows = 0;
    for row in rows {
        if row.coef.len() != dim {
            return Err(Error::Dimension(format!(
                "constraint has {} coefficients, program has {dim} variables",
                row.coef.len()
            )));
        }
        let nz: Vec<(usize, f64)> =
            row.coef.iter().copied().enumerate().filter(|(_, c)| c.abs() > COEF_EPS).collect();
        if nz.is_empty() {
            if row.rhs > 1e-9 {
                trivially_infeasible = true;
            }
            continue;
        }
        let expr: Vec<_> = nz.iter().map(|&(j, c)| (cols[j], c)).collect();
        problem.add_row(row.rhs..=f64::INFINITY, &expr);
        let fexpr: Vec<_> = nz.iter().map(|&(j, c)| (fcols[j], c)).collect();
        feasibility.add_row(row.rhs..=f64::INFINITY, &fexpr);
        num_rows += 1;
    }
    if trivially_infeasible {
        return Ok(LpOutcome::Infeasible);
    }
    if dim == 0 {
        return Ok(LpOutcome::Optimal { value: 0.0, point: Vec::new() });
    }
    if num_rows == 0 && bounds.is_none() {
        return Ok(if objective.iter().all(|c| c.abs() <= COEF_EPS) {
            LpOutcome::Optimal { value: 0.0, point: vec![0.0; dim] }
        } else {
            LpOutcome::Unbounded
        });
    }
    match run(problem)? {
        Status::Solved(point) => {
            let value = objective.iter().zip(&point).map(|(c, x)| c * x).sum();
            Ok(LpOutcome::Optimal { value, point })
        }
        Status::Infeasible => Ok(LpOutcome::Infeasible),
        Status::Unbounded => Ok(LpOutcome::Unbounded),
        Status::Ambiguous => match run(feasibility)? {
            Status::Solved(_) => Ok(LpOutcome::Unbounded),
            Status::Infeasible | Status::Ambiguous => Ok(LpOutcome::Infeasible),
            Status::Unbounded => Err(Error::Lp("zero objective reported unbounded".into())),
        },
    }
}

enum Status {
    Solved(Vec<f64>),
    Infeasible,
    Unbounded,
    Ambiguous,
}

fn run(problem: RowProblem) -> Result<Status> {
    let mut model = problem.optimise(Sense::Minimise);
    model.make_quiet();
    model.set_option("presolve", "off");
    let solved = model.try_solve().map_err(|e| Error::Lp(format!("{e:?}")))?;
    match solved.status() {
        HighsModelStatus::Optimal => Ok(Status::Solved(solved.get_solution().columns().to_vec())),
        HighsModelStatus::Infeasible => Ok(Status::Infeasible),
        HighsModelStatus::Unbounded => Ok(Status::Unbounded),
        HighsModelStatus::UnboundedOrInfeasible => Ok(Status::Ambiguous),
        other => Err(Error::Lp(format!("solver stopped with status {other:?}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(coef: &[f64], rhs: f64) -> Row<'_> {
        Row { coef, rhs }
    }

    #[test]
    fn free_variables_optimum() {
        // min x + y  s.t. x ≥ 1, y ≥ -2, x + y ≥ 0
        let out = minimize(
            &[1.0, 1.0],
            [row(&[1.0, 0.0], 1.0), row(&[0.0, 1.0], -2.0), row(&[1.0, 1.0], 0.0)],
        )
        .unwrap();
        match out {
            LpOutcome::Optimal { value, .. } => assert!((value - 0.0).abs() < 1e-9),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unbounded_and_infeasible() {
        assert_eq!(minimize(&[1.0], [row(&[-1.0], 0.0)]).unwrap(), LpOutcome::Unbounded);
        assert_eq!(minimize(&[1.0], std::iter::empty()).unwrap(), LpOutcome::Unbounded);
        assert_eq!(
            minimize(&[0.0], [row(&[1.0], 2.0), row(&[-1.0], -1.0)]).unwrap(),
            LpOutcome::Infeasible
        );
    }

    #[test]
    fn negative_optimum_on_free_variable() {
        let out = minimize(&[1.0], [row(&[1.0], -3.5)]).unwrap();
        match out {
            LpOutcome::Optimal { value, point } => {
                assert!((value + 3.5).abs() < 1e-9);
                assert!((point[0] + 3.5).abs() < 1e-9);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn maximize_flips_sign() {
        let out = maximize(&[1.0], [row(&[-1.0], -4.0)]).unwrap();
        assert!(matches!(out, LpOutcome::Optimal { value, .. } if (value - 4.0).abs() < 1e-9));
    }

    #[test]
    fn zero_rows() {
        assert_eq!(minimize(&[0.0], [row(&[0.0], 1.0)]).unwrap(), LpOutcome::Infeasible);
        assert!(feasible_point(1, [row(&[0.0], -1.0)]).unwrap().is_some());
    }
}
