//! Fourier–Motzkin elimination with LP-based pruning.

use super::{Halfspace, Polyhedron};
use crate::error::Result;
use crate::lp::{self, LpOutcome, Row};

/// Pruning kicks in once a system has more rows than this.
const PRUNE_THRESHOLD: usize = 24;

/// Eliminates the listed coordinates; the result lives in the same ambient
/// dimension with zero coefficients on eliminated coordinates.
pub fn eliminate(poly: &Polyhedron, vars: &[usize]) -> Result<Polyhedron> {
    if poly.is_flagged_empty() {
        return Ok(poly.clone());
    }
    let dim = poly.dim();
    let mut rows: Vec<Halfspace> = poly.rows().to_vec();
    let mut pending: Vec<usize> = vars.to_vec();
    while !pending.is_empty() {
        // Cheapest variable first: fewest generated rows.
        let (pos, &var) = pending
            .iter()
            .enumerate()
            .min_by_key(|(_, &v)| {
                let p = rows.iter().filter(|r| r.normal[v] > 0.0).count();
                let n = rows.iter().filter(|r| r.normal[v] < 0.0).count();
                p * n
            })
            .expect("pending is non-empty");
        pending.swap_remove(pos);
        rows = eliminate_one(&rows, var);
        rows = Polyhedron::new(dim, rows)?.rows().to_vec();
        if rows.len() > PRUNE_THRESHOLD {
            rows = prune(rows)?;
        }
    }
    Polyhedron::new(dim, rows)
}

fn eliminate_one(rows: &[Halfspace], var: usize) -> Vec<Halfspace> {
    let (mut pos, mut neg, mut out) = (Vec::new(), Vec::new(), Vec::new());
    for r in rows {
        let c = r.normal[var];
        if c > 0.0 {
            pos.push(r);
        } else if c < 0.0 {
            neg.push(r);
        } else {
            out.push(r.clone());
        }
    }
    for p in &pos {
        for n in &neg {
            let (a, b) = (-n.normal[var], p.normal[var]);
            let mut normal: Vec<f64> = p.normal.iter().zip(&n.normal).map(|(x, y)| a * x + b * y).collect();
            normal[var] = 0.0;
            out.push(Halfspace::new(normal, a * p.offset + b * n.offset));
        }
    }
    out
}

/// Removes rows implied by the others.
fn prune(mut rows: Vec<Halfspace>) -> Result<Vec<Halfspace>> {
    let mut i = 0;
    while i < rows.len() {
        let others: Vec<Row<'_>> = rows
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, r)| Row { coef: &r.normal, rhs: r.offset })
            .collect();
        let redundant = match lp::minimize(&rows[i].normal, others)? {
            LpOutcome::Optimal { value, .. } => value >= rows[i].offset - 1e-10,
            LpOutcome::Infeasible => return Ok(infeasible_system(rows[i].normal.len())),
            LpOutcome::Unbounded => false,
        };
        if redundant {
            rows.swap_remove(i);
        } else {
            i += 1;
        }
    }
    Ok(rows)
}

fn infeasible_system(dim: usize) -> Vec<Halfspace> {
    vec![Halfspace::new(vec![0.0; dim], 1.0)]
}
