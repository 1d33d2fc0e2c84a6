//! Deciding `L ⊆ R_1 ∪ … ∪ R_k` for polyhedra.
//!
//! A point of `L` outside every `R_j` must violate at least one facet of each
//! `R_j`. The search branches on that choice of facets, one union member at a
//! time, and prunes branches whose region becomes empty. Facet violations are
//! required to exceed a small margin so that touching sets count as covered.

use super::{Halfspace, Polyhedron};
use crate::error::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Tier {
    Exact,
    Sampled,
}

/// Evidence that the witness point lies outside union member `member`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certificate {
    pub member: usize,
    pub facet: usize,
    pub slack: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum InclusionVerdict {
    Included { tier: Tier },
    Violated { point: Vec<f64>, certificates: Vec<Certificate> },
}

impl InclusionVerdict {
    pub fn holds(&self) -> bool {
        matches!(self, InclusionVerdict::Included { .. })
    }
}

#[derive(Debug, Clone)]
pub struct UnionOptions {
    pub tol: f64,
    pub margin: f64,
    pub node_budget: usize,
    pub samples: usize,
    pub seed: u64,
}

impl Default for UnionOptions {
    fn default() -> Self {
        Self { tol: super::SET_TOL, margin: 1e-6, node_budget: 20_000, samples: 10_000, seed: 0 }
    }
}

pub fn union_inclusion(left: &Polyhedron, rights: &[Polyhedron], opts: &UnionOptions) -> Result<InclusionVerdict> {
    let Some(start) = left.feasible_point()? else {
        return Ok(InclusionVerdict::Included { tier: Tier::Exact });
    };
    let mut members = Vec::new();
    for (j, r) in rights.iter().enumerate() {
        if r.is_empty()? {
            continue;
        }
        if left.subset_of(r, opts.tol)? {
            return Ok(InclusionVerdict::Included { tier: Tier::Exact });
        }
        members.push(j);
    }
    if let Some(v) = witness_at(&start, rights, &members, opts) {
        return Ok(v);
    }

    let mut stack: Vec<(Vec<Halfspace>, Vec<usize>)> = vec![(Vec::new(), members.clone())];
    let mut nodes = 0usize;
    while let Some((extra, open)) = stack.pop() {
        nodes += 1;
        if nodes > opts.node_budget {
            return sample(left, rights, &members, opts);
        }
        let region = left.with_rows(extra.iter().cloned())?;
        let Some(x) = region.feasible_point()? else { continue };
        if let Some(v) = witness_at(&x, rights, &members, opts) {
            return Ok(v);
        }
        let Some(&j) = open.iter().find(|&&j| rights[j].contains(&x, opts.margin)) else {
            // Every open member is violated at x; closed ones are excluded by
            // construction.
            return Ok(violation(&x, rights, &members));
        };
        let rest: Vec<usize> = open.iter().copied().filter(|&k| k != j).collect();
        for f in rights[j].rows() {
            let mut child = extra.clone();
            child.push(Halfspace::new(f.normal.iter().map(|v| -v).collect(), -f.offset + opts.margin));
            stack.push((child, rest.clone()));
        }
    }
    Ok(InclusionVerdict::Included { tier: Tier::Exact })
}

fn witness_at(x: &[f64], rights: &[Polyhedron], members: &[usize], opts: &UnionOptions) -> Option<InclusionVerdict> {
    let outside_all = members.iter().all(|&j| !rights[j].contains(x, opts.margin * 0.5));
    outside_all.then(|| violation(x, rights, members))
}

fn violation(x: &[f64], rights: &[Polyhedron], members: &[usize]) -> InclusionVerdict {
    let certificates = members
        .iter()
        .map(|&j| {
            let (facet, slack) = rights[j]
                .rows()
                .iter()
                .enumerate()
                .map(|(k, r)| (k, r.slack(x)))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .expect("non-full member has a facet");
            Certificate { member: j, facet, slack }
        })
        .collect();
    InclusionVerdict::Violated { point: x.to_vec(), certificates }
}

/// Seeded point sampling from `left`: LP extreme points along random
/// directions, their convex combinations, and upward perturbations.
fn sample(left: &Polyhedron, rights: &[Polyhedron], members: &[usize], opts: &UnionOptions) -> Result<InclusionVerdict> {
    let n = left.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut anchors: Vec<Vec<f64>> = Vec::new();
    for _ in 0..(4 * n).max(8) {
        let c: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1.0)).collect();
        if let super::Support::Attained { point, .. } = left.minimize(&c)? {
            anchors.push(point);
        }
    }
    if anchors.is_empty() {
        anchors.push(left.feasible_point()?.expect("left is non-empty"));
    }
    for _ in 0..opts.samples {
        let a = &anchors[rng.random_range(0..anchors.len())];
        let b = &anchors[rng.random_range(0..anchors.len())];
        let t: f64 = rng.random_range(0.0..1.0);
        let bump: f64 = if rng.random_bool(0.5) { 0.0 } else { rng.random_range(0.0..2.0) };
        let x: Vec<f64> = a
            .iter()
            .zip(b)
            .map(|(u, v)| t * u + (1.0 - t) * v + bump * rng.random_range(0.0..1.0))
            .collect();
        if left.contains(&x, 1e-9) {
            if let Some(v) = witness_at(&x, rights, members, opts) {
                return Ok(v);
            }
        }
    }
    Ok(InclusionVerdict::Included { tier: Tier::Sampled })
}
