//! Upper convex polyhedra in H-representation and their conditional
//! (per-atom) versions.

mod conditional;
mod fm;
mod union;

pub use conditional::{gamma_eligible, gamma_set, ConditionalPolyhedron, DualDirection, Layout};
pub use fm::eliminate;
pub use union::{union_inclusion, Certificate, InclusionVerdict, Tier, UnionOptions};

use crate::error::{Error, Result};
use crate::lp::{self, LpOutcome, Row};

/// Default tolerance for set comparisons.
pub const SET_TOL: f64 = 1e-7;

/// Rows whose normal is below this magnitude are treated as constant.
const ZERO_NORMAL: f64 = 1e-12;

/// A constant row `0 ≥ offset` with `offset` above this is infeasible.
const CONSTANT_SLACK: f64 = 1e-9;

/// The halfspace `normal · x ≥ offset`.
#[derive(Debug, Clone, PartialEq)]
pub struct Halfspace {
    pub normal: Vec<f64>,
    pub offset: f64,
}

impl Halfspace {
    pub fn new(normal: Vec<f64>, offset: f64) -> Self {
        Self { normal, offset }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        dot(&self.normal, x)
    }

    /// `normal · x − offset`; non-negative inside.
    pub fn slack(&self, x: &[f64]) -> f64 {
        self.value(x) - self.offset
    }

    fn as_row(&self) -> Row<'_> {
        Row { coef: &self.normal, rhs: self.offset }
    }

    /// Rescales so the largest coefficient has magnitude one; `None` for a
    /// numerically zero normal.
    fn normalized(&self) -> Option<Halfspace> {
        let scale = self.normal.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if scale <= ZERO_NORMAL {
            return None;
        }
        let normal = self
            .normal
            .iter()
            .map(|v| {
                let v = v / scale;
                if v.abs() <= ZERO_NORMAL {
                    0.0
                } else {
                    v
                }
            })
            .collect();
        Some(Halfspace { normal, offset: self.offset / scale })
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Result of minimizing a linear functional over a polyhedron.
#[derive(Debug, Clone, PartialEq)]
pub enum Support {
    Empty,
    Unbounded,
    Attained { value: f64, point: Vec<f64> },
}

impl Support {
    /// Infimum as an extended real (`+∞` for the empty set).
    pub fn value(&self) -> f64 {
        match self {
            Support::Empty => f64::INFINITY,
            Support::Unbounded => f64::NEG_INFINITY,
            Support::Attained { value, .. } => *value,
        }
    }
}

/// A closed convex polyhedron `{x ∈ ℝ^n : a_i · x ≥ b_i}`, possibly empty.
#[derive(Debug, Clone, PartialEq)]
pub struct Polyhedron {
    dim: usize,
    rows: Vec<Halfspace>,
    empty: bool,
}

impl Polyhedron {
    /// Normalizes rows; constant rows are dropped or mark the set empty.
    pub fn new(dim: usize, rows: Vec<Halfspace>) -> Result<Self> {
        let mut out = Self { dim, rows: Vec::with_capacity(rows.len()), empty: false };
        for row in rows {
            if row.normal.len() != dim {
                return Err(Error::Dimension(format!(
                    "halfspace has {} coefficients in dimension {dim}",
                    row.normal.len()
                )));
            }
            if !row.offset.is_finite() {
                if row.offset == f64::NEG_INFINITY {
                    continue;
                }
                out.empty = true;
                continue;
            }
            match row.normalized() {
                Some(r) => {
                    if !out.rows.contains(&r) {
                        out.rows.push(r)
                    }
                }
                None => {
                    if row.offset > CONSTANT_SLACK {
                        out.empty = true;
                    }
                }
            }
        }
        if out.empty {
            out.rows.clear();
        }
        Ok(out)
    }

    pub fn full(dim: usize) -> Self {
        Self { dim, rows: Vec::new(), empty: false }
    }

    pub fn empty(dim: usize) -> Self {
        Self { dim, rows: Vec::new(), empty: true }
    }

    /// `{x : x ≥ lower}` componentwise.
    pub fn orthant(lower: &[f64]) -> Self {
        let n = lower.len();
        let rows = (0..n)
            .map(|i| {
                let mut e = vec![0.0; n];
                e[i] = 1.0;
                Halfspace::new(e, lower[i])
            })
            .collect();
        Self::new(n, rows).expect("consistent dimensions")
    }

    /// The singleton `{p}`.
    pub fn point(p: &[f64]) -> Self {
        let n = p.len();
        let mut rows = Vec::with_capacity(2 * n);
        for i in 0..n {
            let mut e = vec![0.0; n];
            e[i] = 1.0;
            rows.push(Halfspace::new(e.clone(), p[i]));
            e[i] = -1.0;
            rows.push(Halfspace::new(e, -p[i]));
        }
        Self::new(n, rows).expect("consistent dimensions")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rows(&self) -> &[Halfspace] {
        &self.rows
    }

    /// Structural emptiness flag (set by constant infeasible rows).
    pub fn is_flagged_empty(&self) -> bool {
        self.empty
    }

    pub fn is_full(&self) -> bool {
        !self.empty && self.rows.is_empty()
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        !self.empty && self.rows.iter().all(|r| r.slack(x) >= -tol)
    }

    /// Minimizes `c · x` over the set.
    pub fn minimize(&self, c: &[f64]) -> Result<Support> {
        if self.empty {
            return Ok(Support::Empty);
        }
        Ok(match lp::minimize(c, self.rows.iter().map(Halfspace::as_row))? {
            LpOutcome::Optimal { value, point } => Support::Attained { value, point },
            LpOutcome::Unbounded => Support::Unbounded,
            LpOutcome::Infeasible => Support::Empty,
        })
    }

    pub fn feasible_point(&self) -> Result<Option<Vec<f64>>> {
        if self.empty {
            return Ok(None);
        }
        lp::feasible_point(self.dim, self.rows.iter().map(Halfspace::as_row))
    }

    pub fn is_empty(&self) -> Result<bool> {
        Ok(self.feasible_point()?.is_none())
    }

    /// `self ⊆ other` up to `tol` on each facet of `other`.
    pub fn subset_of(&self, other: &Polyhedron, tol: f64) -> Result<bool> {
        if self.is_empty()? {
            return Ok(true);
        }
        if other.empty {
            return Ok(false);
        }
        for row in &other.rows {
            // A row of `self` with the same normal settles the facet without an LP.
            if self.rows.iter().any(|r| r.normal == row.normal && r.offset >= row.offset - tol) {
                continue;
            }
            match self.minimize(&row.normal)? {
                Support::Attained { value, .. } if value >= row.offset - tol => {}
                Support::Empty => return Ok(true),
                _ => return Ok(false),
            }
        }
        Ok(true)
    }

    pub fn equals(&self, other: &Polyhedron, tol: f64) -> Result<bool> {
        Ok(self.subset_of(other, tol)? && other.subset_of(self, tol)?)
    }

    pub fn intersect(&self, other: &Polyhedron) -> Result<Polyhedron> {
        self.check_dim(other)?;
        if self.empty || other.empty {
            return Ok(Polyhedron::empty(self.dim));
        }
        Polyhedron::new(self.dim, self.rows.iter().chain(&other.rows).cloned().collect())
    }

    /// Adds the halfspaces to the set.
    pub fn with_rows(&self, rows: impl IntoIterator<Item = Halfspace>) -> Result<Polyhedron> {
        if self.empty {
            return Ok(self.clone());
        }
        Polyhedron::new(self.dim, self.rows.iter().cloned().chain(rows).collect())
    }

    /// `self + {v}`.
    pub fn translate(&self, v: &[f64]) -> Polyhedron {
        Polyhedron {
            dim: self.dim,
            rows: self.rows.iter().map(|r| Halfspace::new(r.normal.clone(), r.offset + r.value(v))).collect(),
            empty: self.empty,
        }
    }

    /// `λ · self` for `λ ≥ 0`; `0 · A = {0}` for non-empty `A`.
    pub fn scale(&self, lambda: f64) -> Result<Polyhedron> {
        if lambda < 0.0 {
            return Err(Error::NegativeScale(lambda));
        }
        if self.empty {
            return Ok(self.clone());
        }
        if lambda == 0.0 {
            return Ok(if self.is_empty()? { Polyhedron::empty(self.dim) } else { Polyhedron::point(&vec![0.0; self.dim]) });
        }
        Ok(Polyhedron {
            dim: self.dim,
            rows: self.rows.iter().map(|r| Halfspace::new(r.normal.clone(), r.offset * lambda)).collect(),
            empty: false,
        })
    }

    /// `{x : Λ^{-1} x ∈ self}` for a positive diagonal `Λ`, i.e. `Λ · self`.
    pub fn scale_diag(&self, lambda: &[f64]) -> Result<Polyhedron> {
        if let Some(&l) = lambda.iter().find(|&&l| l < 0.0) {
            return Err(Error::NegativeScale(l));
        }
        if lambda.iter().any(|&l| l == 0.0) {
            return Err(Error::InvalidArgument("diagonal scaling must be positive".into()));
        }
        Polyhedron::new(
            self.dim,
            self.rows
                .iter()
                .map(|r| Halfspace::new(r.normal.iter().zip(lambda).map(|(a, l)| a / l).collect(), r.offset))
                .collect(),
        )
        .map(|p| if self.empty { Polyhedron::empty(self.dim) } else { p })
    }

    /// `self −̇ other = {m : other + m ⊆ self}`.
    pub fn minkowski_diff(&self, other: &Polyhedron) -> Result<Polyhedron> {
        self.check_dim(other)?;
        if other.is_empty()? {
            return Ok(Polyhedron::full(self.dim));
        }
        if self.empty {
            return Ok(Polyhedron::empty(self.dim));
        }
        let mut rows = Vec::with_capacity(self.rows.len());
        for r in &self.rows {
            match other.minimize(&r.normal)? {
                Support::Attained { value, .. } => rows.push(Halfspace::new(r.normal.clone(), r.offset - value)),
                Support::Unbounded => return Ok(Polyhedron::empty(self.dim)),
                Support::Empty => unreachable!("emptiness handled above"),
            }
        }
        Polyhedron::new(self.dim, rows)
    }

    /// The closed Minkowski sum `self + other`.
    pub fn minkowski_sum(&self, other: &Polyhedron) -> Result<Polyhedron> {
        self.check_dim(other)?;
        if self.is_empty()? || other.is_empty()? {
            return Ok(Polyhedron::empty(self.dim));
        }
        if self.rows.is_empty() || other.rows.is_empty() {
            return Ok(Polyhedron::full(self.dim));
        }
        if let Some(sum) = self.parallel_sum(other)? {
            return Ok(sum);
        }
        // {z : ∃ y ∈ A, z − y ∈ B}; variables (z, y).
        let n = self.dim;
        let mut rows = Vec::with_capacity(self.rows.len() + other.rows.len());
        for r in &self.rows {
            let mut normal = vec![0.0; 2 * n];
            normal[n..].copy_from_slice(&r.normal);
            rows.push(Halfspace::new(normal, r.offset));
        }
        for r in &other.rows {
            let mut normal = vec![0.0; 2 * n];
            normal[..n].copy_from_slice(&r.normal);
            for (dst, v) in normal[n..].iter_mut().zip(&r.normal) {
                *dst = -v;
            }
            rows.push(Halfspace::new(normal, r.offset));
        }
        let lifted = Polyhedron::new(2 * n, rows)?;
        lifted.project(&(0..n).collect::<Vec<_>>())
    }

    /// Exact sum when every normal of both sets points the same direction.
    fn parallel_sum(&self, other: &Polyhedron) -> Result<Option<Polyhedron>> {
        let dir = &self.rows[0].normal;
        let all_parallel = self.rows.iter().chain(&other.rows).all(|r| &r.normal == dir);
        if !all_parallel {
            return Ok(None);
        }
        let a = self.rows.iter().map(|r| r.offset).fold(f64::NEG_INFINITY, f64::max);
        let b = other.rows.iter().map(|r| r.offset).fold(f64::NEG_INFINITY, f64::max);
        Ok(Some(Polyhedron::new(self.dim, vec![Halfspace::new(dir.clone(), a + b)])?))
    }

    /// Projection onto the listed coordinates (in that order).
    pub fn project(&self, keep: &[usize]) -> Result<Polyhedron> {
        if self.is_empty()? {
            return Ok(Polyhedron::empty(keep.len()));
        }
        let drop: Vec<usize> = (0..self.dim).filter(|j| !keep.contains(j)).collect();
        let reduced = eliminate(self, &drop)?;
        let rows = reduced
            .rows
            .iter()
            .map(|r| Halfspace::new(keep.iter().map(|&j| r.normal[j]).collect(), r.offset))
            .collect();
        Polyhedron::new(keep.len(), rows)
    }

    /// Drops redundant halfspaces (one LP per row).
    pub fn canonicalize(&self) -> Result<Polyhedron> {
        if self.is_empty()? {
            return Ok(Polyhedron::empty(self.dim));
        }
        let mut kept: Vec<Halfspace> = self.rows.clone();
        let mut i = 0;
        while i < kept.len() {
            let row = kept[i].clone();
            let others: Vec<Row<'_>> =
                kept.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, r)| r.as_row()).collect();
            let redundant = match lp::minimize(&row.normal, others)? {
                LpOutcome::Optimal { value, .. } => value >= row.offset - 1e-10,
                _ => false,
            };
            if redundant {
                kept.remove(i);
            } else {
                i += 1;
            }
        }
        Polyhedron::new(self.dim, kept)
    }

    /// `P + ℝ^n_+ = P`. For a non-empty polyhedron the recession cone is
    /// `{x : a_i · x ≥ 0}` over all rows, so this holds iff every normal is
    /// non-negative.
    pub fn is_upper(&self, tol: f64) -> Result<bool> {
        if self.is_empty()? {
            return Ok(true);
        }
        Ok(self.rows.iter().all(|r| r.normal.iter().all(|&v| v >= -tol)))
    }

    /// The recession cone `{x : a_i · x ≥ 0}` of a non-empty set.
    pub fn recession_cone(&self) -> Polyhedron {
        Polyhedron {
            dim: self.dim,
            rows: self.rows.iter().map(|r| Halfspace::new(r.normal.clone(), 0.0)).collect(),
            empty: false,
        }
    }

    /// Reflection `−P`.
    pub fn negate(&self) -> Polyhedron {
        Polyhedron {
            dim: self.dim,
            rows: self
                .rows
                .iter()
                .map(|r| Halfspace::new(r.normal.iter().map(|v| -v).collect(), r.offset))
                .collect(),
            empty: self.empty,
        }
    }

    /// Cartesian product `self × other`.
    pub fn product(&self, other: &Polyhedron) -> Polyhedron {
        if self.empty || other.empty {
            return Polyhedron::empty(self.dim + other.dim);
        }
        let n = self.dim + other.dim;
        let rows = self
            .rows
            .iter()
            .map(|r| {
                let mut v = r.normal.clone();
                v.resize(n, 0.0);
                Halfspace::new(v, r.offset)
            })
            .chain(other.rows.iter().map(|r| {
                let mut v = vec![0.0; self.dim];
                v.extend_from_slice(&r.normal);
                Halfspace::new(v, r.offset)
            }))
            .collect();
        Polyhedron { dim: n, rows, empty: false }
    }

    fn check_dim(&self, other: &Polyhedron) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::Dimension(format!("dimensions {} and {} differ", self.dim, other.dim)));
        }
        Ok(())
    }
}

/// Decides `λ_1 A_1 + … + λ_k A_k ⊆ C` through additivity of support
/// functions, without forming the sum. Each `scales[j]` is a positive
/// diagonal applied to `A_j`.
pub fn scaled_sum_subset_of(parts: &[(&[f64], &Polyhedron)], target: &Polyhedron, tol: f64) -> Result<bool> {
    for (_, p) in parts {
        if p.is_empty()? {
            return Ok(true);
        }
    }
    if target.is_flagged_empty() {
        return Ok(false);
    }
    for row in target.rows() {
        let mut total = 0.0;
        for (scale, p) in parts {
            let c: Vec<f64> = row.normal.iter().zip(scale.iter()).map(|(a, l)| a * l).collect();
            match p.minimize(&c)? {
                Support::Attained { value, .. } => total += value,
                Support::Unbounded => return Ok(false),
                Support::Empty => return Ok(true),
            }
        }
        if total < row.offset - tol {
            return Ok(false);
        }
    }
    Ok(true)
}
