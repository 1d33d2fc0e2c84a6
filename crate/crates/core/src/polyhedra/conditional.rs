use super::{Halfspace, Polyhedron};
use crate::error::{Error, Result};
use crate::space::{lift_space, Field, OptionalField, ScenarioSpace};

/// Which σ-algebra indexes the cells of a conditional set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layout {
    /// Atoms of `F_t`.
    Atoms { time: usize },
    /// Cells of `F̄_t` in canonical order.
    Optional { level: usize },
}

impl Layout {
    pub fn num_cells(&self, space: &ScenarioSpace) -> usize {
        match *self {
            Layout::Atoms { time } => space.num_atoms(time),
            Layout::Optional { level } => lift_space(space).num_cells(level),
        }
    }
}

/// An `F_t`-decomposable set: one polyhedron in `ℝ^m` per cell.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalPolyhedron {
    layout: Layout,
    dim: usize,
    cells: Vec<Polyhedron>,
}

impl ConditionalPolyhedron {
    pub fn new(layout: Layout, dim: usize, cells: Vec<Polyhedron>) -> Result<Self> {
        if let Some(c) = cells.iter().find(|c| c.dim() != dim) {
            return Err(Error::Dimension(format!("cell of dimension {} in a {dim}-dimensional set", c.dim())));
        }
        Ok(Self { layout, dim, cells })
    }

    pub fn full(space: &ScenarioSpace, layout: Layout, dim: usize) -> Self {
        Self { layout, dim, cells: vec![Polyhedron::full(dim); layout.num_cells(space)] }
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn cell(&self, i: usize) -> &Polyhedron {
        &self.cells[i]
    }

    pub fn cells(&self) -> &[Polyhedron] {
        &self.cells
    }

    pub fn into_cells(self) -> Vec<Polyhedron> {
        self.cells
    }

    fn zip_cells(
        &self,
        other: &ConditionalPolyhedron,
        f: impl Fn(&Polyhedron, &Polyhedron) -> Result<Polyhedron>,
    ) -> Result<ConditionalPolyhedron> {
        self.check_layout(other)?;
        let cells = self.cells.iter().zip(&other.cells).map(|(a, b)| f(a, b)).collect::<Result<_>>()?;
        Ok(Self { layout: self.layout, dim: self.dim, cells })
    }

    fn check_layout(&self, other: &ConditionalPolyhedron) -> Result<()> {
        if self.layout != other.layout || self.dim != other.dim || self.cells.len() != other.cells.len() {
            return Err(Error::Dimension(format!(
                "conditional sets on {:?}/{} and {:?}/{} are incompatible",
                self.layout, self.dim, other.layout, other.dim
            )));
        }
        Ok(())
    }

    pub fn intersect(&self, other: &ConditionalPolyhedron) -> Result<ConditionalPolyhedron> {
        self.zip_cells(other, |a, b| a.intersect(b))
    }

    pub fn minkowski_sum(&self, other: &ConditionalPolyhedron) -> Result<ConditionalPolyhedron> {
        self.zip_cells(other, |a, b| a.minkowski_sum(b))
    }

    pub fn minkowski_diff(&self, other: &ConditionalPolyhedron) -> Result<ConditionalPolyhedron> {
        self.zip_cells(other, |a, b| a.minkowski_diff(b))
    }

    /// Per-cell inclusion.
    pub fn subset_of(&self, other: &ConditionalPolyhedron, tol: f64) -> Result<bool> {
        self.check_layout(other)?;
        for (a, b) in self.cells.iter().zip(&other.cells) {
            if !a.subset_of(b, tol)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Index of the first cell where inclusion fails.
    pub fn first_non_subset_cell(&self, other: &ConditionalPolyhedron, tol: f64) -> Result<Option<usize>> {
        self.check_layout(other)?;
        for (i, (a, b)) in self.cells.iter().zip(&other.cells).enumerate() {
            if !a.subset_of(b, tol)? {
                return Ok(Some(i));
            }
        }
        Ok(None)
    }

    pub fn equals(&self, other: &ConditionalPolyhedron, tol: f64) -> Result<bool> {
        Ok(self.subset_of(other, tol)? && other.subset_of(self, tol)?)
    }

    /// Membership of a per-cell point family.
    pub fn contains_point(&self, points: &[Vec<f64>], tol: f64) -> bool {
        points.len() == self.cells.len() && self.cells.iter().zip(points).all(|(c, p)| c.contains(p, tol))
    }

    /// `λ A` cellwise with `λ ≥ 0`.
    pub fn scalar_field_multiply(&self, lambda: &[f64]) -> Result<ConditionalPolyhedron> {
        if lambda.len() != self.cells.len() {
            return Err(Error::Dimension("one scalar per cell is required".into()));
        }
        let cells = self.cells.iter().zip(lambda).map(|(c, &l)| c.scale(l)).collect::<Result<_>>()?;
        Ok(Self { layout: self.layout, dim: self.dim, cells })
    }

    /// `A + m` cellwise.
    pub fn translate(&self, shift: &[Vec<f64>]) -> ConditionalPolyhedron {
        let cells = self.cells.iter().zip(shift).map(|(c, v)| c.translate(v)).collect();
        Self { layout: self.layout, dim: self.dim, cells }
    }

    pub fn is_upper(&self, tol: f64) -> Result<bool> {
        for c in &self.cells {
            if !c.is_upper(tol)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn canonicalize(&self) -> Result<ConditionalPolyhedron> {
        let cells = self.cells.iter().map(Polyhedron::canonicalize).collect::<Result<_>>()?;
        Ok(Self { layout: self.layout, dim: self.dim, cells })
    }

    /// Emptiness per cell.
    pub fn empty_cells(&self) -> Result<Vec<bool>> {
        self.cells.iter().map(Polyhedron::is_empty).collect()
    }

    /// The set of measurable selections as one polyhedron in
    /// `ℝ^{m · cells}` (empty as soon as one cell is).
    pub fn to_joint(&self) -> Polyhedron {
        self.cells.iter().fold(Polyhedron::full(0), |acc, c| acc.product(c))
    }

    /// Splits a joint polyhedron whose rows each touch a single cell block.
    pub fn from_joint(layout: Layout, dim: usize, joint: &Polyhedron) -> Result<ConditionalPolyhedron> {
        if dim == 0 || joint.dim() % dim != 0 {
            return Err(Error::Dimension("joint dimension is not a multiple of the cell dimension".into()));
        }
        let n = joint.dim() / dim;
        if joint.is_flagged_empty() {
            return Ok(Self { layout, dim, cells: vec![Polyhedron::empty(dim); n] });
        }
        let mut rows: Vec<Vec<Halfspace>> = vec![Vec::new(); n];
        for r in joint.rows() {
            let blocks: Vec<usize> =
                (0..n).filter(|&k| r.normal[k * dim..(k + 1) * dim].iter().any(|&v| v != 0.0)).collect();
            match blocks.as_slice() {
                [k] => rows[*k].push(Halfspace::new(r.normal[k * dim..(k + 1) * dim].to_vec(), r.offset)),
                _ => {
                    return Err(Error::NotDecomposable(format!(
                        "a constraint couples cells {blocks:?}"
                    )))
                }
            }
        }
        let cells = rows.into_iter().map(|r| Polyhedron::new(dim, r)).collect::<Result<_>>()?;
        Ok(Self { layout, dim, cells })
    }
}

/// A per-cell dual weight `w ∈ ℝ^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct DualDirection {
    layout: Layout,
    d: usize,
    values: Vec<Vec<f64>>,
}

impl DualDirection {
    pub fn new(layout: Layout, d: usize, values: Vec<Vec<f64>>) -> Result<Self> {
        if values.iter().any(|v| v.len() != d) {
            return Err(Error::Dimension("direction entries must have d components".into()));
        }
        Ok(Self { layout, d, values })
    }

    pub fn from_field(field: &Field) -> Self {
        let values = (0..field.num_atoms()).map(|a| field.at(a).to_vec()).collect();
        Self { layout: Layout::Atoms { time: field.time() }, d: field.dim(), values }
    }

    pub fn from_optional(field: &OptionalField) -> Self {
        let values = field.slices().iter().flat_map(|f| (0..f.num_atoms()).map(|a| f.at(a).to_vec())).collect();
        Self { layout: Layout::Optional { level: field.level() }, d: field.dim(), values }
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    /// `M`-projection non-negative on every cell.
    pub fn in_positive_dual(&self, m: usize, tol: f64) -> bool {
        self.values.iter().all(|w| w[..m].iter().all(|&v| v >= -tol))
    }

    /// `M`-projection zero on every cell.
    pub fn in_perp(&self, m: usize, tol: f64) -> bool {
        self.values.iter().all(|w| w[..m].iter().all(|&v| v.abs() <= tol))
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().flatten().all(|&v| v == 0.0)
    }
}

/// `Γ(w) = {u : w^⊤u ≥ 0}` per cell, in `ℝ^d`.
pub fn gamma_set(w: &DualDirection) -> Result<ConditionalPolyhedron> {
    if w.is_zero() {
        return Err(Error::DegenerateDirection("w vanishes on every cell".into()));
    }
    let cells = w
        .values
        .iter()
        .map(|v| Polyhedron::new(w.d, vec![Halfspace::new(v.clone(), 0.0)]))
        .collect::<Result<_>>()?;
    ConditionalPolyhedron::new(w.layout, w.d, cells)
}

/// `Γ(w) ∩ M` expressed in the eligible coordinates `ℝ^m`.
pub fn gamma_eligible(w: &DualDirection, m: usize) -> Result<ConditionalPolyhedron> {
    if w.in_perp(m, 0.0) {
        return Err(Error::DegenerateDirection("w lies in the annihilator of M".into()));
    }
    let cells = w
        .values
        .iter()
        .map(|v| Polyhedron::new(m, vec![Halfspace::new(v[..m].to_vec(), 0.0)]))
        .collect::<Result<_>>()?;
    ConditionalPolyhedron::new(w.layout, m, cells)
}
