//! Polyhedral acceptance sets on finite coordinate systems.
//!
//! Every acceptance set handled by the engine is a polyhedron over the
//! coordinates of some adapted object (a process from time `t` on, a vector
//! on the optional space, or a single time slice). A risk value is obtained
//! by substituting `X + m` and reading off the polyhedron in the cash
//! variables `m`, one block of `m` eligible coordinates per result cell.

use crate::error::{Error, Result};
use crate::polyhedra::{ConditionalPolyhedron, Halfspace, Layout, Polyhedron, Support};
use crate::space::{lift_space, Field, Process, ScenarioSpace};

/// A flat index over `(time, atom, asset)` for a list of times.
#[derive(Debug, Clone, PartialEq)]
pub struct Coords {
    d: usize,
    times: Vec<usize>,
    atoms: Vec<usize>,
    offsets: Vec<usize>,
    len: usize,
}

impl Coords {
    pub fn new(space: &ScenarioSpace, times: Vec<usize>, d: usize) -> Self {
        let atoms: Vec<usize> = times.iter().map(|&s| space.num_atoms(s)).collect();
        let mut offsets = Vec::with_capacity(times.len());
        let mut len = 0;
        for n in &atoms {
            offsets.push(len);
            len += n * d;
        }
        Self { d, times, atoms, offsets, len }
    }

    /// Times `start..=T`.
    pub fn process(space: &ScenarioSpace, start: usize, d: usize) -> Self {
        Self::new(space, (start..=space.horizon()).collect(), d)
    }

    /// The single time `s`.
    pub fn slice(space: &ScenarioSpace, s: usize, d: usize) -> Self {
        Self::new(space, vec![s], d)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn times(&self) -> &[usize] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    fn position(&self, s: usize) -> Option<usize> {
        self.times.iter().position(|&r| r == s)
    }

    pub fn index(&self, s: usize, b: usize, i: usize) -> Option<usize> {
        let k = self.position(s)?;
        (b < self.atoms[k] && i < self.d).then(|| self.offsets[k] + b * self.d + i)
    }

    /// `(time, atom, asset)` of a flat index.
    pub fn locate(&self, idx: usize) -> (usize, usize, usize) {
        let k = self.offsets.iter().rposition(|&o| o <= idx).expect("index in range");
        let local = idx - self.offsets[k];
        (self.times[k], local / self.d, local % self.d)
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        (0..self.len).map(move |k| self.locate(k))
    }

    pub fn flatten(&self, x: &Process) -> Vec<f64> {
        self.entries().map(|(s, b, i)| x.slice(s).get(b, i)).collect()
    }

    pub fn flatten_field(&self, z: &Field) -> Vec<f64> {
        self.entries().map(|(s, b, i)| if s == z.time() { z.get(b, i) } else { 0.0 }).collect()
    }

    /// The process carrying `values` on these coordinates and zero elsewhere.
    pub fn to_process(&self, space: &ScenarioSpace, values: &[f64]) -> Process {
        let contiguous = self.times.windows(2).all(|w| w[1] == w[0] + 1)
            && self.times.last() == Some(&space.horizon());
        let start = if contiguous { self.times[0] } else { 0 };
        Process::from_fn(space, self.d, 0, |s, b, i| self.index(s, b, i).map_or(0.0, |k| values[k]))
            .with_start(start)
    }
}

/// For each result cell and eligible asset, the coordinates a unit of cash
/// shifts; also the cell every coordinate belongs to.
#[derive(Debug, Clone, PartialEq)]
pub struct CashMap {
    cells: usize,
    m: usize,
    targets: Vec<Vec<usize>>,
    cell_of: Vec<usize>,
}

impl CashMap {
    fn build(coords: &Coords, cells: usize, m: usize, cell_of: impl Fn(usize, usize) -> usize) -> Self {
        let mut targets = vec![Vec::new(); cells * m];
        let mut owner = Vec::with_capacity(coords.len());
        for (k, (s, b, i)) in coords.entries().enumerate() {
            let c = cell_of(s, b);
            owner.push(c);
            if i < m {
                targets[c * m + i].push(k);
            }
        }
        Self { cells, m, targets, cell_of: owner }
    }

    /// Cash `m ∈ L^∞_t(M)` added from time `t` on, cells are atoms of `F_t`.
    pub fn process(space: &ScenarioSpace, coords: &Coords, t: usize, m: usize) -> Self {
        Self::build(coords, space.num_atoms(t), m, |s, b| space.ancestor(s, b, t))
    }

    /// Cash `m ∈ L̄^∞_t(M)` on the optional space, cells are those of `F̄_t`.
    pub fn optional(space: &ScenarioSpace, coords: &Coords, level: usize, m: usize) -> Self {
        let os = lift_space(space);
        Self::build(coords, os.num_cells(level), m, |s, b| os.cell_index(level, s, b))
    }

    /// Cash on a single slice, cells are the atoms of that slice.
    pub fn atoms(space: &ScenarioSpace, coords: &Coords, m: usize) -> Self {
        Self::build(coords, space.num_atoms(coords.times()[0]), m, |_, b| b)
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn cell_of(&self, coord: usize) -> usize {
        self.cell_of[coord]
    }

    pub fn targets(&self, cell: usize, i: usize) -> &[usize] {
        &self.targets[cell * self.m + i]
    }
}

/// A polyhedral acceptance set together with its cash structure.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSet {
    coords: Coords,
    set: Polyhedron,
    cash: CashMap,
    layout: Layout,
}

impl LinearSet {
    pub fn new(coords: Coords, set: Polyhedron, cash: CashMap, layout: Layout) -> Result<Self> {
        if set.dim() != coords.len() {
            return Err(Error::Dimension(format!(
                "acceptance set of dimension {} over {} coordinates",
                set.dim(),
                coords.len()
            )));
        }
        Ok(Self { coords, set, cash, layout })
    }

    pub fn coords(&self) -> &Coords {
        &self.coords
    }

    pub fn set(&self) -> &Polyhedron {
        &self.set
    }

    pub fn cash(&self) -> &CashMap {
        &self.cash
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn num_cells(&self) -> usize {
        self.cash.cells
    }

    pub fn m(&self) -> usize {
        self.cash.m
    }

    /// Dimension of the joint cash space.
    pub fn joint_dim(&self) -> usize {
        self.cash.cells * self.cash.m
    }

    /// A row touching coordinates of more than one cell, if any.
    pub fn coupling_row(&self) -> Option<(usize, Vec<usize>)> {
        self.set.rows().iter().enumerate().find_map(|(k, r)| {
            let mut cells: Vec<usize> =
                r.normal.iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(j, _)| self.cash.cell_of[j]).collect();
            cells.sort_unstable();
            cells.dedup();
            (cells.len() > 1).then_some((k, cells))
        })
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        self.set.contains(x, tol)
    }

    /// `{m : X + m ∈ A}` in the joint cash space.
    pub fn eval_joint(&self, x: &[f64]) -> Result<Polyhedron> {
        if self.set.is_flagged_empty() {
            return Ok(Polyhedron::empty(self.joint_dim()));
        }
        let rows = self
            .set
            .rows()
            .iter()
            .map(|r| {
                let normal = self.cash.targets.iter().map(|ks| ks.iter().map(|&k| r.normal[k]).sum()).collect();
                let gx: f64 = r.normal.iter().zip(x).map(|(a, b)| a * b).sum();
                Halfspace::new(normal, r.offset - gx)
            })
            .collect();
        Polyhedron::new(self.joint_dim(), rows)
    }

    /// The value as a cellwise set; fails when the substituted rows couple
    /// cells.
    pub fn eval(&self, x: &[f64]) -> Result<ConditionalPolyhedron> {
        ConditionalPolyhedron::from_joint(self.layout, self.m(), &self.eval_joint(x)?)
    }

    /// `X + m` for a joint cash vector.
    pub fn shift(&self, x: &[f64], cash: &[f64]) -> Vec<f64> {
        let mut out = x.to_vec();
        for (ks, v) in self.cash.targets.iter().zip(cash) {
            for &k in ks {
                out[k] += v;
            }
        }
        out
    }

    /// `λ X` for a cell-measurable scalar `λ`.
    pub fn scale_cells(&self, x: &[f64], lambda: &[f64]) -> Vec<f64> {
        x.iter().enumerate().map(|(k, v)| v * lambda[self.cash.cell_of[k]]).collect()
    }

    /// Expands a per-cell scalar to the joint cash space.
    pub fn joint_scalars(&self, lambda: &[f64]) -> Vec<f64> {
        lambda.iter().flat_map(|&l| std::iter::repeat_n(l, self.m())).collect()
    }

    /// `inf_{Z ∈ A} c · Z`.
    pub fn inf_linear(&self, c: &[f64]) -> Result<Support> {
        self.set.minimize(c)
    }

    /// Whether `A` is a non-empty polyhedral cone.
    pub fn is_cone(&self) -> Result<bool> {
        if self.set.is_empty()? {
            return Ok(false);
        }
        if self.set.rows().iter().any(|r| r.offset > 1e-12) {
            return Ok(false);
        }
        for r in self.set.rows() {
            match self.set.minimize(&r.normal)? {
                Support::Attained { value, .. } if value >= -1e-9 => {}
                _ => return Ok(false),
            }
        }
        Ok(true)
    }
}

/// Splits a joint set into cells, or returns `None` if rows couple cells.
pub fn split_joint(layout: Layout, m: usize, joint: &Polyhedron) -> Option<ConditionalPolyhedron> {
    ConditionalPolyhedron::from_joint(layout, m, joint).ok()
}

/// Minkowski sum of two joint sets, cellwise when both split.
pub fn joint_sum(layout: Layout, m: usize, a: &Polyhedron, b: &Polyhedron) -> Result<Polyhedron> {
    match (split_joint(layout, m, a), split_joint(layout, m, b)) {
        (Some(x), Some(y)) => Ok(x.minkowski_sum(&y)?.to_joint()),
        _ => a.minkowski_sum(b),
    }
}

/// A family of linear functionals on the coordinates with one normal in
/// `ℝ^m` per result cell; the common shape of every dual term in the engine.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearDual {
    pub functionals: Vec<Vec<f64>>,
    pub normals: Vec<Vec<f64>>,
}

impl LinearDual {
    /// `inf_{Z ∈ A} ℓ_c(Z)` per cell (`+∞` when `A` is empty).
    pub fn infima(&self, set: &LinearSet) -> Result<Vec<f64>> {
        self.functionals.iter().map(|l| Ok(set.inf_linear(l)?.value())).collect()
    }

    /// The penalty `{u : n_c · u ≥ sup_{Z ∈ A} ℓ_c(−Z)}` per cell.
    pub fn penalty(&self, set: &LinearSet) -> Result<Vec<Polyhedron>> {
        let inf = self.infima(set)?;
        self.normals
            .iter()
            .zip(inf)
            .map(|(n, v)| Polyhedron::new(n.len(), vec![Halfspace::new(n.clone(), -v)]))
            .collect()
    }

    /// `{u : n_c · u ≥ ℓ_c(−X)} −̇ penalty_c` per cell.
    pub fn term(&self, set: &LinearSet, x: &[f64]) -> Result<Vec<Polyhedron>> {
        let penalty = self.penalty(set)?;
        self.functionals
            .iter()
            .zip(&self.normals)
            .zip(penalty)
            .map(|((l, n), pen)| {
                let lx: f64 = l.iter().zip(x).map(|(a, b)| a * b).sum();
                let half = Polyhedron::new(n.len(), vec![Halfspace::new(n.clone(), -lx)])?;
                half.minkowski_diff(&pen)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::ScenarioSpace;

    fn two_state() -> ScenarioSpace {
        ScenarioSpace::new(
            vec!["u".into(), "dn".into()],
            vec![vec![vec![0, 1]], vec![vec![0], vec![1]]],
            vec![0.5, 0.5],
            None,
        )
        .unwrap()
    }

    #[test]
    fn coords_round_trip() {
        let sp = two_state();
        let c = Coords::process(&sp, 0, 2);
        assert_eq!(c.len(), 6);
        assert_eq!(c.index(1, 1, 0), Some(4));
        assert_eq!(c.locate(5), (1, 1, 1));
        let x = c.to_process(&sp, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        assert_eq!(c.flatten(&x), vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let s = Coords::slice(&sp, 1, 1);
        assert_eq!(s.index(0, 0, 0), None);
        assert_eq!(s.flatten(&x), vec![3.0, 5.0]);
    }

    #[test]
    fn worst_case_substitution() {
        let sp = two_state();
        let coords = Coords::process(&sp, 1, 1);
        let cash = CashMap::process(&sp, &coords, 1, 1);
        let set = LinearSet::new(coords, Polyhedron::orthant(&[0.0, 0.0]), cash, Layout::Atoms { time: 1 }).unwrap();
        let v = set.eval(&[2.0, -1.0]).unwrap();
        assert!(v.cell(0).equals(&Polyhedron::orthant(&[-2.0]), 1e-9).unwrap());
        assert!(v.cell(1).equals(&Polyhedron::orthant(&[1.0]), 1e-9).unwrap());
        assert!(set.is_cone().unwrap());
        assert!(set.coupling_row().is_none());
    }

    #[test]
    fn optional_cash_hits_the_whole_block() {
        let sp = two_state();
        let coords = Coords::process(&sp, 0, 1);
        let cash = CashMap::optional(&sp, &coords, 0, 1);
        assert_eq!(cash.cells(), 1);
        assert_eq!(cash.targets(0, 0), &[0, 1, 2]);
    }
}
