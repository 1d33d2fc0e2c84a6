use super::ScenarioSpace;
use crate::error::{Error, Result};

/// An `F_t`-measurable vector field: one `ℝ^dim` value per atom of `F_t`.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    time: usize,
    dim: usize,
    values: Vec<f64>,
}

impl Field {
    pub fn zeros(space: &ScenarioSpace, time: usize, dim: usize) -> Self {
        Self { time, dim, values: vec![0.0; space.num_atoms(time) * dim] }
    }

    pub fn constant(space: &ScenarioSpace, time: usize, value: &[f64]) -> Self {
        let values = (0..space.num_atoms(time)).flat_map(|_| value.iter().copied()).collect();
        Self { time, dim: value.len(), values }
    }

    /// Row-major values: atom `a`, component `i` at `a * dim + i`.
    pub fn from_values(space: &ScenarioSpace, time: usize, dim: usize, values: Vec<f64>) -> Result<Self> {
        space.check_time(time)?;
        if values.len() != space.num_atoms(time) * dim {
            return Err(Error::Dimension(format!(
                "field at time {time} needs {} values, got {}",
                space.num_atoms(time) * dim,
                values.len()
            )));
        }
        Ok(Self { time, dim, values })
    }

    pub fn from_fn(
        space: &ScenarioSpace,
        time: usize,
        dim: usize,
        mut f: impl FnMut(usize, usize) -> f64,
    ) -> Self {
        let n = space.num_atoms(time);
        let mut values = Vec::with_capacity(n * dim);
        for a in 0..n {
            for i in 0..dim {
                values.push(f(a, i));
            }
        }
        Self { time, dim, values }
    }

    pub fn time(&self) -> usize {
        self.time
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_atoms(&self) -> usize {
        self.values.len().checked_div(self.dim).unwrap_or(0)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn at(&self, a: usize) -> &[f64] {
        &self.values[a * self.dim..(a + 1) * self.dim]
    }

    pub fn at_mut(&mut self, a: usize) -> &mut [f64] {
        &mut self.values[a * self.dim..(a + 1) * self.dim]
    }

    pub fn get(&self, a: usize, i: usize) -> f64 {
        self.values[a * self.dim + i]
    }

    pub fn set(&mut self, a: usize, i: usize, v: f64) {
        self.values[a * self.dim + i] = v;
    }

    /// The value on the atom containing state `w`.
    pub fn at_state(&self, space: &ScenarioSpace, w: usize) -> &[f64] {
        self.at(space.atom_of(self.time, w))
    }

    /// Re-expresses the field on the finer partition `F_s`.
    pub fn refine(&self, space: &ScenarioSpace, s: usize) -> Field {
        debug_assert!(s >= self.time);
        Field::from_fn(space, s, self.dim, |b, i| self.get(space.ancestor(s, b, self.time), i))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field { time: self.time, dim: self.dim, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn zip_with(&self, other: &Field, f: impl Fn(f64, f64) -> f64) -> Field {
        assert_eq!((self.time, self.dim), (other.time, other.dim), "field shape mismatch");
        Field {
            time: self.time,
            dim: self.dim,
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    pub fn add(&self, other: &Field) -> Field {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Field) -> Field {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, c: f64) -> Field {
        self.map(|v| c * v)
    }

    /// Pads each atom's vector with zeros up to `dim`.
    pub fn pad(&self, dim: usize) -> Field {
        Field {
            time: self.time,
            dim,
            values: (0..self.num_atoms())
                .flat_map(|a| (0..dim).map(move |i| if i < self.dim { self.get(a, i) } else { 0.0 }))
                .collect(),
        }
    }

    /// Keeps the first `dim` components.
    pub fn truncate(&self, dim: usize) -> Field {
        Field {
            time: self.time,
            dim,
            values: (0..self.num_atoms()).flat_map(|a| self.at(a)[..dim].to_vec()).collect(),
        }
    }

    pub fn max_abs_diff(&self, other: &Field) -> f64 {
        assert_eq!(self.values.len(), other.values.len());
        self.values.iter().zip(&other.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }
}

/// An adapted `ℝ^d`-valued process on `{0, …, T}`.
///
/// Processes in `𝓡_{t₀}` carry `start = t₀` and are zero before `t₀`.
/// Processes on the optional space (elements of `L̄^∞`) are processes with
/// `start = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Process {
    dim: usize,
    start: usize,
    slices: Vec<Field>,
}

impl Process {
    pub fn zeros(space: &ScenarioSpace, dim: usize, start: usize) -> Self {
        Self { dim, start, slices: space.times().map(|t| Field::zeros(space, t, dim)).collect() }
    }

    /// Builds a process from one field per time `0..=T`; slices before `start`
    /// must vanish.
    pub fn from_slices(space: &ScenarioSpace, start: usize, slices: Vec<Field>) -> Result<Self> {
        if slices.len() != space.horizon() + 1 {
            return Err(Error::Dimension(format!(
                "process needs {} slices, got {}",
                space.horizon() + 1,
                slices.len()
            )));
        }
        let dim = slices[0].dim();
        for (t, f) in slices.iter().enumerate() {
            if f.time() != t || f.dim() != dim || f.num_atoms() != space.num_atoms(t) {
                return Err(Error::Dimension(format!("slice {t} has the wrong shape")));
            }
            if t < start && !f.is_zero() {
                return Err(Error::InvalidArgument(format!(
                    "process starting at {start} is non-zero at time {t}"
                )));
            }
        }
        Ok(Self { dim, start, slices })
    }

    pub fn from_fn(
        space: &ScenarioSpace,
        dim: usize,
        start: usize,
        mut f: impl FnMut(usize, usize, usize) -> f64,
    ) -> Self {
        let slices = space
            .times()
            .map(|t| {
                if t < start {
                    Field::zeros(space, t, dim)
                } else {
                    Field::from_fn(space, t, dim, |a, i| f(t, a, i))
                }
            })
            .collect();
        Self { dim, start, slices }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn slice(&self, t: usize) -> &Field {
        &self.slices[t]
    }

    pub fn slice_mut(&mut self, t: usize) -> &mut Field {
        &mut self.slices[t]
    }

    pub fn slices(&self) -> &[Field] {
        &self.slices
    }

    pub fn horizon(&self) -> usize {
        self.slices.len() - 1
    }

    /// Value of component `i` at time `t` along state `w`.
    pub fn value_at_state(&self, space: &ScenarioSpace, t: usize, w: usize, i: usize) -> f64 {
        self.slices[t].get(space.atom_of(t, w), i)
    }

    /// Truncation `π_{t,T}`: zero before `t`.
    pub fn truncate_from(&self, t: usize) -> Process {
        let mut out = self.clone();
        for r in 0..t {
            out.slices[r] = out.slices[r].map(|_| 0.0);
        }
        out.start = self.start.max(t);
        out
    }

    /// Reinterprets the process as starting at `start` (no data change).
    pub fn with_start(mut self, start: usize) -> Process {
        self.start = start;
        self
    }

    /// `X + m 1_{𝕋_t}` for `F_t`-measurable `m` (padded with zeros to `dim`).
    pub fn add_cash(&self, space: &ScenarioSpace, m: &Field) -> Process {
        let t = m.time();
        let m = m.pad(self.dim);
        let mut out = self.clone();
        for s in t..=self.horizon() {
            out.slices[s] = out.slices[s].add(&m.refine(space, s));
        }
        out
    }

    /// The process equal to `z` at time `t` and zero elsewhere (`z 1_t`).
    pub fn indicator(space: &ScenarioSpace, z: &Field) -> Process {
        let mut out = Process::zeros(space, z.dim(), 0);
        out.slices[z.time()] = z.clone();
        out
    }

    /// `z 1_{𝕋_t}`: `z` repeated at every time from `t` on.
    pub fn frozen(space: &ScenarioSpace, z: &Field) -> Process {
        Process::zeros(space, z.dim(), z.time()).add_cash(space, z)
    }

    pub fn add(&self, other: &Process) -> Process {
        assert_eq!(self.dim, other.dim);
        Process {
            dim: self.dim,
            start: self.start.min(other.start),
            slices: self.slices.iter().zip(&other.slices).map(|(a, b)| a.add(b)).collect(),
        }
    }

    pub fn sub(&self, other: &Process) -> Process {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, c: f64) -> Process {
        Process { dim: self.dim, start: self.start, slices: self.slices.iter().map(|f| f.scale(c)).collect() }
    }

    /// Multiplies every `ℝ^d` value on the subtree of each `F_t` atom by
    /// `lambda` of that atom (a scalar `F_t` field).
    pub fn scale_by_field(&self, space: &ScenarioSpace, lambda: &Field) -> Process {
        let t = lambda.time();
        let mut out = self.clone();
        for s in 0..=self.horizon() {
            for b in 0..space.num_atoms(s) {
                let l = if s >= t { lambda.get(space.ancestor(s, b, t), 0) } else { 1.0 };
                for v in out.slices[s].at_mut(b) {
                    *v *= l;
                }
            }
        }
        out
    }

    /// Componentwise `self ≤ other` everywhere.
    pub fn le(&self, other: &Process) -> bool {
        self.slices
            .iter()
            .zip(&other.slices)
            .all(|(a, b)| a.values().iter().zip(b.values()).all(|(x, y)| x <= y))
    }

    pub fn max_abs_diff(&self, other: &Process) -> f64 {
        self.slices.iter().zip(&other.slices).map(|(a, b)| a.max_abs_diff(b)).fold(0.0, f64::max)
    }

    /// `X_s = X_t` (in the refined sense) for all `s ≥ t`, i.e. the process is
    /// measurable for the optional σ-algebra at level `t`.
    pub fn is_optional_measurable(&self, space: &ScenarioSpace, t: usize, tol: f64) -> bool {
        (t + 1..=self.horizon())
            .all(|s| self.slices[s].max_abs_diff(&self.slices[t].refine(space, s)) <= tol)
    }
}

/// An `F̄_t`-measurable vector on the optional space.
///
/// Slices `0..t` hold the values on the realized cells `A × {r}` and slice
/// `t` holds the frozen block `A × 𝕋_t`.
#[derive(Debug, Clone, PartialEq)]
pub struct OptionalField {
    level: usize,
    dim: usize,
    slices: Vec<Field>,
}

impl OptionalField {
    pub fn zeros(space: &ScenarioSpace, level: usize, dim: usize) -> Self {
        Self { level, dim, slices: (0..=level).map(|r| Field::zeros(space, r, dim)).collect() }
    }

    pub fn from_slices(slices: Vec<Field>) -> Result<Self> {
        let level = slices.len().checked_sub(1).ok_or_else(|| Error::Dimension("no slices".into()))?;
        let dim = slices[0].dim();
        for (r, f) in slices.iter().enumerate() {
            if f.time() != r || f.dim() != dim {
                return Err(Error::Dimension(format!("slice {r} has the wrong shape")));
            }
        }
        Ok(Self { level, dim, slices })
    }

    /// Reads an `F̄_t`-measurable process (or truncates an arbitrary one to
    /// its slices `0..=t`).
    pub fn from_process(process: &Process, level: usize) -> Self {
        Self { level, dim: process.dim(), slices: process.slices()[..=level].to_vec() }
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn slice(&self, r: usize) -> &Field {
        &self.slices[r]
    }

    pub fn slice_mut(&mut self, r: usize) -> &mut Field {
        &mut self.slices[r]
    }

    pub fn slices(&self) -> &[Field] {
        &self.slices
    }

    pub fn block(&self) -> &Field {
        &self.slices[self.level]
    }

    /// The full process on `Ω̄` with the block repeated from `t` on.
    pub fn to_process(&self, space: &ScenarioSpace) -> Process {
        let mut slices = self.slices.clone();
        for s in self.level + 1..=space.horizon() {
            slices.push(self.block().refine(space, s));
        }
        Process::from_slices(space, 0, slices).expect("consistent shapes")
    }

    /// Values in cell order (realized cells by time, then the block).
    pub fn flat(&self) -> Vec<f64> {
        self.slices.iter().flat_map(|f| f.values().iter().copied()).collect()
    }

    pub fn from_flat(space: &ScenarioSpace, level: usize, dim: usize, values: &[f64]) -> Result<Self> {
        let mut slices = Vec::with_capacity(level + 1);
        let mut offset = 0;
        for r in 0..=level {
            let n = space.num_atoms(r) * dim;
            let chunk = values
                .get(offset..offset + n)
                .ok_or_else(|| Error::Dimension("too few values for optional field".into()))?;
            slices.push(Field::from_values(space, r, dim, chunk.to_vec())?);
            offset += n;
        }
        if offset != values.len() {
            return Err(Error::Dimension("too many values for optional field".into()));
        }
        Ok(Self { level, dim, slices })
    }

    pub fn max_abs_diff(&self, other: &OptionalField) -> f64 {
        self.slices.iter().zip(&other.slices).map(|(a, b)| a.max_abs_diff(b)).fold(0.0, f64::max)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64 + Copy) -> OptionalField {
        Self { level: self.level, dim: self.dim, slices: self.slices.iter().map(|s| s.map(f)).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.slices.iter().all(Field::is_zero)
    }
}
