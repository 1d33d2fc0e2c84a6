use super::measure::NULL_MASS;
use super::{cond_expectation, xi, Field, Measure, OptionalField, Process, ScenarioSpace, VectorMeasure, NORMALIZATION_TOL};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A cell of `F̄_t`: either a realized cell `A × {r}` with `r < t`, or the
/// frozen block `A × 𝕋_t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cell {
    pub time: usize,
    pub atom: usize,
    pub block: bool,
}

/// The optional space `Ω̄ = Ω × 𝕋` with `P̄ = P ⊗ μ`.
#[derive(Debug, Clone, Copy)]
pub struct OptionalSpace<'a> {
    space: &'a ScenarioSpace,
}

pub fn lift_space(space: &ScenarioSpace) -> OptionalSpace<'_> {
    OptionalSpace { space }
}

impl<'a> OptionalSpace<'a> {
    pub fn base(&self) -> &'a ScenarioSpace {
        self.space
    }

    /// Cells of `F̄_t` in canonical order: realized cells by time, then the
    /// block atoms of `F_t`.
    pub fn cells(&self, level: usize) -> Vec<Cell> {
        (0..=level)
            .flat_map(|r| {
                (0..self.space.num_atoms(r)).map(move |atom| Cell { time: r, atom, block: r == level })
            })
            .collect()
    }

    pub fn num_cells(&self, level: usize) -> usize {
        (0..=level).map(|r| self.space.num_atoms(r)).sum()
    }

    /// Index of slice `r`'s first cell at the given level.
    pub fn slice_offset(&self, r: usize) -> usize {
        (0..r).map(|k| self.space.num_atoms(k)).sum()
    }

    /// Index of the `F̄_t` cell containing the point cell `(b, r)` with `b`
    /// an atom of `F_r`.
    pub fn cell_index(&self, level: usize, r: usize, b: usize) -> usize {
        if r < level {
            self.slice_offset(r) + b
        } else {
            self.slice_offset(level) + self.space.ancestor(r, b, level)
        }
    }

    /// `P̄(B × {r}) = P(B) μ_r(B)`.
    pub fn pbar(&self, r: usize, b: usize) -> f64 {
        self.space.atom_prob(r, b) * self.space.mu(r, b)
    }

    /// `P̄` mass of an `F̄_t` cell.
    pub fn cell_pbar(&self, cell: Cell) -> f64 {
        if cell.block {
            self.space.atom_prob(cell.time, cell.atom) * (1.0 - self.space.mu_before(cell.time, cell.atom))
        } else {
            self.pbar(cell.time, cell.atom)
        }
    }

    /// `Ē[X] = E[Σ_t μ_t X_t]`, componentwise.
    pub fn expectation(&self, x: &Process) -> Vec<f64> {
        let mut out = vec![0.0; x.dim()];
        for r in self.space.times() {
            for b in 0..self.space.num_atoms(r) {
                let p = self.pbar(r, b);
                for (o, v) in out.iter_mut().zip(x.slice(r).at(b)) {
                    *o += p * v;
                }
            }
        }
        out
    }
}

/// The factorization `Q̄ = Q ⊗ ψ` in any number type.
///
/// `q_mass` holds `Q(ω)` per state and `psi[t][a]` the value of `ψ_t` on atom
/// `a` of `F_t`.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition<S> {
    pub q_mass: Vec<S>,
    pub psi: Vec<Vec<S>>,
}

/// Splits cell masses `cells[t][a] = Q̄(A_a × {t})` into `(Q, ψ̂)`.
///
/// Where `Q` charges an atom whose remaining `ψ` budget is exhausted, the
/// children split `Q(A)` in proportion to `P`; where `Q(A) = 0`, `ψ` is
/// replaced by the normal form proportional to `μ` from the stopping time
/// `τ(Q)` on.
pub fn decompose_exact<S: Scalar>(
    space: &ScenarioSpace,
    prob: &[S],
    mu: &[Vec<S>],
    cells: &[Vec<S>],
) -> Result<Decomposition<S>> {
    let horizon = space.horizon();
    if cells.len() != horizon + 1 {
        return Err(Error::Dimension(format!("expected {} time slices of cells", horizon + 1)));
    }
    let zero = S::zero();
    let one = S::one();
    let mut total = zero.clone();
    for (t, row) in cells.iter().enumerate() {
        if row.len() != space.num_atoms(t) {
            return Err(Error::Dimension(format!("cell slice {t} has the wrong length")));
        }
        for v in row {
            if *v < zero && !v.negligible() {
                return Err(Error::InvalidMeasure(format!("negative cell weight {:?}", v)));
            }
            total = total + v.clone();
        }
    }
    if (total.to_float() - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::InvalidMeasure(format!("cell weights sum to {}", total.to_float())));
    }
    let clamp = |v: &S| if *v < S::zero() { S::zero() } else { v.clone() };

    let atom_prob: Vec<Vec<S>> = space
        .times()
        .map(|t| {
            (0..space.num_atoms(t))
                .map(|a| space.atom_states(t, a).iter().fold(S::zero(), |acc, &w| acc + prob[w].clone()))
                .collect()
        })
        .collect();

    // Future mass G_t(A) = Q̄(A × 𝕋_t).
    let mut future: Vec<Vec<S>> = cells.iter().map(|row| row.iter().map(clamp).collect()).collect();
    for t in (0..horizon).rev() {
        for b in 0..space.num_atoms(t + 1) {
            let a = space.ancestor(t + 1, b, t);
            future[t][a] = future[t][a].clone() + future[t + 1][b].clone();
        }
    }

    let mut q_atom: Vec<Vec<S>> = space.times().map(|t| vec![S::zero(); space.num_atoms(t)]).collect();
    let mut survival = q_atom.clone();
    let mut psi = q_atom.clone();
    // Null-branch data: (budget at τ, 1 - Σ_{s<τ} μ_s).
    let mut null_data: Vec<Vec<Option<(S, S)>>> =
        space.times().map(|t| vec![None; space.num_atoms(t)]).collect();
    let mut mu_before: Vec<Vec<S>> = q_atom.clone();
    for t in 1..=horizon {
        for b in 0..space.num_atoms(t) {
            let a = space.ancestor(t, b, t - 1);
            mu_before[t][b] = mu_before[t - 1][a].clone() + mu[t - 1][a].clone();
        }
    }

    q_atom[0][0] = future[0][0].clone();
    survival[0][0] = one.clone();
    for t in 0..=horizon {
        for a in 0..space.num_atoms(t) {
            let qa = q_atom[t][a].clone();
            if qa.is_positive_strict() {
                let p = clamp(&cells[t][a]) / qa.clone();
                let mut next = survival[t][a].clone() - p.clone();
                if next.negligible() || next < S::zero() {
                    next = S::zero();
                }
                psi[t][a] = p;
                if t < horizon {
                    for b in space.descendants(t, a, t + 1) {
                        survival[t + 1][b] = next.clone();
                        q_atom[t + 1][b] = if next.is_positive_strict() {
                            future[t + 1][b].clone() / next.clone()
                        } else {
                            qa.clone() * atom_prob[t + 1][b].clone() / atom_prob[t][a].clone()
                        };
                        if q_atom[t + 1][b].negligible() {
                            q_atom[t + 1][b] = S::zero();
                        }
                    }
                }
            } else {
                let (budget, mu_rest) = match &null_data[t][a] {
                    Some(d) => d.clone(),
                    None => (survival[t][a].clone(), one.clone() - mu_before[t][a].clone()),
                };
                psi[t][a] = mu[t][a].clone() / mu_rest.clone() * budget.clone();
                if t < horizon {
                    for b in space.descendants(t, a, t + 1) {
                        q_atom[t + 1][b] = S::zero();
                        survival[t + 1][b] = survival[t][a].clone() - psi[t][a].clone();
                        null_data[t + 1][b] = Some((budget.clone(), mu_rest.clone()));
                    }
                }
            }
        }
    }
    Ok(Decomposition { q_mass: q_atom.pop().expect("horizon slice"), psi })
}

/// Cell masses `Q(A) ψ_t(A)` of `Q ⊗ ψ`.
pub fn compose_exact<S: Scalar>(space: &ScenarioSpace, q_mass: &[S], psi: &[Vec<S>]) -> Vec<Vec<S>> {
    space
        .times()
        .map(|t| {
            (0..space.num_atoms(t))
                .map(|a| {
                    let qa = space.atom_states(t, a).iter().fold(S::zero(), |acc, &w| acc + q_mass[w].clone());
                    qa * psi[t][a].clone()
                })
                .collect()
        })
        .collect()
}

/// Whether `(Q, ψ)` is already in the canonical form returned by
/// [`decompose_exact`].
pub fn is_canonical<S: Scalar>(space: &ScenarioSpace, prob: &[S], mu: &[Vec<S>], d: &Decomposition<S>) -> bool {
    match decompose_exact(space, prob, mu, &compose_exact(space, &d.q_mass, &d.psi)) {
        Ok(back) => {
            back.q_mass.iter().zip(&d.q_mass).all(|(a, b)| a.close_to(b))
                && back.psi.iter().flatten().zip(d.psi.iter().flatten()).all(|(a, b)| a.close_to(b))
        }
        Err(_) => false,
    }
}

fn validate_psi(space: &ScenarioSpace, psi: &Process) -> Result<()> {
    if psi.dim() != 1 {
        return Err(Error::Dimension("ψ must be scalar".into()));
    }
    for t in space.times() {
        if let Some(v) = psi.slice(t).values().iter().find(|v| **v < -NORMALIZATION_TOL) {
            return Err(Error::InvalidMeasure(format!("ψ_{t} has negative value {v}")));
        }
    }
    for w in 0..space.num_states() {
        let total: f64 = space.times().map(|t| psi.value_at_state(space, t, w, 0)).sum();
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::InvalidMeasure(format!(
                "ψ sums to {total} along state {}, not 1",
                space.state_names()[w]
            )));
        }
    }
    Ok(())
}

/// A probability measure on the optional space, stored both as cell masses
/// and as its canonical factorization `Q ⊗ ψ̂`.
#[derive(Debug, Clone, PartialEq)]
pub struct OptionalMeasure {
    cells: Vec<Vec<f64>>,
    q: Measure,
    psi: Process,
}

impl OptionalMeasure {
    /// `cells[t][a]` is the mass of `A_a × {t}`.
    pub fn from_cells(space: &ScenarioSpace, cells: Vec<Vec<f64>>) -> Result<Self> {
        let d = decompose_exact(space, space.probs(), space.mu_table(), &cells)?;
        let q = Measure::from_masses(space, &d.q_mass)?;
        let psi = Process::from_fn(space, 1, 0, |t, a, _| d.psi[t][a]);
        let cells = cells.into_iter().map(|row| row.into_iter().map(|v| v.max(0.0)).collect()).collect();
        Ok(Self { cells, q, psi })
    }

    /// `Q ⊗ ψ`; the stored factorization is normalized.
    pub fn compose(space: &ScenarioSpace, q: &Measure, psi: &Process) -> Result<Self> {
        validate_psi(space, psi)?;
        let psi_table: Vec<Vec<f64>> = psi.slices().iter().map(|f| f.values().to_vec()).collect();
        let cells = compose_exact(space, &q.masses(space), &psi_table);
        Self::from_cells(space, cells)
    }

    /// `P̄ = P ⊗ μ`.
    pub fn reference(space: &ScenarioSpace) -> Self {
        let cells = space
            .times()
            .map(|t| (0..space.num_atoms(t)).map(|a| space.atom_prob(t, a) * space.mu(t, a)).collect())
            .collect();
        Self::from_cells(space, cells).expect("reference measure is valid")
    }

    /// Unit mass on the point cell `B × {r}`.
    pub fn dirac(space: &ScenarioSpace, r: usize, b: usize) -> Self {
        let mut cells: Vec<Vec<f64>> = space.times().map(|t| vec![0.0; space.num_atoms(t)]).collect();
        cells[r][b] = 1.0;
        Self::from_cells(space, cells).expect("dirac measure is valid")
    }

    pub fn cells(&self) -> &[Vec<f64>] {
        &self.cells
    }

    pub fn cell(&self, r: usize, b: usize) -> f64 {
        self.cells[r][b]
    }

    pub fn q(&self) -> &Measure {
        &self.q
    }

    pub fn psi(&self) -> &Process {
        &self.psi
    }

    /// `ψ_r` on atom `b` of `F_r`.
    pub fn psi_at(&self, r: usize, b: usize) -> f64 {
        self.psi.slice(r).get(b, 0)
    }

    /// `Σ_{r<t} ψ_r` on atom `a` of `F_t`.
    pub fn psi_before(&self, space: &ScenarioSpace, t: usize, a: usize) -> f64 {
        (0..t).map(|r| self.psi_at(r, space.ancestor(t, a, r))).sum()
    }

    /// `dQ̄/dP̄` on the point cell `B × {r}`.
    pub fn density(&self, space: &ScenarioSpace, r: usize, b: usize) -> f64 {
        self.cells[r][b] / lift_space(space).pbar(r, b)
    }

    /// `Q̄` mass of an `F̄_t` cell.
    pub fn cell_mass(&self, space: &ScenarioSpace, cell: Cell) -> f64 {
        if !cell.block {
            return self.cells[cell.time][cell.atom];
        }
        (cell.time..=space.horizon())
            .map(|r| space.descendants(cell.time, cell.atom, r).into_iter().map(|b| self.cells[r][b]).sum::<f64>())
            .sum()
    }

    /// `Ē^Q̄[X]` for a scalar process on `Ω̄` (component `i`).
    pub fn expectation(&self, space: &ScenarioSpace, x: &Process, i: usize) -> f64 {
        space
            .times()
            .map(|r| (0..space.num_atoms(r)).map(|b| self.cells[r][b] * x.slice(r).get(b, i)).sum::<f64>())
            .sum()
    }

    /// `E^Q[Σ_t ψ_t X_t]` (component `i`).
    pub fn factorized_expectation(&self, space: &ScenarioSpace, x: &Process, i: usize) -> f64 {
        (0..space.num_states())
            .map(|w| {
                let inner: f64 = space
                    .times()
                    .map(|t| self.psi.value_at_state(space, t, w, 0) * x.value_at_state(space, t, w, i))
                    .sum();
                self.q.mass(space, w) * inner
            })
            .sum()
    }

    /// Membership in `𝓜̄_t(P̄)`: `Q = P` on `F_t` and `ψ_s = μ_s` for `s < t`.
    pub fn is_mt_preserving(&self, space: &ScenarioSpace, t: usize, tol: f64) -> bool {
        self.q.agrees_with_reference_on(space, t, tol)
            && (0..t).all(|s| (0..space.num_atoms(s)).all(|a| (self.psi_at(s, a) - space.mu(s, a)).abs() <= tol))
    }
}

/// Tolerance below which a remaining `ψ` budget counts as exhausted.
const BUDGET_EPS: f64 = 1e-12;

/// `Ē^{Q̄}_t[X]` as an `F̄_t`-measurable vector, componentwise with `Q̄_i`.
///
/// Realized cells keep `X_r`; the block takes the conditional `ψ`-weighted
/// average of the future, falling back to `μ` weights where the `ψ` budget
/// is exhausted.
pub fn bar_cond_expectation(
    space: &ScenarioSpace,
    x: &Process,
    qbar: &[OptionalMeasure],
    t: usize,
) -> Result<OptionalField> {
    space.check_time(t)?;
    if qbar.len() != 1 && qbar.len() != x.dim() {
        return Err(Error::Dimension("optional measure count must be 1 or d".into()));
    }
    let d = x.dim();
    let mut slices: Vec<Field> = (0..t).map(|r| x.slice(r).clone()).collect();
    let mut block = Field::zeros(space, t, d);
    for i in 0..d {
        let qb = &qbar[if qbar.len() == 1 { 0 } else { i }];
        for a in 0..space.num_atoms(t) {
            let budget = 1.0 - qb.psi_before(space, t, a);
            let mu_rest = 1.0 - space.mu_before(t, a);
            // Y(ω) on the subtree, as a terminal field restricted to atom a.
            let y = Field::from_fn(space, space.horizon(), 1, |w, _| {
                if space.atom_of(t, w) != a {
                    return 0.0;
                }
                (t..=space.horizon())
                    .map(|s| {
                        let weight = if budget > BUDGET_EPS {
                            qb.psi.value_at_state(space, s, w, 0) / budget
                        } else {
                            space.mu_at_state(s, w) / mu_rest
                        };
                        weight * x.value_at_state(space, s, w, i)
                    })
                    .sum()
            });
            let e = cond_expectation(space, &y, &VectorMeasure::new(vec![qb.q.clone()]), t)?;
            block.set(a, i, e.get(a, 0));
        }
    }
    slices.push(block);
    OptionalField::from_slices(slices)
}

/// `ξ̄_{t,s}(Q̄)` as a scalar `F̄_s`-measurable field.
pub fn xi_bar(space: &ScenarioSpace, qbar: &OptionalMeasure, t: usize, s: usize) -> Result<OptionalField> {
    space.check_times(t, s)?;
    let xis: Vec<Field> = (t..=s).map(|r| xi(space, &qbar.q, t, r)).collect::<Result<_>>()?;
    let mut slices = Vec::with_capacity(s + 1);
    for r in 0..=s {
        let field = Field::from_fn(space, r, 1, |b, _| {
            if r < t {
                return 1.0;
            }
            let a = space.ancestor(r, b, t);
            let budget = 1.0 - qbar.psi_before(space, t, a);
            if budget <= BUDGET_EPS {
                return 1.0;
            }
            let mu_rest = 1.0 - space.mu_before(t, a);
            let xi_tr = xis[r - t].get(b, 0);
            if r < s {
                (mu_rest / space.mu(r, b)) * (qbar.psi_at(r, b) / budget) * xi_tr
            } else {
                let mu_tail = 1.0 - space.mu_before(s, b);
                let psi_tail = 1.0 - qbar.psi_before(space, s, b);
                (mu_rest / mu_tail) * (psi_tail / budget) * xi_tr
            }
        });
        slices.push(field);
    }
    OptionalField::from_slices(slices)
}

/// `w̄_t^s(Q̄, w̄)`: realized cells keep `w̄_r`; later cells carry
/// `diag(w̄_t) ξ̄_{t,s}(Q̄)`.
pub fn bar_w_map(
    space: &ScenarioSpace,
    qbar: &[OptionalMeasure],
    wbar: &OptionalField,
    s: usize,
) -> Result<OptionalField> {
    let t = wbar.level();
    space.check_times(t, s)?;
    if qbar.len() != wbar.dim() {
        return Err(Error::Dimension("one optional measure per asset is required".into()));
    }
    if t == s {
        return Ok(wbar.clone());
    }
    let xis: Vec<OptionalField> = qbar.iter().map(|q| xi_bar(space, q, t, s)).collect::<Result<_>>()?;
    let d = wbar.dim();
    let slices = (0..=s)
        .map(|r| {
            if r < t {
                wbar.slice(r).clone()
            } else {
                Field::from_fn(space, r, d, |b, i| {
                    wbar.block().get(space.ancestor(r, b, t), i) * xis[i].slice(r).get(b, 0)
                })
            }
        })
        .collect();
    OptionalField::from_slices(slices)
}

impl OptionalMeasure {
    /// `Ē^{Q̄}_t`-density `Ē_t[dQ̄/dP̄]` on each `F̄_t` cell, computed directly
    /// from masses.
    pub fn level_density(&self, space: &ScenarioSpace, t: usize) -> Vec<f64> {
        let os = lift_space(space);
        os.cells(t).into_iter().map(|c| self.cell_mass(space, c) / os.cell_pbar(c)).collect()
    }

    /// Whether the atom of `F_t` is `Q`-null.
    pub fn is_q_null(&self, space: &ScenarioSpace, t: usize, a: usize) -> bool {
        self.q.atom_mass(space, t, a) <= NULL_MASS
    }
}
