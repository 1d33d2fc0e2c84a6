use super::{Field, ScenarioSpace, NORMALIZATION_TOL};
use crate::error::{Error, Result};

/// A probability measure absolutely continuous w.r.t. `P`, stored by its
/// density `dQ/dP` per state.
#[derive(Debug, Clone, PartialEq)]
pub struct Measure {
    density: Vec<f64>,
}

impl Measure {
    pub fn reference(space: &ScenarioSpace) -> Self {
        Self { density: vec![1.0; space.num_states()] }
    }

    pub fn from_density(space: &ScenarioSpace, density: Vec<f64>) -> Result<Self> {
        if density.len() != space.num_states() {
            return Err(Error::Dimension(format!(
                "density has {} entries for {} states",
                density.len(),
                space.num_states()
            )));
        }
        if let Some(v) = density.iter().find(|v| !(**v >= 0.0)) {
            return Err(Error::InvalidMeasure(format!("negative density {v}")));
        }
        let total: f64 = density.iter().zip(space.probs()).map(|(d, p)| d * p).sum();
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::InvalidMeasure(format!("density integrates to {total}, not 1")));
        }
        Ok(Self { density })
    }

    /// Builds a measure from state masses `Q(ω)`.
    pub fn from_masses(space: &ScenarioSpace, masses: &[f64]) -> Result<Self> {
        if masses.len() != space.num_states() {
            return Err(Error::Dimension("mass vector has the wrong length".into()));
        }
        let density = masses.iter().zip(space.probs()).map(|(q, p)| q / p).collect();
        Self::from_density(space, density)
    }

    /// Unit mass at state `w`.
    pub fn dirac(space: &ScenarioSpace, w: usize) -> Self {
        let mut density = vec![0.0; space.num_states()];
        density[w] = 1.0 / space.prob(w);
        Self { density }
    }

    pub fn density(&self) -> &[f64] {
        &self.density
    }

    pub fn mass(&self, space: &ScenarioSpace, w: usize) -> f64 {
        space.prob(w) * self.density[w]
    }

    pub fn masses(&self, space: &ScenarioSpace) -> Vec<f64> {
        (0..space.num_states()).map(|w| self.mass(space, w)).collect()
    }

    /// `Q(A)` for atom `a` of `F_t`.
    pub fn atom_mass(&self, space: &ScenarioSpace, t: usize, a: usize) -> f64 {
        space.atom_states(t, a).iter().map(|&w| self.mass(space, w)).sum()
    }

    /// `E_t[dQ/dP]` on atom `a` of `F_t`.
    pub fn cond_density(&self, space: &ScenarioSpace, t: usize, a: usize) -> f64 {
        self.atom_mass(space, t, a) / space.atom_prob(t, a)
    }

    /// `Q = P` on `F_t`, within `tol`.
    pub fn agrees_with_reference_on(&self, space: &ScenarioSpace, t: usize, tol: f64) -> bool {
        (0..space.num_atoms(t)).all(|a| (self.atom_mass(space, t, a) - space.atom_prob(t, a)).abs() <= tol)
    }

    /// Conditional weights of the `F_s` atoms below atom `a` of `F_t` under
    /// the version `E_t[ξ_{t,s} ·]`: `Q(B)/Q(A)` when `Q(A) > 0`, else
    /// `P(B)/P(A)`.
    pub fn conditional_weights(
        &self,
        space: &ScenarioSpace,
        t: usize,
        a: usize,
        s: usize,
    ) -> Vec<(usize, f64)> {
        let qa = self.atom_mass(space, t, a);
        let null = qa <= NULL_MASS;
        space
            .descendants(t, a, s)
            .into_iter()
            .map(|b| {
                let w = if null {
                    space.atom_prob(s, b) / space.atom_prob(t, a)
                } else {
                    self.atom_mass(space, s, b) / qa
                };
                (b, w)
            })
            .collect()
    }
}

/// Atom masses at or below this value are treated as null sets.
pub(crate) const NULL_MASS: f64 = 1e-14;

/// A `d`-vector of measures, one per asset.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorMeasure {
    components: Vec<Measure>,
}

impl VectorMeasure {
    pub fn new(components: Vec<Measure>) -> Self {
        assert!(!components.is_empty(), "vector measure needs at least one component");
        Self { components }
    }

    pub fn reference(space: &ScenarioSpace, d: usize) -> Self {
        Self { components: vec![Measure::reference(space); d] }
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn component(&self, i: usize) -> &Measure {
        &self.components[i]
    }

    pub fn components(&self) -> &[Measure] {
        &self.components
    }
}

/// `ξ_{t,s}(Q)` as a scalar `F_s` field.
pub fn xi(space: &ScenarioSpace, q: &Measure, t: usize, s: usize) -> Result<Field> {
    space.check_times(t, s)?;
    Ok(Field::from_fn(space, s, 1, |b, _| {
        let a = space.ancestor(s, b, t);
        let qa = q.atom_mass(space, t, a);
        if qa <= NULL_MASS {
            1.0
        } else {
            (q.atom_mass(space, s, b) / space.atom_prob(s, b)) / (qa / space.atom_prob(t, a))
        }
    }))
}

/// `E^Q_t[X]` for an `F_s`-measurable `X`, componentwise with `Q_i`.
///
/// `q` must have either one component (applied to every coordinate) or
/// `x.dim()` components.
pub fn cond_expectation(space: &ScenarioSpace, x: &Field, q: &VectorMeasure, t: usize) -> Result<Field> {
    let s = x.time();
    space.check_times(t, s)?;
    if q.dim() != 1 && q.dim() != x.dim() {
        return Err(Error::Dimension(format!(
            "measure has {} components for a {}-dimensional field",
            q.dim(),
            x.dim()
        )));
    }
    let mut out = Field::zeros(space, t, x.dim());
    for a in 0..space.num_atoms(t) {
        for i in 0..x.dim() {
            let qi = q.component(if q.dim() == 1 { 0 } else { i });
            let v = qi
                .conditional_weights(space, t, a, s)
                .into_iter()
                .map(|(b, w)| w * x.get(b, i))
                .sum();
            out.set(a, i, v);
        }
    }
    Ok(out)
}

/// `w_t^s(Q, w) = diag(w) ξ_{t,s}(Q)`.
pub fn w_map(space: &ScenarioSpace, q: &VectorMeasure, w: &Field, s: usize) -> Result<Field> {
    let t = w.time();
    space.check_times(t, s)?;
    if q.dim() != w.dim() {
        return Err(Error::Dimension("measure and direction dimensions differ".into()));
    }
    if t == s {
        return Ok(w.clone());
    }
    let xis = (0..q.dim()).map(|i| xi(space, q.component(i), t, s)).collect::<Result<Vec<_>>>()?;
    Ok(Field::from_fn(space, s, w.dim(), |b, i| {
        w.get(space.ancestor(s, b, t), i) * xis[i].get(b, 0)
    }))
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::*;
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn xi_identity_when_times_coincide() {
        let sp = binary_t2();
        let q = Measure::from_masses(&sp, &[0.1, 0.2, 0.3, 0.4]).unwrap();
        for t in 0..=2 {
            let x = xi(&sp, &q, t, t).unwrap();
            assert!(x.values().iter().all(|&v| (v - 1.0).abs() < 1e-15));
        }
    }

    #[test]
    fn xi_two_state_equals_density() {
        let sp = two_state();
        let q = Measure::from_density(&sp, vec![1.6, 0.4]).unwrap();
        let x = xi(&sp, &q, 0, 1).unwrap();
        assert_abs_diff_eq!(x.get(0, 0), 1.6, epsilon = 1e-15);
        assert_abs_diff_eq!(x.get(1, 0), 0.4, epsilon = 1e-15);
    }

    #[test]
    fn xi_is_one_below_null_atom() {
        let sp = binary_t2();
        let q = Measure::from_masses(&sp, &[0.5, 0.5, 0.0, 0.0]).unwrap();
        let x = xi(&sp, &q, 1, 2).unwrap();
        assert_eq!(x.get(2, 0), 1.0);
        assert_eq!(x.get(3, 0), 1.0);
        assert_abs_diff_eq!(x.get(0, 0), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn xi_rejects_bad_times() {
        let sp = two_state();
        let q = Measure::reference(&sp);
        assert!(xi(&sp, &q, 1, 0).is_err());
        assert!(xi(&sp, &q, 0, 2).is_err());
    }

    #[test]
    fn conditional_expectation_examples() {
        let sp = two_state();
        let x = Field::from_values(&sp, 1, 1, vec![2.0, -1.0]).unwrap();
        let p = VectorMeasure::reference(&sp, 1);
        assert_abs_diff_eq!(cond_expectation(&sp, &x, &p, 0).unwrap().get(0, 0), 0.5, epsilon = 1e-15);
        let q = VectorMeasure::new(vec![Measure::from_density(&sp, vec![1.6, 0.4]).unwrap()]);
        assert_abs_diff_eq!(cond_expectation(&sp, &x, &q, 0).unwrap().get(0, 0), 1.4, epsilon = 1e-15);
    }

    #[test]
    fn w_map_examples() {
        let sp = two_state();
        let q = VectorMeasure::new(vec![Measure::from_density(&sp, vec![1.6, 0.4]).unwrap()]);
        let w = Field::constant(&sp, 0, &[1.0]);
        let out = w_map(&sp, &q, &w, 1).unwrap();
        assert_abs_diff_eq!(out.get(0, 0), 1.6, epsilon = 1e-15);
        assert_abs_diff_eq!(out.get(1, 0), 0.4, epsilon = 1e-15);
        assert_eq!(w_map(&sp, &q, &w, 0).unwrap(), w);
        let zero = Field::zeros(&sp, 0, 1);
        assert!(w_map(&sp, &q, &zero, 1).unwrap().is_zero());
    }
}
