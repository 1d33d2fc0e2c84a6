//! Finite filtered probability spaces and the optional lift.

mod field;
mod measure;
mod optional;

pub use field::{Field, OptionalField, Process};
pub use measure::{cond_expectation, w_map, xi, Measure, VectorMeasure};
pub use optional::{
    bar_cond_expectation, bar_w_map, compose_exact, decompose_exact, is_canonical, lift_space,
    xi_bar, Cell, Decomposition, OptionalMeasure, OptionalSpace,
};

use crate::error::{Error, Result};

/// Tolerance used when validating user supplied probabilities and weights.
pub const NORMALIZATION_TOL: f64 = 1e-9;

/// A finite scenario tree.
///
/// Atoms of `F_t` are indexed `0..num_atoms(t)`; atom indices at the horizon
/// coincide with state indices.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpace {
    state_names: Vec<String>,
    horizon: usize,
    atoms: Vec<Vec<Vec<usize>>>,
    atom_of: Vec<Vec<usize>>,
    prob: Vec<f64>,
    atom_prob: Vec<Vec<f64>>,
    mu: Vec<Vec<f64>>,
}

impl ScenarioSpace {
    /// Builds and validates a tree.
    ///
    /// `partitions[t]` lists the atoms of `F_t` as sets of state indices. The
    /// final partition is reordered so that atom `k` is state `k`. `mu[t][k]`
    /// is the weight on atom `k` of `F_t`; `None` selects `1/(T+1)`.
    pub fn new(
        state_names: Vec<String>,
        partitions: Vec<Vec<Vec<usize>>>,
        prob: Vec<f64>,
        mu: Option<Vec<Vec<f64>>>,
    ) -> Result<Self> {
        let n = state_names.len();
        if n == 0 {
            return Err(Error::InvalidSpace("no states".into()));
        }
        if partitions.len() < 2 {
            return Err(Error::InvalidSpace("horizon must be at least 1".into()));
        }
        let horizon = partitions.len() - 1;
        if prob.len() != n {
            return Err(Error::InvalidSpace(format!(
                "{} probabilities for {n} states",
                prob.len()
            )));
        }
        if let Some((w, p)) = prob.iter().enumerate().find(|(_, p)| !(**p > 0.0)) {
            return Err(Error::InvalidSpace(format!(
                "state {} has non-positive probability {p}",
                state_names[w]
            )));
        }
        let total: f64 = prob.iter().sum();
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::InvalidSpace(format!("probabilities sum to {total}, not 1")));
        }

        let mut atoms = partitions;
        let mut atom_of = vec![vec![usize::MAX; n]; horizon + 1];
        for (t, part) in atoms.iter().enumerate() {
            for (a, atom) in part.iter().enumerate() {
                if atom.is_empty() {
                    return Err(Error::InvalidSpace(format!("empty atom {a} at time {t}")));
                }
                for &w in atom {
                    if w >= n {
                        return Err(Error::InvalidSpace(format!(
                            "atom {a} at time {t} references unknown state {w}"
                        )));
                    }
                    if atom_of[t][w] != usize::MAX {
                        return Err(Error::InvalidSpace(format!(
                            "state {} appears twice in partition {t}",
                            state_names[w]
                        )));
                    }
                    atom_of[t][w] = a;
                }
            }
            if let Some(w) = atom_of[t].iter().position(|&a| a == usize::MAX) {
                return Err(Error::InvalidSpace(format!(
                    "state {} missing from partition {t}",
                    state_names[w]
                )));
            }
        }
        if atoms[0].len() != 1 {
            return Err(Error::InvalidSpace("F_0 must be trivial".into()));
        }
        if atoms[horizon].len() != n {
            return Err(Error::InvalidSpace("the final partition must consist of singletons".into()));
        }
        for t in 1..=horizon {
            for (a, atom) in atoms[t].iter().enumerate() {
                let parent = atom_of[t - 1][atom[0]];
                if let Some(&w) = atom.iter().find(|&&w| atom_of[t - 1][w] != parent) {
                    return Err(Error::InvalidSpace(format!(
                        "partition {t} does not refine partition {}: atom {a} {{{}}} straddles atoms containing {} and {}",
                        t - 1,
                        atom.iter().map(|&w| state_names[w].as_str()).collect::<Vec<_>>().join(", "),
                        state_names[atom[0]],
                        state_names[w]
                    )));
                }
            }
        }
        for atom in atoms.iter_mut().flatten() {
            atom.sort_unstable();
        }
        // Reorder the final partition so atom k is state k, keeping mu aligned.
        let final_order: Vec<usize> = (0..n).map(|w| atom_of[horizon][w]).collect();
        atoms[horizon] = (0..n).map(|w| vec![w]).collect();
        let mut mu = match mu {
            Some(mu) => mu,
            None => atoms
                .iter()
                .map(|part| vec![1.0 / (horizon + 1) as f64; part.len()])
                .collect(),
        };
        if mu.len() != horizon + 1 {
            return Err(Error::InvalidSpace(format!(
                "mu has {} time slices, expected {}",
                mu.len(),
                horizon + 1
            )));
        }
        if mu[horizon].len() == n {
            mu[horizon] = final_order.iter().map(|&a| mu[horizon][a]).collect();
        }
        for (t, part) in atoms.iter().enumerate() {
            if mu[t].len() != part.len() {
                return Err(Error::InvalidSpace(format!(
                    "mu at time {t} has {} entries for {} atoms",
                    mu[t].len(),
                    part.len()
                )));
            }
            if let Some(v) = mu[t].iter().find(|v| !(**v > 0.0)) {
                return Err(Error::InvalidSpace(format!("mu at time {t} has non-positive entry {v}")));
            }
        }
        for t in 0..=horizon {
            atom_of[t] = (0..n)
                .map(|w| atoms[t].iter().position(|atom| atom.contains(&w)).unwrap())
                .collect();
        }
        for w in 0..n {
            let s: f64 = (0..=horizon).map(|t| mu[t][atom_of[t][w]]).sum();
            if (s - 1.0).abs() > NORMALIZATION_TOL {
                return Err(Error::InvalidSpace(format!(
                    "mu sums to {s} along state {}, not 1",
                    state_names[w]
                )));
            }
        }
        let atom_prob = atoms
            .iter()
            .map(|part| part.iter().map(|atom| atom.iter().map(|&w| prob[w]).sum()).collect())
            .collect();
        Ok(Self { state_names, horizon, atoms, atom_of, prob, atom_prob, mu })
    }

    /// Builds the complete `branching`-ary tree of the given horizon with
    /// uniform probabilities and uniform `mu`.
    pub fn uniform_tree(branching: usize, horizon: usize) -> Result<Self> {
        if branching == 0 {
            return Err(Error::InvalidSpace("branching must be positive".into()));
        }
        let n = branching.pow(horizon as u32);
        let names = (0..n).map(|w| format!("w{w}")).collect();
        let partitions = (0..=horizon)
            .map(|t| {
                let size = branching.pow((horizon - t) as u32);
                (0..n / size).map(|k| (k * size..(k + 1) * size).collect()).collect()
            })
            .collect();
        Self::new(names, partitions, vec![1.0 / n as f64; n], None)
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn times(&self) -> std::ops::RangeInclusive<usize> {
        0..=self.horizon
    }

    pub fn num_states(&self) -> usize {
        self.state_names.len()
    }

    pub fn state_names(&self) -> &[String] {
        &self.state_names
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.state_names.iter().position(|s| s == name)
    }

    pub fn num_atoms(&self, t: usize) -> usize {
        self.atoms[t].len()
    }

    pub fn atom_states(&self, t: usize, a: usize) -> &[usize] {
        &self.atoms[t][a]
    }

    /// The `F_t` atom containing state `w`.
    pub fn atom_of(&self, t: usize, w: usize) -> usize {
        self.atom_of[t][w]
    }

    /// The `F_t` atom containing atom `b` of `F_s`, for `t <= s`.
    pub fn ancestor(&self, s: usize, b: usize, t: usize) -> usize {
        debug_assert!(t <= s);
        self.atom_of[t][self.atoms[s][b][0]]
    }

    /// The `F_s` atoms contained in atom `a` of `F_t`, for `t <= s`.
    pub fn descendants(&self, t: usize, a: usize, s: usize) -> Vec<usize> {
        debug_assert!(t <= s);
        (0..self.num_atoms(s)).filter(|&b| self.ancestor(s, b, t) == a).collect()
    }

    pub fn prob(&self, w: usize) -> f64 {
        self.prob[w]
    }

    pub fn probs(&self) -> &[f64] {
        &self.prob
    }

    pub fn atom_prob(&self, t: usize, a: usize) -> f64 {
        self.atom_prob[t][a]
    }

    pub fn mu(&self, t: usize, a: usize) -> f64 {
        self.mu[t][a]
    }

    pub fn mu_table(&self) -> &[Vec<f64>] {
        &self.mu
    }

    /// `μ_t(ω)`.
    pub fn mu_at_state(&self, t: usize, w: usize) -> f64 {
        self.mu[t][self.atom_of[t][w]]
    }

    /// `Σ_{r<t} μ_r` on atom `a` of `F_t`.
    pub fn mu_before(&self, t: usize, a: usize) -> f64 {
        let w = self.atoms[t][a][0];
        (0..t).map(|r| self.mu_at_state(r, w)).sum()
    }

    pub fn check_time(&self, t: usize) -> Result<()> {
        if t > self.horizon {
            Err(Error::TimeOutOfRange { time: t, horizon: self.horizon })
        } else {
            Ok(())
        }
    }

    pub fn check_times(&self, t: usize, s: usize) -> Result<()> {
        self.check_time(t)?;
        self.check_time(s)?;
        if t > s {
            return Err(Error::TimeOrder { t, s });
        }
        Ok(())
    }

    /// Human readable label of an atom, e.g. `{u, dn}`.
    pub fn atom_label(&self, t: usize, a: usize) -> String {
        let names: Vec<&str> =
            self.atoms[t][a].iter().map(|&w| self.state_names[w].as_str()).collect();
        format!("{{{}}}", names.join(", "))
    }
}

/// The eligible portfolio structure `M = ℝ^m × {0}^{d-m}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Eligible {
    pub d: usize,
    pub m: usize,
}

impl Eligible {
    pub fn new(d: usize, m: usize) -> Result<Self> {
        if m == 0 || m > d {
            return Err(Error::InvalidArgument(format!(
                "need 1 <= m <= d, got m = {m}, d = {d}"
            )));
        }
        Ok(Self { d, m })
    }

    pub fn full(d: usize) -> Self {
        Self { d, m: d }
    }

    pub fn is_full(&self) -> bool {
        self.m == self.d
    }
}


#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    #[test]
    fn two_state_structure() {
        let sp = two_state();
        assert_eq!(sp.horizon(), 1);
        assert_eq!(sp.num_atoms(0), 1);
        assert_eq!(sp.num_atoms(1), 2);
        assert_eq!(sp.mu(0, 0), 0.5);
        assert_eq!(sp.descendants(0, 0, 1), vec![0, 1]);
    }

    #[test]
    fn binary_tree_ancestry() {
        let sp = binary_t2();
        assert_eq!(sp.num_atoms(1), 2);
        assert_eq!(sp.descendants(1, 1, 2), vec![2, 3]);
        assert_eq!(sp.ancestor(2, 3, 1), 1);
        assert!((sp.mu_before(2, 0) - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_non_refining_partition() {
        let err = ScenarioSpace::new(
            vec!["a".into(), "b".into(), "c".into(), "d".into()],
            vec![
                vec![vec![0, 1, 2, 3]],
                vec![vec![0, 1], vec![2, 3]],
                vec![vec![0, 2], vec![1], vec![3]],
                vec![vec![0], vec![1], vec![2], vec![3]],
            ],
            vec![0.25; 4],
            None,
        )
        .unwrap_err();
        assert!(err.to_string().contains("does not refine"), "{err}");
    }

    #[test]
    fn rejects_bad_mu_and_prob() {
        let names = vec!["u".to_string(), "dn".to_string()];
        let parts = vec![vec![vec![0, 1]], vec![vec![0], vec![1]]];
        let err = ScenarioSpace::new(
            names.clone(),
            parts.clone(),
            vec![0.5, 0.5],
            Some(vec![vec![0.4], vec![0.5, 0.5]]),
        )
        .unwrap_err();
        assert!(err.to_string().contains("mu sums"), "{err}");
        let err = ScenarioSpace::new(names.clone(), parts.clone(), vec![0.6, 0.5], None).unwrap_err();
        assert!(err.to_string().contains("sum to"), "{err}");
        let err = ScenarioSpace::new(names, parts, vec![1.0, 0.0], None).unwrap_err();
        assert!(err.to_string().contains("non-positive"), "{err}");
    }

    #[test]
    fn rejects_non_trivial_initial_field() {
        let err = ScenarioSpace::new(
            vec!["u".into(), "dn".into()],
            vec![vec![vec![0], vec![1]], vec![vec![0], vec![1]]],
            vec![0.5, 0.5],
            None,
        )
        .unwrap_err();
        assert!(err.to_string().contains("trivial"));
    }

    #[test]
    fn eligible_bounds() {
        assert!(Eligible::new(2, 0).is_err());
        assert!(Eligible::new(2, 3).is_err());
        assert!(Eligible::new(2, 1).is_ok());
    }
}
