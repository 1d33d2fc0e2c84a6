//! Seeded random generators for processes, measures and dual variables.

use crate::riskproc::ProcessDualVariable;
use crate::riskvec::VectorDualVariable;
use crate::space::{Eligible, Field, Measure, OptionalField, OptionalMeasure, Process, ScenarioSpace, VectorMeasure};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;

pub type SampleRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SampleRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform entries in `[-scale, scale]` from time `start` on.
pub fn random_process(space: &ScenarioSpace, d: usize, start: usize, scale: f64, rng: &mut SampleRng) -> Process {
    Process::from_fn(space, d, start, |_, _, _| rng.random_range(-scale..=scale))
}

/// Integer-valued entries in `[-k, k]`, which makes ties frequent.
pub fn random_integer_process(space: &ScenarioSpace, d: usize, start: usize, k: i32, rng: &mut SampleRng) -> Process {
    Process::from_fn(space, d, start, |_, _, _| rng.random_range(-k..=k) as f64)
}

pub fn random_field(space: &ScenarioSpace, t: usize, d: usize, scale: f64, rng: &mut SampleRng) -> Field {
    Field::from_fn(space, t, d, |_, _| rng.random_range(-scale..=scale))
}

/// A measure equal to `P` on `F_t`, with random conditional weights; about
/// one state in five gets zero mass when its atom has more than one state.
pub fn random_measure_mt(space: &ScenarioSpace, t: usize, rng: &mut SampleRng) -> Measure {
    let mut masses = vec![0.0; space.num_states()];
    for a in 0..space.num_atoms(t) {
        let states = space.atom_states(t, a);
        let mut weights: Vec<f64> = states
            .iter()
            .map(|_| if states.len() > 1 && rng.random_bool(0.2) { 0.0 } else { rng.random_range(0.1..1.0) })
            .collect();
        if weights.iter().all(|&w| w == 0.0) {
            weights[0] = 1.0;
        }
        let total: f64 = weights.iter().sum();
        for (&w, v) in states.iter().zip(weights) {
            masses[w] = space.atom_prob(t, a) * v / total;
        }
    }
    Measure::from_masses(space, &masses).expect("atomwise normalized masses")
}

/// A random member of `𝒲_t` with non-negative weights, some of them zero.
pub fn random_process_dual(space: &ScenarioSpace, t: usize, eligible: Eligible, rng: &mut SampleRng) -> ProcessDualVariable {
    let n = space.horizon() - t + 1;
    let d = eligible.d;
    let q = (0..n).map(|_| VectorMeasure::new((0..d).map(|_| random_measure_mt(space, t, rng)).collect())).collect();
    let mut w: Vec<Field> = (0..n)
        .map(|_| Field::from_fn(space, t, d, |_, _| if rng.random_bool(0.25) { 0.0 } else { rng.random_range(0.0..2.0) }))
        .collect();
    let eligible_total: f64 = w.iter().flat_map(|f| (0..f.num_atoms()).flat_map(move |a| f.at(a)[..eligible.m].to_vec())).sum();
    if eligible_total == 0.0 {
        w[0].set(0, 0, 1.0);
    }
    ProcessDualVariable { t, q, w }
}

/// An optional measure with random cell masses, some of them zero.
pub fn random_optional_measure(space: &ScenarioSpace, rng: &mut SampleRng) -> OptionalMeasure {
    let mut cells: Vec<Vec<f64>> = space
        .times()
        .map(|r| {
            (0..space.num_atoms(r)).map(|_| if rng.random_bool(0.2) { 0.0 } else { rng.random_range(0.05..1.0) }).collect()
        })
        .collect();
    let total: f64 = cells.iter().flatten().sum();
    if total == 0.0 {
        cells[0][0] = 1.0;
    } else {
        cells.iter_mut().flatten().for_each(|v| *v /= total);
    }
    OptionalMeasure::from_cells(space, cells).expect("normalized cell masses")
}

/// A random member of `𝓜̄_t(P̄)`: `Q` agrees with `P` on `F_t`, `ψ_r = μ_r`
/// before `t`, and the remaining budget is split at random from `t` on.
pub fn random_optional_measure_mt(space: &ScenarioSpace, t: usize, rng: &mut SampleRng) -> OptionalMeasure {
    let q = random_measure_mt(space, t, rng);
    let big_t = space.horizon();
    let mut slices: Vec<Field> = Vec::with_capacity(big_t + 1);
    for r in 0..=big_t {
        let field = Field::from_fn(space, r, 1, |b, _| {
            let w = space.atom_states(r, b)[0];
            let used: f64 = slices.iter().map(|f| f.at_state(space, w)[0]).sum();
            let rest = (1.0 - used).max(0.0);
            if r < t {
                space.mu(r, b)
            } else if r == big_t {
                rest
            } else {
                rest * rng.random_range(0.0..1.0)
            }
        });
        slices.push(field);
    }
    let psi = Process::from_slices(space, 0, slices).expect("consistent shapes");
    OptionalMeasure::compose(space, &q, &psi).expect("valid factorization")
}

/// A random member of `𝒲̄_t` with non-negative weights, some zero.
pub fn random_vector_dual(space: &ScenarioSpace, t: usize, eligible: Eligible, rng: &mut SampleRng) -> VectorDualVariable {
    let d = eligible.d;
    let q = (0..d).map(|_| random_optional_measure_mt(space, t, rng)).collect();
    let slices = (0..=t)
        .map(|r| Field::from_fn(space, r, d, |_, _| if rng.random_bool(0.25) { 0.0 } else { rng.random_range(0.0..2.0) }))
        .collect();
    let mut w = OptionalField::from_slices(slices).expect("consistent slices");
    if w.slices().iter().all(|f| (0..f.num_atoms()).all(|a| f.at(a)[..eligible.m].iter().all(|&v| v == 0.0))) {
        w.slice_mut(t).set(0, 0, 1.0);
    }
    VectorDualVariable { t, q, w }
}
