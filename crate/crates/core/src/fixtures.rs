//! Small scenario trees shared by the test suites, the CLI and the benches.

use crate::error::Result;
use crate::space::ScenarioSpace;

/// `Ω = {u, dn}`, `T = 1`, `P` and `μ` uniform.
pub fn two_state_t1() -> ScenarioSpace {
    ScenarioSpace::new(
        vec!["u".into(), "dn".into()],
        vec![vec![vec![0, 1]], vec![vec![0], vec![1]]],
        vec![0.5, 0.5],
        None,
    )
    .expect("valid two-state tree")
}

/// The complete binary tree with `T = 2`, uniform `P` and `μ`.
pub fn binary_t2() -> ScenarioSpace {
    ScenarioSpace::uniform_tree(2, 2).expect("valid binary tree")
}

/// A binary tree with `T = 3` and non-uniform `P` and `μ`.
pub fn binary_t3() -> ScenarioSpace {
    let names = (0..8).map(|w| format!("w{w}")).collect();
    let partitions = (0..=3)
        .map(|t| {
            let size = 1usize << (3 - t);
            (0..8 / size).map(|k| (k * size..(k + 1) * size).collect()).collect()
        })
        .collect();
    let prob = vec![0.05, 0.15, 0.1, 0.2, 0.12, 0.08, 0.18, 0.12];
    let mu = vec![
        vec![0.3],
        vec![0.2, 0.3],
        vec![0.1, 0.2, 0.25, 0.15],
        vec![0.4, 0.4, 0.3, 0.3, 0.15, 0.15, 0.25, 0.25],
    ];
    ScenarioSpace::new(names, partitions, prob, Some(mu)).expect("valid non-uniform tree")
}

/// Every shipped tree with its name.
pub fn all() -> Vec<(&'static str, ScenarioSpace)> {
    vec![("two_state_T1", two_state_t1()), ("binary_T2", binary_t2()), ("binary_T3", binary_t3())]
}

pub fn by_name(name: &str) -> Result<ScenarioSpace> {
    all()
        .into_iter()
        .find(|(n, _)| *n == name)
        .map(|(_, s)| s)
        .ok_or_else(|| crate::Error::InvalidArgument(format!("unknown fixture space {name}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_trees_are_valid() {
        let spaces = all();
        assert_eq!(spaces.len(), 3);
        let t3 = binary_t3();
        assert_eq!(t3.num_atoms(2), 4);
        assert!((t3.mu(3, 4) - 0.15).abs() < 1e-15);
        assert!(by_name("binary_T2").is_ok() && by_name("nope").is_err());
    }
}
