//! The shipped example systems.

use crate::arith::ratio;
use crate::error::{Error, Result};
use crate::gm_system::{Cocycle, GibbsMarkovSystem, SymmetryInvolution};
use crate::groups::{GroupElement, GroupSpec, RealBasis};

#[derive(Clone, Debug)]
pub struct Example {
    pub name: &'static str,
    pub summary: &'static str,
    pub system: GibbsMarkovSystem,
    pub cocycle: Cocycle,
    /// Alphabet involution under which the walk is symmetric, if any.
    pub involution: Option<SymmetryInvolution>,
}

/// Names accepted by [`example`], in catalogue order.
pub const NAMES: [&str; 11] = [
    "trinomial",
    "simple_walk",
    "asymmetric_z",
    "markov_two_state",
    "z2",
    "cyclic3",
    "cyclic2_weighted",
    "cyclic2_symmetric",
    "real_four",
    "heisenberg_symmetric",
    "heisenberg_asymmetric",
];

fn el(v: &[i64]) -> GroupElement {
    GroupElement::from_slice(v)
}

fn cocycle(group: GroupSpec, values: &[&[i64]]) -> Cocycle {
    Cocycle::new(group, values.iter().map(|v| el(v)).collect()).expect("catalogue cocycles are valid")
}

fn bernoulli(w: &[(i64, i64)]) -> GibbsMarkovSystem {
    GibbsMarkovSystem::bernoulli(w.iter().map(|&(n, d)| ratio(n, d)).collect()).expect("catalogue weights are valid")
}

fn involution(perm: &[usize]) -> Option<SymmetryInvolution> {
    Some(SymmetryInvolution::new(perm.to_vec()).expect("catalogue involutions are permutations"))
}

const HEIS: [&[i64]; 4] = [&[1, 0, 0], &[-1, 0, 0], &[0, 1, 0], &[0, -1, 0]];

pub fn example(name: &str) -> Result<Example> {
    let ex = match name {
        "trinomial" => Example {
            name: "trinomial",
            summary: "uniform steps -1, 0, +1 on Z",
            system: GibbsMarkovSystem::uniform(3),
            cocycle: cocycle(GroupSpec::lattice(1), &[&[-1], &[0], &[1]]),
            involution: involution(&[2, 1, 0]),
        },
        "simple_walk" => Example {
            name: "simple_walk",
            summary: "uniform steps -1, +1 on Z (period 2)",
            system: GibbsMarkovSystem::uniform(2),
            cocycle: cocycle(GroupSpec::lattice(1), &[&[-1], &[1]]),
            involution: involution(&[1, 0]),
        },
        "asymmetric_z" => Example {
            name: "asymmetric_z",
            summary: "steps +1 with 3/10, -1 with 7/10 on Z",
            system: bernoulli(&[(3, 10), (7, 10)]),
            cocycle: cocycle(GroupSpec::lattice(1), &[&[1], &[-1]]),
            involution: None,
        },
        "markov_two_state" => Example {
            name: "markov_two_state",
            summary: "order-1 chain [[1/2,1/2],[1/4,3/4]], steps -1, +1 on Z",
            system: GibbsMarkovSystem::new(
                2,
                1,
                vec![vec![ratio(1, 2), ratio(1, 2)], vec![ratio(1, 4), ratio(3, 4)]],
                0.0,
            )
            .expect("catalogue chain is stochastic"),
            cocycle: cocycle(GroupSpec::lattice(1), &[&[-1], &[1]]),
            involution: None,
        },
        "z2" => Example {
            name: "z2",
            summary: "uniform steps (1,0), (0,1), (0,0) on Z^2",
            system: GibbsMarkovSystem::uniform(3),
            cocycle: cocycle(GroupSpec::lattice(2), &[&[1, 0], &[0, 1], &[0, 0]]),
            involution: None,
        },
        "cyclic3" => Example {
            name: "cyclic3",
            summary: "uniform steps 0, 1, 2 on Z/3",
            system: GibbsMarkovSystem::uniform(3),
            cocycle: cocycle(GroupSpec::cyclic(3), &[&[0], &[1], &[2]]),
            involution: involution(&[0, 2, 1]),
        },
        "cyclic2_weighted" => Example {
            name: "cyclic2_weighted",
            summary: "steps 0 with 9/10, 1 with 1/10 on Z/2",
            system: bernoulli(&[(9, 10), (1, 10)]),
            cocycle: cocycle(GroupSpec::cyclic(2), &[&[0], &[1]]),
            involution: involution(&[0, 1]),
        },
        "cyclic2_symmetric" => Example {
            name: "cyclic2_symmetric",
            summary: "uniform steps 0, 1 on Z/2",
            system: GibbsMarkovSystem::uniform(2),
            cocycle: cocycle(GroupSpec::cyclic(2), &[&[0], &[1]]),
            involution: involution(&[0, 1]),
        },
        "real_four" => Example {
            name: "real_four",
            summary: "uniform steps +-1, +-sqrt 2 on R",
            system: GibbsMarkovSystem::uniform(4),
            cocycle: cocycle(
                GroupSpec::EmbeddedRealLattice(
                    RealBasis::new(1, vec![vec![1.0], vec![2f64.sqrt()]]).expect("basis is finite"),
                ),
                &[&[1, 0], &[-1, 0], &[0, 1], &[0, -1]],
            ),
            involution: involution(&[1, 0, 3, 2]),
        },
        "heisenberg_symmetric" => Example {
            name: "heisenberg_symmetric",
            summary: "uniform steps a, a^-1, b, b^-1 on the Heisenberg group",
            system: GibbsMarkovSystem::uniform(4),
            cocycle: cocycle(GroupSpec::HeisenbergZ, &HEIS),
            involution: involution(&[1, 0, 3, 2]),
        },
        "heisenberg_asymmetric" => Example {
            name: "heisenberg_asymmetric",
            summary: "steps a, a^-1, b, b^-1 with 4/10, 1/10, 3/10, 2/10",
            system: bernoulli(&[(4, 10), (1, 10), (3, 10), (2, 10)]),
            cocycle: cocycle(GroupSpec::HeisenbergZ, &HEIS),
            involution: None,
        },
        other => {
            return Err(Error::validation(format!(
                "unknown example '{other}'; known: {}",
                NAMES.join(", ")
            )))
        }
    };
    Ok(ex)
}

pub fn all() -> Vec<Example> {
    NAMES.iter().map(|n| example(n).expect("listed names resolve")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gm_system::check_symmetry;

    #[test]
    fn involutions_are_symmetries() {
        for ex in all() {
            if let Some(s) = &ex.involution {
                assert!(check_symmetry(&ex.system, &ex.cocycle, s).unwrap().holds, "{}", ex.name);
            }
        }
        assert!(example("nope").is_err());
    }
}
