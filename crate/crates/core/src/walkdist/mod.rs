//! Exact forward computation of the law of `psi_n` jointly with the chain
//! state, and the statistics built on it.
//!
//! The chain state after `n` steps is the word of the last `min(n, k)`
//! symbols. Each step emits a symbol `a` and left-multiplies the group
//! coordinate by `psi(a)`, so after `n` steps the coordinate is
//! `psi(x_{n-1}) ... psi(x_0)`.

mod conditions;
mod finite;
mod ratios;
mod store;
mod windows;

pub use conditions::{
    check_condition_c, check_condition_cm, check_condition_d, ConditionReport, CylinderRow,
    DEFAULT_MAX_CYLINDERS,
};
pub use finite::{finite_group_mixing, return_time_tail, MixingReport, TailReport};
pub use ratios::{cross_ratio, ratio_sequence, CrossRatio, RatioSeries};
pub use store::{Kernel, MassTable, Move, DEFAULT_MAX_CELLS};
pub use windows::{stone_ratio, window_mass, StoneRatio, Window, WindowMass, BOUNDARY_TOL};

use crate::arith::Arith;
use crate::error::Result;
use crate::gm_system::{Cocycle, GibbsMarkovSystem, StateGraph};

/// Execution knobs shared by walk computations.
#[derive(Clone, Debug, PartialEq)]
pub struct WalkOptions {
    pub max_cells: usize,
    /// Optional pruning threshold; pruned mass is tracked and reported.
    pub prune: Option<f64>,
}

impl Default for WalkOptions {
    fn default() -> Self {
        WalkOptions {
            max_cells: DEFAULT_MAX_CELLS,
            prune: None,
        }
    }
}

/// A system together with a cocycle and the compiled walk kernel.
#[derive(Clone, Debug)]
pub struct Walk<'a, W> {
    pub system: &'a GibbsMarkovSystem,
    pub cocycle: &'a Cocycle,
    pub graph: StateGraph,
    pub kernel: Kernel<W>,
    pub options: WalkOptions,
}

impl<'a, W: Arith> Walk<'a, W> {
    pub fn new(system: &'a GibbsMarkovSystem, cocycle: &'a Cocycle) -> Result<Self> {
        Self::with_options(system, cocycle, WalkOptions::default())
    }

    pub fn with_options(
        system: &'a GibbsMarkovSystem,
        cocycle: &'a Cocycle,
        options: WalkOptions,
    ) -> Result<Self> {
        cocycle.check_alphabet(system.alphabet())?;
        let graph = system.state_graph();
        let entries = graph
            .edges
            .iter()
            .map(|(from, to, sym, w)| (*from, *to, w.clone(), cocycle.value(*sym).clone()))
            .collect();
        let kernel = Kernel::new(graph.words.len(), entries);
        Ok(Walk {
            system,
            cocycle,
            graph,
            kernel,
            options,
        })
    }

    pub fn nstates(&self) -> usize {
        self.graph.words.len()
    }

    /// Step-0 table: unit mass at the empty word and the identity.
    pub fn seed(&self) -> MassTable<W> {
        MassTable::seed(self.cocycle.group(), self.nstates(), 0)
            .with_max_cells(self.options.max_cells)
    }

    /// Table conditioned on having already seen `word`: unit mass at the
    /// chain state of `word` and the identity.
    pub fn seed_after(&self, word: &[usize]) -> MassTable<W> {
        let state = self.state_after(word);
        MassTable::seed(self.cocycle.group(), self.nstates(), state)
            .with_max_cells(self.options.max_cells)
    }

    /// Chain state reached after reading `word` from the empty word.
    pub fn state_after(&self, word: &[usize]) -> usize {
        let k = self.system.order();
        let tail = &word[word.len().saturating_sub(k)..];
        self.graph.index[tail]
    }

    pub fn advance(&self, table: &MassTable<W>) -> Result<MassTable<W>> {
        let mut next = table.step(&self.kernel)?;
        if let Some(eps) = self.options.prune {
            next.prune(eps);
        }
        Ok(next)
    }

    /// The law of `psi_n` jointly with the chain state.
    pub fn distribution(&self, n: usize) -> Result<MassTable<W>> {
        let mut t = self.seed();
        for _ in 0..n {
            t = self.advance(&t)?;
        }
        Ok(t)
    }

    /// Runs `n` steps from `start`, calling `visit` on every intermediate
    /// table (including the start).
    pub fn run(
        &self,
        start: MassTable<W>,
        n: usize,
        mut visit: impl FnMut(&MassTable<W>),
    ) -> Result<MassTable<W>> {
        let mut t = start;
        visit(&t);
        for _ in 0..n {
            t = self.advance(&t)?;
            visit(&t);
        }
        Ok(t)
    }
}

/// `distribution(system, cocycle, n)` in one call.
pub fn distribution<W: Arith>(
    system: &GibbsMarkovSystem,
    cocycle: &Cocycle,
    n: usize,
) -> Result<MassTable<W>> {
    Walk::<W>::new(system, cocycle)?.distribution(n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{ratio, Exact};
    use crate::groups::{GroupElement, GroupSpec};
    use num_rational::BigRational;
    use num_traits::One;

    fn el(v: &[i64]) -> GroupElement {
        GroupElement::from_slice(v)
    }

    fn trinomial() -> (GibbsMarkovSystem, Cocycle) {
        (
            GibbsMarkovSystem::uniform(3),
            Cocycle::new(GroupSpec::lattice(1), vec![el(&[-1]), el(&[0]), el(&[1])]).unwrap(),
        )
    }

    #[test]
    fn trinomial_small_laws() {
        let (s, c) = trinomial();
        let t2 = distribution::<Exact>(&s, &c, 2).unwrap();
        assert_eq!(t2.group_mass(&el(&[0])), ratio(1, 3));
        assert_eq!(t2.group_mass(&el(&[2])), ratio(1, 9));
        assert_eq!(t2.group_mass(&el(&[-2])), ratio(1, 9));
        let t4 = distribution::<Exact>(&s, &c, 4).unwrap();
        assert_eq!(t4.group_mass(&el(&[0])), ratio(19, 81));
        let t0 = distribution::<Exact>(&s, &c, 0).unwrap();
        assert_eq!(t0.group_mass(&el(&[0])), ratio(1, 1));
    }

    #[test]
    fn heisenberg_two_step_return() {
        let s = GibbsMarkovSystem::uniform(4);
        let c = Cocycle::new(
            GroupSpec::HeisenbergZ,
            vec![
                el(&[1, 0, 0]),
                el(&[-1, 0, 0]),
                el(&[0, 1, 0]),
                el(&[0, -1, 0]),
            ],
        )
        .unwrap();
        let t = distribution::<Exact>(&s, &c, 2).unwrap();
        assert_eq!(t.group_mass(&el(&[0, 0, 0])), ratio(1, 4));
    }

    #[test]
    fn parity_and_finite() {
        let s = GibbsMarkovSystem::bernoulli(vec![ratio(3, 10), ratio(7, 10)]).unwrap();
        let c = Cocycle::new(GroupSpec::lattice(1), vec![el(&[1]), el(&[-1])]).unwrap();
        for n in [1, 3, 5] {
            assert_eq!(
                distribution::<Exact>(&s, &c, n)
                    .unwrap()
                    .group_mass(&el(&[0])),
                ratio(0, 1)
            );
        }
        let c3 = Cocycle::new(GroupSpec::cyclic(3), vec![el(&[0]), el(&[1]), el(&[2])]).unwrap();
        let t = distribution::<Exact>(&GibbsMarkovSystem::uniform(3), &c3, 1).unwrap();
        for g in 0..3 {
            assert_eq!(t.group_mass(&el(&[g])), ratio(1, 3));
        }
    }

    #[test]
    fn markov_state_marginal_is_stationary() {
        let s = GibbsMarkovSystem::new(
            2,
            1,
            vec![
                vec![ratio(1, 2), ratio(1, 2)],
                vec![ratio(1, 4), ratio(3, 4)],
            ],
            0.0,
        )
        .unwrap();
        let c = Cocycle::new(GroupSpec::lattice(1), vec![el(&[1]), el(&[-1])]).unwrap();
        let w = Walk::<Exact>::new(&s, &c).unwrap();
        let mut t = w.seed();
        for n in 1..=8 {
            t = w.advance(&t).unwrap();
            let marg = t.state_marginal();
            assert_eq!(marg[0], BigRational::from_integer(0.into()));
            assert_eq!(&marg[1..], s.stationary_measure(), "n = {n}");
            assert!(t.total().is_one());
        }
    }
}
