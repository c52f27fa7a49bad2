//! Ground truth by exhaustive enumeration of words with exact rationals.
//!
//! Every word is visited; its cylinder mass is built from the stationary
//! block law and the transition table, and its group value is the product
//! `psi(x_{n-1}) ... psi(x_0)` taken letter by letter. Nothing here shares
//! code with the forward kernels.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::Zero;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gm_system::{Cocycle, GibbsMarkovSystem};
use crate::groups::GroupElement;

/// Largest number of words enumerated.
pub const MAX_WORDS: u64 = 100_000_000;
/// Largest word length enumerated.
pub const MAX_LEN: usize = 12;

/// Order in which increments are multiplied.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProductOrder {
    /// `psi(x_{n-1}) ... psi(x_0)`.
    Left,
    /// `psi(x_0) ... psi(x_{n-1})`, for non-commutativity witnesses.
    Right,
}

fn guard(m: usize, len: usize, cap: usize) -> Result<u64> {
    if len > cap {
        return Err(Error::resource("oracle word length", cap as u64, None));
    }
    (m as u64)
        .checked_pow(len as u32)
        .filter(|&c| c <= MAX_WORDS)
        .ok_or_else(|| Error::resource("oracle words", MAX_WORDS, None))
}

fn product(cocycle: &Cocycle, w: &[usize], order: ProductOrder) -> GroupElement {
    let g = cocycle.group();
    w.iter().fold(g.identity(), |acc, &s| match order {
        ProductOrder::Left => g.mul_unchecked(cocycle.value(s), &acc),
        ProductOrder::Right => g.mul_unchecked(&acc, cocycle.value(s)),
    })
}

/// `mu[w c]` from `mu[w]`, one transition at a time once the word is long
/// enough to determine the chain row.
fn extend_one(system: &GibbsMarkovSystem, w: &[usize], mass: &BigRational, c: usize) -> BigRational {
    let k = system.order();
    if w.len() < system.block_len() {
        let mut wc = w.to_vec();
        wc.push(c);
        return system.mass_unchecked(&wc);
    }
    mass * system.transition(system.encode_block(&w[w.len() - k..]), c)
}

/// `mu[w tail]` from `mu[w]`.
fn extend(system: &GibbsMarkovSystem, w: &[usize], mass: &BigRational, tail: &[usize]) -> BigRational {
    let mut x = w.to_vec();
    let mut m = mass.clone();
    for &c in tail {
        m = extend_one(system, &x, &m, c);
        x.push(c);
    }
    m
}

type Table<K> = BTreeMap<K, BigRational>;

fn merge<K: Ord>(mut a: Table<K>, b: Table<K>) -> Table<K> {
    for (k, v) in b {
        *a.entry(k).or_insert_with(BigRational::zero) += v;
    }
    a
}

fn dfs<K: Ord>(
    system: &GibbsMarkovSystem,
    len: usize,
    w: &mut Vec<usize>,
    mass: &BigRational,
    f: &(impl Fn(&[usize], &BigRational) -> (K, BigRational) + Sync),
    out: &mut Table<K>,
) {
    if w.len() == len {
        let (key, v) = f(w, mass);
        *out.entry(key).or_insert_with(BigRational::zero) += v;
        return;
    }
    for c in 0..system.alphabet() {
        let next = extend_one(system, w, mass, c);
        w.push(c);
        dfs(system, len, w, &next, f, out);
        w.pop();
    }
}

/// Folds every `len`-word (with first symbol `first`, when given) and its
/// cylinder mass into a keyed table; subtrees below the first two symbols
/// run in parallel and merge exactly.
fn enumerate<K: Ord + Send>(
    system: &GibbsMarkovSystem,
    len: usize,
    first: Option<usize>,
    f: impl Fn(&[usize], &BigRational) -> (K, BigRational) + Sync,
) -> Table<K> {
    let m = system.alphabet();
    let depth = len.min(if first.is_some() { 2 } else { 1 });
    let prefixes: Vec<Vec<usize>> = (0..m.pow(depth as u32))
        .map(|code| {
            let mut w = vec![0; depth];
            let mut c = code;
            for slot in w.iter_mut().rev() {
                *slot = c % m;
                c /= m;
            }
            w
        })
        .filter(|w| first.is_none_or(|a| w.first() == Some(&a)))
        .collect();
    prefixes
        .into_par_iter()
        .map(|mut w| {
            let mut out = BTreeMap::new();
            let mass = system.mass_unchecked(&w);
            dfs(system, len, &mut w, &mass, &f, &mut out);
            out
        })
        .reduce(BTreeMap::new, merge)
}

#[derive(Clone, Debug, PartialEq)]
pub struct OracleDistribution {
    pub n: usize,
    pub words: u64,
    /// `mu(psi_n = g)`.
    pub law: Vec<(GroupElement, BigRational)>,
    /// Joint law with the last `min(n, k)` symbols.
    pub joint: Vec<((Vec<usize>, GroupElement), BigRational)>,
}

impl OracleDistribution {
    pub fn mass(&self, g: &GroupElement) -> BigRational {
        self.law
            .binary_search_by(|p| p.0.cmp(g))
            .map_or_else(|_| BigRational::zero(), |i| self.law[i].1.clone())
    }
}

/// Law of `psi_n` by summing `mu[w]` over all `n`-words.
pub fn oracle_distribution(
    system: &GibbsMarkovSystem,
    cocycle: &Cocycle,
    n: usize,
    order: ProductOrder,
) -> Result<OracleDistribution> {
    let m = system.alphabet();
    cocycle.check_alphabet(m)?;
    let words = guard(m, n, MAX_LEN)?;
    let k = system.order();
    let joint = enumerate(system, n, None, |w, mass| {
        let lag = w[n.saturating_sub(k)..].to_vec();
        ((lag, product(cocycle, w, order)), mass.clone())
    });
    let mut law: Table<GroupElement> = BTreeMap::new();
    for ((_, g), v) in &joint {
        *law.entry(g.clone()).or_insert_with(BigRational::zero) += v;
    }
    Ok(OracleDistribution {
        n,
        words,
        law: law.into_iter().collect(),
        joint: joint.into_iter().collect(),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct OraclePeriodic {
    pub n: usize,
    pub words: u64,
    /// `Z_a^n`.
    pub total: BigRational,
    /// `Z_{a,g}^n`.
    pub table: Vec<(GroupElement, BigRational)>,
}

/// `Z_a^n` and `Z_{a,g}^n` over the periodic points `w w w ...` with
/// `w_0 = a`, weighted by `mu[x_0 .. x_{n+k-1}] / mu[x_n .. x_{n+k-1}]`.
pub fn oracle_periodic_sums(system: &GibbsMarkovSystem, cocycle: &Cocycle, a: usize, n: usize) -> Result<OraclePeriodic> {
    let m = system.alphabet();
    cocycle.check_alphabet(m)?;
    if n == 0 || a >= m {
        return Err(Error::validation("periodic sums need n >= 1 and a symbol of the alphabet"));
    }
    let words = guard(m, n - 1, MAX_LEN)?;
    let k = system.order();
    let table = enumerate(system, n, Some(a), |w, mass| {
        let x: Vec<usize> = (0..n + k).map(|i| w[i % n]).collect();
        let weight = extend(system, w, mass, &x[n..]) / system.mass_unchecked(&x[n..]);
        (product(cocycle, w, ProductOrder::Left), weight)
    });
    let total = table.values().fold(BigRational::zero(), |s, v| s + v);
    Ok(OraclePeriodic {
        n,
        words,
        total,
        table: table.into_iter().collect(),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct OracleWalkMeasure {
    pub n: usize,
    pub words: u64,
    pub pn_one: BigRational,
    /// Normalised `m_n`.
    pub masses: Vec<(GroupElement, BigRational)>,
}

/// `m_n` at the base point `a a a ...` by summing
/// `mu[v xi_{<k}] / mu[xi_{<k}]` over `n`-words `v` with `v_0 = a`.
pub fn oracle_walk_measure(system: &GibbsMarkovSystem, cocycle: &Cocycle, a: usize, n: usize) -> Result<OracleWalkMeasure> {
    let m = system.alphabet();
    cocycle.check_alphabet(m)?;
    if n == 0 || a >= m {
        return Err(Error::validation("walk measures need n >= 1 and a symbol of the alphabet"));
    }
    let words = guard(m, n - 1, 10)?;
    let xi = vec![a; system.order()];
    let mu_xi = system.mass_unchecked(&xi);
    let table = enumerate(system, n, Some(a), |v, mass| {
        (product(cocycle, v, ProductOrder::Left), extend(system, v, mass, &xi) / &mu_xi)
    });
    let pn_one = table.values().fold(BigRational::zero(), |s, v| s + v);
    let masses = table
        .into_iter()
        .filter(|(_, v)| !v.is_zero())
        .map(|(g, v)| (g, v / &pn_one))
        .collect();
    Ok(OracleWalkMeasure {
        n,
        words,
        pn_one,
        masses,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::ratio;
    use crate::groups::GroupSpec;

    fn el(v: &[i64]) -> GroupElement {
        GroupElement::from_slice(v)
    }

    #[test]
    fn trinomial_two_steps() {
        let s = GibbsMarkovSystem::uniform(3);
        let c = Cocycle::new(GroupSpec::lattice(1), vec![el(&[-1]), el(&[0]), el(&[1])]).unwrap();
        let d = oracle_distribution(&s, &c, 2, ProductOrder::Left).unwrap();
        assert_eq!(d.words, 9);
        assert_eq!(d.mass(&el(&[0])), ratio(1, 3));
        assert_eq!(d.mass(&el(&[1])), ratio(2, 9));
        assert_eq!(d.mass(&el(&[-2])), ratio(1, 9));
        let p = oracle_periodic_sums(&s, &c, 1, 2).unwrap();
        assert_eq!(p.total, ratio(1, 3));
        assert_eq!(p.table.iter().find(|e| e.0 == el(&[0])).unwrap().1, ratio(1, 9));
    }

    fn heisenberg_increments() -> Cocycle {
        Cocycle::new(
            GroupSpec::HeisenbergZ,
            vec![el(&[1, 0, 0]), el(&[0, 1, 0]), el(&[-1, 0, 0]), el(&[0, -1, 0])],
        )
        .unwrap()
    }

    #[test]
    fn bernoulli_laws_ignore_order() {
        // word reversal preserves product masses and swaps the two orders
        let s = GibbsMarkovSystem::bernoulli(vec![ratio(4, 10), ratio(3, 10), ratio(1, 10), ratio(2, 10)]).unwrap();
        let c = heisenberg_increments();
        let l = oracle_distribution(&s, &c, 3, ProductOrder::Left).unwrap();
        let r = oracle_distribution(&s, &c, 3, ProductOrder::Right).unwrap();
        assert_eq!(l.law, r.law);
    }

    #[test]
    fn rotating_chain_orders_differ() {
        let rows = (0..4)
            .map(|b| (0..4).map(|c| if c == (b + 1) % 4 { ratio(1, 2) } else { ratio(1, 6) }).collect())
            .collect();
        let s = GibbsMarkovSystem::new(4, 1, rows, 0.0).unwrap();
        let c = heisenberg_increments();
        let l = oracle_distribution(&s, &c, 3, ProductOrder::Left).unwrap();
        let r = oracle_distribution(&s, &c, 3, ProductOrder::Right).unwrap();
        assert_ne!(l.law, r.law);
    }

    #[test]
    fn walk_measure_point_mass() {
        let s = GibbsMarkovSystem::uniform(3);
        let c = Cocycle::new(GroupSpec::lattice(1), vec![el(&[-1]), el(&[0]), el(&[1])]).unwrap();
        let w = oracle_walk_measure(&s, &c, 2, 1).unwrap();
        assert_eq!(w.masses, vec![(el(&[1]), ratio(1, 1))]);
        assert_eq!(w.pn_one, ratio(1, 3));
    }

    #[test]
    fn guard_trips() {
        let s = GibbsMarkovSystem::uniform(2);
        let c = Cocycle::new(GroupSpec::lattice(1), vec![el(&[-1]), el(&[1])]).unwrap();
        assert!(matches!(
            oracle_distribution(&s, &c, 13, ProductOrder::Left),
            Err(Error::Resource { .. })
        ));
    }
}
