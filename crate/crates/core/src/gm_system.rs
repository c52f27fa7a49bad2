//! Finite-alphabet Gibbs-Markov systems with full branches.
//!
//! A system of memory order `k` is a stationary Markov measure on sequences
//! whose next symbol depends on the previous `k` symbols; `k = 0` is a
//! Bernoulli measure. All transition weights are strictly positive, so every
//! branch is full. The potential `phi = log(d mu / d mu o T)` is locally
//! constant and
//!
//! ```text
//! exp(phi_n(y)) = mu[y_0 .. y_{n+k-1}] / mu[y_n .. y_{n+k-1}].
//! ```
//!
//! Weights are exact rationals; float copies are cached for fast paths.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rustc_hash::FxHashMap;

use crate::arith::rational_to_f64;
use crate::error::{Error, Result};
use crate::groups::{GroupElement, GroupSpec};
use crate::lattice;

/// Largest number of `k`-blocks accepted (exact stationary solve is cubic).
pub const MAX_BLOCKS: usize = 1024;

/// Largest number of words enumerated for the Gibbs constant and sandwich.
pub const MAX_GIBBS_WORDS: usize = 1 << 20;

#[derive(Clone, Debug, PartialEq)]
pub struct GibbsMarkovSystem {
    m: usize,
    k: usize,
    /// `trans[b][a]` = probability that symbol `a` follows the `k`-block with
    /// code `b` (a single row when `k = 0`).
    trans: Vec<Vec<BigRational>>,
    trans_f64: Vec<Vec<f64>>,
    /// Stationary mass of each `r`-block, `r = max(k, 1)`.
    stationary: Vec<BigRational>,
    gibbs: BigRational,
}

/// The chain walked by the law of `psi_n`: states are the words of length
/// `0..=k` (the last symbols seen, capped at `k`), starting from the empty
/// word; each transition emits one symbol.
#[derive(Clone, Debug)]
pub struct StateGraph {
    pub words: Vec<Vec<usize>>,
    pub index: FxHashMap<Vec<usize>, usize>,
    /// `(from, to, symbol, weight)`.
    pub edges: Vec<(usize, usize, usize, BigRational)>,
    /// First state of length `k`; states `steady_start..` are the `k`-blocks
    /// in code order.
    pub steady_start: usize,
}

impl GibbsMarkovSystem {
    /// Builds a system from a weight table: for `k = 0` one row of `m`
    /// symbol probabilities; for `k >= 1`, `m^k` rows indexed by the block
    /// code (first symbol most significant), row `b` giving the law of the
    /// next symbol. Rows must sum to exactly 1 unless `row_tolerance` is
    /// positive, in which case rows within that distance are renormalised.
    pub fn new(
        m: usize,
        k: usize,
        rows: Vec<Vec<BigRational>>,
        row_tolerance: f64,
    ) -> Result<Self> {
        if m < 2 {
            return Err(Error::validation(format!(
                "alphabet size must be at least 2, got {m}"
            )));
        }
        let nblocks = m
            .checked_pow(k as u32)
            .filter(|&b| b <= MAX_BLOCKS)
            .ok_or_else(|| Error::resource("number of k-blocks", MAX_BLOCKS as u64, None))?;
        if rows.len() != nblocks {
            return Err(Error::validation(format!(
                "order-{k} system over {m} symbols needs {nblocks} weight rows, got {}",
                rows.len()
            )));
        }
        let mut trans = Vec::with_capacity(nblocks);
        for (b, row) in rows.into_iter().enumerate() {
            if row.len() != m {
                return Err(Error::validation(format!(
                    "weight row {b} has {} entries, expected {m}",
                    row.len()
                )));
            }
            if let Some(a) = row.iter().position(|w| !w.is_positive()) {
                return Err(Error::validation(format!(
                    "weight p({} -> {a}) must be strictly positive (full branches)",
                    block_label(b, k, m)
                )));
            }
            let sum: BigRational = row.iter().sum();
            if !sum.is_one() {
                let gap = rational_to_f64(&(&sum - BigRational::one())).abs();
                if gap > row_tolerance {
                    return Err(Error::validation(format!(
                        "weight row {} sums to {} (not stochastic)",
                        block_label(b, k, m),
                        rational_to_f64(&sum)
                    )));
                }
                trans.push(row.iter().map(|w| w / &sum).collect());
            } else {
                trans.push(row);
            }
        }
        let trans_f64 = trans
            .iter()
            .map(|r| r.iter().map(rational_to_f64).collect())
            .collect();
        let stationary = if k == 0 {
            trans[0].clone()
        } else {
            stationary_blocks(m, k, &trans)?
        };
        let mut sys = GibbsMarkovSystem {
            m,
            k,
            trans,
            trans_f64,
            stationary,
            gibbs: BigRational::one(),
        };
        sys.gibbs = sys.compute_gibbs_constant()?;
        Ok(sys)
    }

    pub fn bernoulli(weights: Vec<BigRational>) -> Result<Self> {
        let m = weights.len();
        Self::new(m, 0, vec![weights], 0.0)
    }

    pub fn uniform(m: usize) -> Self {
        let w = BigRational::new(BigInt::one(), BigInt::from(m));
        Self::bernoulli(vec![w; m]).expect("uniform weights are valid")
    }

    pub fn alphabet(&self) -> usize {
        self.m
    }

    pub fn order(&self) -> usize {
        self.k
    }

    pub fn is_bernoulli(&self) -> bool {
        self.k == 0
    }

    /// Length of the blocks indexing stationary masses and periodic sums.
    pub fn block_len(&self) -> usize {
        self.k.max(1)
    }

    pub fn num_blocks(&self) -> usize {
        self.m.pow(self.block_len() as u32)
    }

    pub fn num_kblocks(&self) -> usize {
        self.m.pow(self.k as u32)
    }

    /// `p(b -> a)` for a `k`-block code `b` (ignored when `k = 0`).
    pub fn transition(&self, block: usize, symbol: usize) -> &BigRational {
        &self.trans[if self.k == 0 { 0 } else { block }][symbol]
    }

    pub fn transition_f64(&self, block: usize, symbol: usize) -> f64 {
        self.trans_f64[if self.k == 0 { 0 } else { block }][symbol]
    }

    pub fn weight_rows(&self) -> &[Vec<BigRational>] {
        &self.trans
    }

    /// Stationary mass of each `max(k,1)`-block, in code order.
    pub fn stationary_measure(&self) -> &[BigRational] {
        &self.stationary
    }

    /// Gibbs constant `C >= 1` (exact).
    pub fn gibbs_constant(&self) -> &BigRational {
        &self.gibbs
    }

    /// Code of the `k`-block following `block` when `symbol` is appended.
    pub fn shift_code(&self, block: usize, symbol: usize) -> usize {
        if self.k == 0 {
            0
        } else {
            (block * self.m + symbol) % self.num_kblocks()
        }
    }

    /// Same as [`shift_code`](Self::shift_code) for `max(k,1)`-blocks.
    pub fn shift_block(&self, block: usize, symbol: usize) -> usize {
        (block * self.m + symbol) % self.num_blocks()
    }

    pub fn encode_block(&self, word: &[usize]) -> usize {
        word.iter().fold(0, |acc, &s| acc * self.m + s)
    }

    pub fn decode_block(&self, code: usize, len: usize) -> Vec<usize> {
        let mut w = vec![0; len];
        let mut c = code;
        for slot in w.iter_mut().rev() {
            *slot = c % self.m;
            c /= self.m;
        }
        w
    }

    /// First symbol of a `max(k,1)`-block.
    pub fn block_head(&self, code: usize) -> usize {
        code / self.m.pow(self.block_len() as u32 - 1)
    }

    /// `mu[word]` exactly.
    pub fn cylinder_mass(&self, word: &[usize]) -> Result<BigRational> {
        if word.is_empty() {
            return Err(Error::validation("cylinder word must be nonempty"));
        }
        if let Some(&s) = word.iter().find(|&&s| s >= self.m) {
            return Err(Error::validation(format!(
                "symbol {s} outside alphabet of size {}",
                self.m
            )));
        }
        Ok(self.mass_unchecked(word))
    }

    /// `mu[word]` for a valid word; the empty word has mass 1.
    pub fn mass_unchecked(&self, word: &[usize]) -> BigRational {
        let r = self.block_len();
        if word.is_empty() {
            return BigRational::one();
        }
        if word.len() < r {
            // marginal of the stationary block law
            let free = r - word.len();
            let base = self.encode_block(word) * self.m.pow(free as u32);
            return (0..self.m.pow(free as u32))
                .map(|j| &self.stationary[base + j])
                .sum();
        }
        let mut mass = self.stationary[self.encode_block(&word[..r])].clone();
        if self.k == 0 {
            for &s in &word[1..] {
                mass *= &self.trans[0][s];
            }
        } else {
            let mut block = self.encode_block(&word[..r]);
            for &s in &word[r..] {
                mass *= &self.trans[block][s];
                block = self.shift_code(block, s);
            }
        }
        mass
    }

    /// `exp(phi_n)` on the cylinder `word[..n]` continued by `word[n..]`,
    /// where `word.len() = n + k`.
    pub fn potential_weight(&self, word: &[usize], n: usize) -> BigRational {
        assert_eq!(word.len(), n + self.k);
        self.mass_unchecked(word) / self.mass_unchecked(&word[n..])
    }

    fn compute_gibbs_constant(&self) -> Result<BigRational> {
        if self.k == 0 {
            return Ok(BigRational::one());
        }
        let k = self.k;
        let mut best = BigRational::one();
        let mut consider = |r: BigRational| {
            let inv = r.recip();
            let v = if r > inv { r } else { inv };
            if v > best {
                best = v;
            }
        };
        // ratios mu[w] / (mu[w<n] mu[w>=n]) depend on a window of length
        // n + k for n < k and on a 2k-window split at k otherwise.
        for n in 1..=k {
            let len = n + k;
            let count = self
                .m
                .checked_pow(len as u32)
                .filter(|&c| c <= MAX_GIBBS_WORDS)
                .ok_or_else(|| {
                    Error::resource("Gibbs constant windows", MAX_GIBBS_WORDS as u64, None)
                })?;
            for code in 0..count {
                let w = self.decode_block(code, len);
                let r = self.mass_unchecked(&w)
                    / (self.mass_unchecked(&w[..n]) * self.mass_unchecked(&w[n..]));
                consider(r);
            }
        }
        Ok(best)
    }

    /// Exhaustive check of `C^-1 mu(a) <= exp(phi_n(x)) <= C mu(a)` over
    /// every cylinder of length `n <= n_max` (stopping early when the word
    /// count would exceed the enumeration cap).
    pub fn check_gibbs_sandwich(&self, n_max: usize) -> GibbsSandwichReport {
        let c = &self.gibbs;
        let mut worst = BigRational::one();
        let mut holds = true;
        let mut checked = 0;
        let mut words = 0u64;
        for n in 1..=n_max {
            let len = n + self.k;
            let Some(count) = self
                .m
                .checked_pow(len as u32)
                .filter(|&c| c <= MAX_GIBBS_WORDS)
            else {
                break;
            };
            for code in 0..count {
                let w = self.decode_block(code, len);
                let r = self.potential_weight(&w, n) / self.mass_unchecked(&w[..n]);
                let dev = if r >= BigRational::one() {
                    r.clone()
                } else {
                    r.recip()
                };
                if &dev > c {
                    holds = false;
                }
                if dev > worst {
                    worst = dev;
                }
            }
            words += count as u64;
            checked = n;
        }
        GibbsSandwichReport {
            holds,
            max_length_checked: checked,
            words_checked: words,
            worst_ratio: worst,
        }
    }

    /// The walk chain over words of length `0..=k`.
    pub fn state_graph(&self) -> StateGraph {
        let (m, k) = (self.m, self.k);
        let mut words: Vec<Vec<usize>> = Vec::new();
        for len in 0..=k {
            for code in 0..m.pow(len as u32) {
                words.push(self.decode_block(code, len));
            }
        }
        let index: FxHashMap<Vec<usize>, usize> = words
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, w)| (w, i))
            .collect();
        let steady_start = words.len() - m.pow(k as u32);
        let mut edges = Vec::new();
        for (i, w) in words.iter().enumerate() {
            for a in 0..m {
                let (next, weight) = if k == 0 {
                    (Vec::new(), self.trans[0][a].clone())
                } else if w.len() < k {
                    let mut ext = w.clone();
                    ext.push(a);
                    let weight = self.mass_unchecked(&ext) / self.mass_unchecked(w);
                    (ext, weight)
                } else {
                    let b = self.encode_block(w);
                    let mut next = w[1..].to_vec();
                    next.push(a);
                    (next, self.trans[b][a].clone())
                };
                edges.push((i, index[&next], a, weight));
            }
        }
        StateGraph {
            words,
            index,
            edges,
            steady_start,
        }
    }
}

fn block_label(b: usize, k: usize, m: usize) -> String {
    if k == 0 {
        return "(bernoulli)".into();
    }
    let mut w = vec![0; k];
    let mut c = b;
    for slot in w.iter_mut().rev() {
        *slot = c % m;
        c /= m;
    }
    format!("{w:?}")
}

/// Exact stationary law of the `k`-block chain by Gaussian elimination.
fn stationary_blocks(m: usize, k: usize, trans: &[Vec<BigRational>]) -> Result<Vec<BigRational>> {
    let n = m.pow(k as u32);
    // rows: equations sum_s pi(s) (P - I)[s][t] = 0 for t < n-1, plus sum pi = 1
    let mut a = vec![vec![BigRational::zero(); n + 1]; n];
    for (s, row) in trans.iter().enumerate() {
        for (sym, w) in row.iter().enumerate() {
            let t = (s * m + sym) % n;
            if t < n - 1 {
                a[t][s] += w;
            }
        }
    }
    for (t, row) in a.iter_mut().enumerate().take(n - 1) {
        row[t] -= BigRational::one();
    }
    for v in a[n - 1].iter_mut().take(n) {
        *v = BigRational::one();
    }
    a[n - 1][n] = BigRational::one();
    let x = solve(a)
        .ok_or_else(|| Error::validation("transition table has no unique stationary law"))?;
    Ok(x)
}

/// Solves an augmented `n x (n+1)` system exactly; `None` if singular.
fn solve(mut a: Vec<Vec<BigRational>>) -> Option<Vec<BigRational>> {
    let n = a.len();
    for col in 0..n {
        let piv = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, piv);
        let p = a[col][col].clone();
        for v in a[col].iter_mut().skip(col) {
            *v /= &p;
        }
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                for c in col..=n {
                    let delta = &f * &a[col][c];
                    a[r][c] -= delta;
                }
            }
        }
    }
    Some(a.into_iter().map(|row| row[n].clone()).collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct GibbsSandwichReport {
    pub holds: bool,
    pub max_length_checked: usize,
    pub words_checked: u64,
    pub worst_ratio: BigRational,
}

/// A cocycle constant on 1-cylinders.
#[derive(Clone, Debug, PartialEq)]
pub struct Cocycle {
    group: GroupSpec,
    values: Vec<GroupElement>,
}

impl Cocycle {
    pub fn new(group: GroupSpec, values: Vec<GroupElement>) -> Result<Self> {
        for (a, v) in values.iter().enumerate() {
            group
                .validate_key(v.key())
                .map_err(|e| Error::validation(format!("cocycle value for symbol {a}: {e}")))?;
        }
        Ok(Cocycle { group, values })
    }

    /// Checks totality against an alphabet.
    pub fn check_alphabet(&self, m: usize) -> Result<()> {
        if self.values.len() != m {
            return Err(Error::validation(format!(
                "cocycle not total: {} values for an alphabet of {m} symbols",
                self.values.len()
            )));
        }
        Ok(())
    }

    pub fn group(&self) -> &GroupSpec {
        &self.group
    }

    pub fn values(&self) -> &[GroupElement] {
        &self.values
    }

    pub fn value(&self, symbol: usize) -> &GroupElement {
        &self.values[symbol]
    }

    /// Abelianised values.
    pub fn abelian_values(&self) -> Vec<Vec<i64>> {
        self.values
            .iter()
            .map(|v| self.group.abelianize(v))
            .collect()
    }

    /// Largest sup-norm of an abelianised value.
    pub fn abelian_radius(&self) -> i64 {
        self.abelian_values()
            .iter()
            .flat_map(|v| v.iter().map(|x| x.abs()))
            .max()
            .unwrap_or(0)
    }
}

/// A permutation of the alphabet.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymmetryInvolution {
    perm: Vec<usize>,
}

impl SymmetryInvolution {
    pub fn new(perm: Vec<usize>) -> Result<Self> {
        let n = perm.len();
        let mut seen = vec![false; n];
        for &p in &perm {
            if p >= n || seen[p] {
                return Err(Error::validation(format!(
                    "involution {perm:?} is not a permutation"
                )));
            }
            seen[p] = true;
        }
        Ok(SymmetryInvolution { perm })
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    pub fn apply(&self, a: usize) -> usize {
        self.perm[a]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SymmetryReport {
    pub holds: bool,
    pub involutive: bool,
    pub inverts_cocycle: bool,
    pub preserves_measure: bool,
    pub witnesses: Vec<String>,
}

/// Checks condition (S) for the coordinatewise involution induced by `sigma`.
pub fn check_symmetry(
    system: &GibbsMarkovSystem,
    cocycle: &Cocycle,
    sigma: &SymmetryInvolution,
) -> Result<SymmetryReport> {
    let m = system.alphabet();
    if sigma.perm.len() != m {
        return Err(Error::validation(format!(
            "involution has length {}, alphabet has {m} symbols",
            sigma.perm.len()
        )));
    }
    cocycle.check_alphabet(m)?;
    let g = cocycle.group();
    let mut witnesses = Vec::new();
    let mut involutive = true;
    for a in 0..m {
        if sigma.apply(sigma.apply(a)) != a {
            involutive = false;
            witnesses.push(format!(
                "sigma(sigma({a})) = {} != {a}",
                sigma.apply(sigma.apply(a))
            ));
        }
    }
    let mut inverts = true;
    for a in 0..m {
        let lhs = cocycle.value(sigma.apply(a));
        let rhs = g.inv_unchecked(cocycle.value(a));
        if *lhs != rhs {
            inverts = false;
            witnesses.push(format!("psi(sigma({a})) = {lhs} but psi({a})^-1 = {rhs}"));
        }
    }
    let mut preserves = true;
    let k = system.order();
    for b in 0..system.num_kblocks() {
        let word = system.decode_block(b, k);
        let image: Vec<usize> = word.iter().map(|&s| sigma.apply(s)).collect();
        let sb = system.encode_block(&image);
        for a in 0..m {
            if system.transition(b, a) != system.transition(sb, sigma.apply(a)) {
                preserves = false;
                witnesses.push(format!(
                    "p({word:?} -> {a}) = {} differs from p({image:?} -> {}) = {}",
                    system.transition(b, a),
                    sigma.apply(a),
                    system.transition(sb, sigma.apply(a))
                ));
            }
        }
    }
    Ok(SymmetryReport {
        holds: involutive && inverts && preserves,
        involutive,
        inverts_cocycle: inverts,
        preserves_measure: preserves,
        witnesses,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct AperiodicityReport {
    /// Hermite basis of the lattice spanned by abelianised differences.
    pub difference_basis: Vec<Vec<i64>>,
    pub rank: usize,
    pub ambient_rank: usize,
    /// `[Z^k : L]`, `None` when `L` has lower rank.
    pub index: Option<u128>,
    /// For finite targets: the order of the subgroup generated by
    /// differences and the group order.
    pub finite_part: Option<(usize, usize)>,
    /// Necessary condition for aperiodicity holds.
    pub full: bool,
}

/// Lattice (or finite subgroup) generated by the value differences
/// `psi(a) psi(b)^-1`.
pub fn check_aperiodicity_algebraic(
    system: &GibbsMarkovSystem,
    cocycle: &Cocycle,
) -> Result<AperiodicityReport> {
    let m = system.alphabet();
    cocycle.check_alphabet(m)?;
    let g = cocycle.group();
    let ab = cocycle.abelian_values();
    let dim = g.abelian_rank();
    let mut diffs = Vec::new();
    for a in 0..m {
        for b in 0..m {
            if a != b {
                diffs.push(
                    ab[a]
                        .iter()
                        .zip(&ab[b])
                        .map(|(x, y)| x - y)
                        .collect::<Vec<i64>>(),
                );
            }
        }
    }
    let basis = lattice::hermite_rows(&diffs, dim);
    let index = lattice::index_of(&basis, dim);
    let finite_part = match g.finite_order() {
        Some(order) => {
            let mut gens = Vec::new();
            for a in 0..m {
                for b in 0..m {
                    gens.push(
                        g.mul_unchecked(cocycle.value(a), &g.inv_unchecked(cocycle.value(b))),
                    );
                }
            }
            Some((normal_closure_size(g, &gens), order))
        }
        None => None,
    };
    let full = match finite_part {
        Some((sub, order)) => sub == order,
        None => index == Some(1),
    };
    Ok(AperiodicityReport {
        rank: basis.len(),
        difference_basis: basis,
        ambient_rank: dim,
        index,
        finite_part,
        full,
    })
}

/// Size of the normal closure of `gens` in a finite group spec.
fn normal_closure_size(g: &GroupSpec, gens: &[GroupElement]) -> usize {
    let all = enumerate_finite(g);
    let mut conj: Vec<GroupElement> = Vec::new();
    for x in gens {
        for h in &all {
            conj.push(g.mul_unchecked(&g.mul_unchecked(h, x), &g.inv_unchecked(h)));
        }
    }
    conj.sort();
    conj.dedup();
    closure(g, &conj).len()
}

/// All elements of a finite group spec.
pub fn enumerate_finite(g: &GroupSpec) -> Vec<GroupElement> {
    match g {
        GroupSpec::Finite(f) => (0..f.order())
            .map(|i| GroupElement::from_slice(&[i as i64]))
            .collect(),
        GroupSpec::DirectProduct(l, r) => {
            let mut out = Vec::new();
            for a in enumerate_finite(l) {
                for b in enumerate_finite(r) {
                    let mut key = a.0.clone();
                    key.extend_from_slice(b.key());
                    out.push(GroupElement(key));
                }
            }
            out
        }
        _ => Vec::new(),
    }
}

fn closure(g: &GroupSpec, gens: &[GroupElement]) -> Vec<GroupElement> {
    let mut seen: rustc_hash::FxHashSet<GroupElement> = rustc_hash::FxHashSet::default();
    let e = g.identity();
    seen.insert(e.clone());
    let mut frontier = vec![e];
    while let Some(x) = frontier.pop() {
        for s in gens {
            let y = g.mul_unchecked(s, &x);
            if seen.insert(y.clone()) {
                frontier.push(y);
            }
        }
    }
    seen.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::ratio;
    use crate::groups::RealBasis;

    fn el(v: &[i64]) -> GroupElement {
        GroupElement::from_slice(v)
    }

    fn two_state() -> GibbsMarkovSystem {
        GibbsMarkovSystem::new(
            2,
            1,
            vec![
                vec![ratio(1, 2), ratio(1, 2)],
                vec![ratio(1, 4), ratio(3, 4)],
            ],
            0.0,
        )
        .unwrap()
    }

    #[test]
    fn stationary_vectors() {
        let u = GibbsMarkovSystem::uniform(3);
        assert_eq!(
            u.stationary_measure(),
            &[ratio(1, 3), ratio(1, 3), ratio(1, 3)]
        );
        assert_eq!(
            two_state().stationary_measure(),
            &[ratio(1, 3), ratio(2, 3)]
        );
        let ds = GibbsMarkovSystem::new(
            3,
            1,
            vec![
                vec![ratio(1, 2), ratio(1, 4), ratio(1, 4)],
                vec![ratio(1, 4), ratio(1, 2), ratio(1, 4)],
                vec![ratio(1, 4), ratio(1, 4), ratio(1, 2)],
            ],
            0.0,
        )
        .unwrap();
        assert_eq!(
            ds.stationary_measure(),
            &[ratio(1, 3), ratio(1, 3), ratio(1, 3)]
        );
    }

    #[test]
    fn validation_failures() {
        assert!(GibbsMarkovSystem::bernoulli(vec![ratio(1, 2), ratio(1, 3)]).is_err());
        assert!(GibbsMarkovSystem::bernoulli(vec![ratio(1, 1), ratio(0, 1)]).is_err());
        assert!(GibbsMarkovSystem::new(2, 1, vec![vec![ratio(1, 2), ratio(1, 2)]], 0.0).is_err());
        assert!(GibbsMarkovSystem::bernoulli(vec![ratio(1, 1)]).is_err());
        let near = vec![ratio(1, 3), ratio(2, 3) + ratio(1, 10i64.pow(15))];
        assert!(GibbsMarkovSystem::new(2, 0, vec![near.clone()], 0.0).is_err());
        assert!(GibbsMarkovSystem::new(2, 0, vec![near], 1e-14).is_ok());
    }

    #[test]
    fn cylinder_masses() {
        let u = GibbsMarkovSystem::uniform(3);
        assert_eq!(u.cylinder_mass(&[0, 1]).unwrap(), ratio(1, 9));
        assert_eq!(u.cylinder_mass(&[2]).unwrap(), ratio(1, 3));
        let total: BigRational = (0..81)
            .map(|c| u.cylinder_mass(&u.decode_block(c, 4)).unwrap())
            .sum();
        assert!(total.is_one());
        let t = two_state();
        assert_eq!(t.cylinder_mass(&[1]).unwrap(), ratio(2, 3));
        assert_eq!(
            t.cylinder_mass(&[0, 1, 1]).unwrap(),
            ratio(1, 3) * ratio(1, 2) * ratio(3, 4)
        );
        assert!(u.cylinder_mass(&[3]).is_err());
        assert!(u.cylinder_mass(&[]).is_err());
    }

    #[test]
    fn markov_property_exhaustive() {
        // mu[u w v] mu[w] = mu[u w] mu[w v] whenever |w| >= k
        let s = GibbsMarkovSystem::new(
            2,
            2,
            vec![
                vec![ratio(1, 2), ratio(1, 2)],
                vec![ratio(1, 3), ratio(2, 3)],
                vec![ratio(3, 5), ratio(2, 5)],
                vec![ratio(1, 7), ratio(6, 7)],
            ],
            0.0,
        )
        .unwrap();
        for len in 3..=6 {
            for code in 0..(1usize << len) {
                let w = s.decode_block(code, len);
                for cut in 1..len - 2 {
                    let (u, rest) = w.split_at(cut);
                    let (mid, v) = rest.split_at(2);
                    let lhs = s.mass_unchecked(&w) * s.mass_unchecked(mid);
                    let uw: Vec<usize> = u.iter().chain(mid).copied().collect();
                    let wv: Vec<usize> = mid.iter().chain(v).copied().collect();
                    assert_eq!(lhs, s.mass_unchecked(&uw) * s.mass_unchecked(&wv));
                }
            }
            let total: BigRational = (0..(1usize << len))
                .map(|c| s.mass_unchecked(&s.decode_block(c, len)))
                .sum();
            assert!(total.is_one());
        }
        let rep = s.check_gibbs_sandwich(8);
        assert!(rep.holds);
        assert_eq!(rep.max_length_checked, 8);
        assert_eq!(&rep.worst_ratio, s.gibbs_constant());
    }

    #[test]
    fn gibbs_constant_order_one() {
        let t = two_state();
        // max over p(s -> s') / pi(s') and reciprocals
        assert_eq!(t.gibbs_constant(), &ratio(3, 2));
        assert_eq!(GibbsMarkovSystem::uniform(4).gibbs_constant(), &ratio(1, 1));
        assert!(t.check_gibbs_sandwich(8).holds);
    }

    #[test]
    fn state_graph_shapes() {
        let g = GibbsMarkovSystem::uniform(3).state_graph();
        assert_eq!(g.words.len(), 1);
        assert_eq!(g.edges.len(), 3);
        let g = two_state().state_graph();
        assert_eq!(g.words.len(), 3);
        assert_eq!(g.steady_start, 1);
        let from_empty: Vec<_> = g
            .edges
            .iter()
            .filter(|e| e.0 == 0)
            .map(|e| e.3.clone())
            .collect();
        assert_eq!(from_empty, vec![ratio(1, 3), ratio(2, 3)]);
    }

    #[test]
    fn symmetry_checks() {
        let z = GroupSpec::lattice(1);
        let tri = Cocycle::new(z.clone(), vec![el(&[-1]), el(&[0]), el(&[1])]).unwrap();
        let u3 = GibbsMarkovSystem::uniform(3);
        let sigma = SymmetryInvolution::new(vec![2, 1, 0]).unwrap();
        assert!(check_symmetry(&u3, &tri, &sigma).unwrap().holds);
        let bad = Cocycle::new(z, vec![el(&[1]), el(&[1]), el(&[0])]).unwrap();
        let swap = SymmetryInvolution::new(vec![1, 0, 2]).unwrap();
        let rep = check_symmetry(&u3, &bad, &swap).unwrap();
        assert!(!rep.holds && !rep.inverts_cocycle && !rep.witnesses.is_empty());
        let real = GroupSpec::EmbeddedRealLattice(
            RealBasis::new(1, vec![vec![1.0], vec![2f64.sqrt()]]).unwrap(),
        );
        let four = Cocycle::new(
            real,
            vec![el(&[1, 0]), el(&[-1, 0]), el(&[0, 1]), el(&[0, -1])],
        )
        .unwrap();
        let pairs = SymmetryInvolution::new(vec![1, 0, 3, 2]).unwrap();
        assert!(
            check_symmetry(&GibbsMarkovSystem::uniform(4), &four, &pairs)
                .unwrap()
                .holds
        );
        let skew = GibbsMarkovSystem::bernoulli(vec![ratio(3, 10), ratio(7, 10)]).unwrap();
        let pm = Cocycle::new(GroupSpec::lattice(1), vec![el(&[1]), el(&[-1])]).unwrap();
        let rep =
            check_symmetry(&skew, &pm, &SymmetryInvolution::new(vec![1, 0]).unwrap()).unwrap();
        assert!(rep.inverts_cocycle && !rep.preserves_measure);
        assert!(SymmetryInvolution::new(vec![0, 0]).is_err());
    }

    #[test]
    fn algebraic_aperiodicity() {
        let z = GroupSpec::lattice(1);
        let u3 = GibbsMarkovSystem::uniform(3);
        let tri = Cocycle::new(z.clone(), vec![el(&[-1]), el(&[0]), el(&[1])]).unwrap();
        let rep = check_aperiodicity_algebraic(&u3, &tri).unwrap();
        assert!(rep.full && rep.index == Some(1));
        let simple = Cocycle::new(z, vec![el(&[-1]), el(&[1])]).unwrap();
        let rep = check_aperiodicity_algebraic(&GibbsMarkovSystem::uniform(2), &simple).unwrap();
        assert_eq!(rep.index, Some(2));
        assert!(!rep.full);
        let z2 = Cocycle::new(
            GroupSpec::lattice(2),
            vec![el(&[1, 0]), el(&[0, 1]), el(&[0, 0])],
        )
        .unwrap();
        assert!(check_aperiodicity_algebraic(&u3, &z2).unwrap().full);
        let c3 = Cocycle::new(GroupSpec::cyclic(3), vec![el(&[0]), el(&[1]), el(&[2])]).unwrap();
        let rep = check_aperiodicity_algebraic(&u3, &c3).unwrap();
        assert_eq!(rep.finite_part, Some((3, 3)));
        let c4 = Cocycle::new(GroupSpec::cyclic(4), vec![el(&[1]), el(&[3])]).unwrap();
        let rep = check_aperiodicity_algebraic(&GibbsMarkovSystem::uniform(2), &c4).unwrap();
        assert_eq!(rep.finite_part, Some((2, 4)));
        assert!(!rep.full);
    }

    #[test]
    fn cocycle_totality() {
        let c = Cocycle::new(GroupSpec::lattice(1), vec![el(&[1]), el(&[0])]).unwrap();
        let err = c.check_alphabet(3).unwrap_err();
        assert!(err.to_string().contains("cocycle not total"));
        assert!(Cocycle::new(GroupSpec::cyclic(2), vec![el(&[2])]).is_err());
    }
}
