//! Finitely generated groups with canonical integer encodings.
//!
//! Every element is stored as a short vector of `i64` (its *key*). The layout
//! depends on the group:
//!
//! | group                     | key                                  |
//! |---------------------------|--------------------------------------|
//! | `Z^d`                     | the `d` coordinates                  |
//! | finite group of order `n` | one index in `0..n`                  |
//! | discrete Heisenberg group | `(x, y, z)`                          |
//! | embedded real lattice     | `m` integer coordinates in the basis |
//! | direct product            | left key followed by right key       |
//!
//! The Heisenberg law is `(x,y,z)(x',y',z') = (x+x', y+y', z+z'+x y')`.

use std::fmt;

use rustc_hash::FxHashSet;
use smallvec::SmallVec;

use crate::error::{Error, Result};

/// Canonical key of a group element.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct GroupElement(pub SmallVec<[i64; 4]>);

impl GroupElement {
    pub fn from_slice(key: &[i64]) -> Self {
        GroupElement(SmallVec::from_slice(key))
    }

    pub fn key(&self) -> &[i64] {
        &self.0
    }
}

impl fmt::Debug for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0.as_slice())
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|x| x.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

impl From<Vec<i64>> for GroupElement {
    fn from(v: Vec<i64>) -> Self {
        GroupElement(SmallVec::from_vec(v))
    }
}

/// A finite group given by its Cayley table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteGroup {
    table: Vec<Vec<usize>>,
    identity: usize,
    inverses: Vec<usize>,
    abelian: bool,
}

impl FiniteGroup {
    /// Validates the table. Associativity is checked on every triple for
    /// order up to 64 and on a fixed pseudo-random sample of 10^5 triples
    /// beyond that.
    pub fn new(table: Vec<Vec<usize>>, identity: usize) -> Result<Self> {
        let n = table.len();
        if n == 0 {
            return Err(Error::validation(
                "finite group must have at least one element",
            ));
        }
        if identity >= n {
            return Err(Error::validation(format!(
                "identity index {identity} out of range for order {n}"
            )));
        }
        for (i, row) in table.iter().enumerate() {
            if row.len() != n {
                return Err(Error::validation(format!(
                    "table row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            if let Some(&bad) = row.iter().find(|&&v| v >= n) {
                return Err(Error::validation(format!(
                    "table entry {bad} in row {i} out of range"
                )));
            }
        }
        for a in 0..n {
            if table[identity][a] != a || table[a][identity] != a {
                return Err(Error::validation(format!(
                    "index {identity} is not an identity (fails at {a})"
                )));
            }
        }
        let mut inverses = vec![usize::MAX; n];
        for a in 0..n {
            match (0..n).find(|&b| table[a][b] == identity && table[b][a] == identity) {
                Some(b) => inverses[a] = b,
                None => {
                    return Err(Error::validation(format!(
                        "element {a} has no two-sided inverse"
                    )))
                }
            }
        }
        let assoc = |a: usize, b: usize, c: usize| table[table[a][b]][c] == table[a][table[b][c]];
        if n <= 64 {
            for a in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        if !assoc(a, b, c) {
                            return Err(Error::validation(format!(
                                "associativity fails at ({a},{b},{c})"
                            )));
                        }
                    }
                }
            }
        } else {
            let mut state: u64 = 0x9e37_79b9_7f4a_7c15;
            let mut next = || {
                state ^= state << 13;
                state ^= state >> 7;
                state ^= state << 17;
                (state % n as u64) as usize
            };
            for _ in 0..100_000 {
                let (a, b, c) = (next(), next(), next());
                if !assoc(a, b, c) {
                    return Err(Error::validation(format!(
                        "associativity fails at ({a},{b},{c})"
                    )));
                }
            }
        }
        let abelian = (0..n).all(|a| (0..n).all(|b| table[a][b] == table[b][a]));
        Ok(FiniteGroup {
            table,
            identity,
            inverses,
            abelian,
        })
    }

    /// The cyclic group `Z/n` with identity 0.
    pub fn cyclic(n: usize) -> Self {
        let table = (0..n)
            .map(|a| (0..n).map(|b| (a + b) % n).collect())
            .collect();
        FiniteGroup::new(table, 0).expect("cyclic table is a group")
    }

    pub fn order(&self) -> usize {
        self.table.len()
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn table(&self) -> &[Vec<usize>] {
        &self.table
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a][b]
    }

    pub fn inv(&self, a: usize) -> usize {
        self.inverses[a]
    }

    pub fn is_abelian(&self) -> bool {
        self.abelian
    }

    /// Subgroup generated by `gens` (closure under multiplication suffices
    /// in a finite group).
    pub fn generated_subgroup(&self, gens: &[usize]) -> Vec<usize> {
        let mut seen = vec![false; self.order()];
        seen[self.identity] = true;
        let mut frontier = vec![self.identity];
        while let Some(x) = frontier.pop() {
            for &g in gens {
                let y = self.mul(g, x);
                if !seen[y] {
                    seen[y] = true;
                    frontier.push(y);
                }
            }
        }
        (0..self.order()).filter(|&i| seen[i]).collect()
    }

    /// Normal closure of `gens`: the subgroup generated by all conjugates.
    pub fn normal_closure(&self, gens: &[usize]) -> Vec<usize> {
        let mut conj = Vec::new();
        for &g in gens {
            for h in 0..self.order() {
                conj.push(self.mul(self.mul(h, g), self.inv(h)));
            }
        }
        conj.sort_unstable();
        conj.dedup();
        self.generated_subgroup(&conj)
    }
}

/// Basis of a finitely generated subgroup of `R^d`.
#[derive(Clone, Debug, PartialEq)]
pub struct RealBasis {
    ambient_dim: usize,
    vectors: Vec<Vec<f64>>,
}

impl RealBasis {
    /// `vectors[i]` is the i-th generator in `R^ambient_dim`. Rational
    /// independence cannot be decided from floating input and is trusted.
    pub fn new(ambient_dim: usize, vectors: Vec<Vec<f64>>) -> Result<Self> {
        if ambient_dim == 0 {
            return Err(Error::validation("real basis needs ambient dimension >= 1"));
        }
        if vectors.is_empty() {
            return Err(Error::validation("real basis needs at least one vector"));
        }
        for (i, v) in vectors.iter().enumerate() {
            if v.len() != ambient_dim {
                return Err(Error::validation(format!(
                    "basis vector {i} has {} entries, ambient dimension is {ambient_dim}",
                    v.len()
                )));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::validation(format!("basis vector {i} is not finite")));
            }
        }
        Ok(RealBasis {
            ambient_dim,
            vectors,
        })
    }

    pub fn rank(&self) -> usize {
        self.vectors.len()
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    pub fn embed(&self, coords: &[i64]) -> Vec<f64> {
        let mut out = vec![0.0; self.ambient_dim];
        for (c, v) in coords.iter().zip(&self.vectors) {
            for (o, b) in out.iter_mut().zip(v) {
                *o += *c as f64 * b;
            }
        }
        out
    }
}

/// A supported group.
#[derive(Clone, Debug, PartialEq)]
pub enum GroupSpec {
    IntegerLattice { dim: usize },
    Finite(FiniteGroup),
    DirectProduct(Box<GroupSpec>, Box<GroupSpec>),
    HeisenbergZ,
    EmbeddedRealLattice(RealBasis),
}

impl GroupSpec {
    pub fn lattice(dim: usize) -> Self {
        GroupSpec::IntegerLattice { dim }
    }

    pub fn cyclic(n: usize) -> Self {
        GroupSpec::Finite(FiniteGroup::cyclic(n))
    }

    pub fn product(left: GroupSpec, right: GroupSpec) -> Self {
        GroupSpec::DirectProduct(Box::new(left), Box::new(right))
    }

    /// Number of `i64` entries in a key.
    pub fn key_len(&self) -> usize {
        match self {
            GroupSpec::IntegerLattice { dim } => *dim,
            GroupSpec::Finite(_) => 1,
            GroupSpec::DirectProduct(l, r) => l.key_len() + r.key_len(),
            GroupSpec::HeisenbergZ => 3,
            GroupSpec::EmbeddedRealLattice(b) => b.rank(),
        }
    }

    /// Rank of the torsion-free abelianization.
    pub fn abelian_rank(&self) -> usize {
        match self {
            GroupSpec::IntegerLattice { dim } => *dim,
            GroupSpec::Finite(_) => 0,
            GroupSpec::DirectProduct(l, r) => l.abelian_rank() + r.abelian_rank(),
            GroupSpec::HeisenbergZ => 2,
            GroupSpec::EmbeddedRealLattice(b) => b.rank(),
        }
    }

    pub fn is_abelian(&self) -> bool {
        match self {
            GroupSpec::IntegerLattice { .. } | GroupSpec::EmbeddedRealLattice(_) => true,
            GroupSpec::Finite(f) => f.is_abelian(),
            GroupSpec::DirectProduct(l, r) => l.is_abelian() && r.is_abelian(),
            GroupSpec::HeisenbergZ => false,
        }
    }

    /// Order of the group, `None` if infinite.
    pub fn finite_order(&self) -> Option<usize> {
        match self {
            GroupSpec::Finite(f) => Some(f.order()),
            GroupSpec::DirectProduct(l, r) => Some(l.finite_order()? * r.finite_order()?),
            _ => None,
        }
    }

    /// Whether the abelianization map loses only torsion, i.e. the group is
    /// (isomorphic to) `Z^k`. True for lattices and embedded lattices.
    pub fn is_free_abelian(&self) -> bool {
        match self {
            GroupSpec::IntegerLattice { .. } | GroupSpec::EmbeddedRealLattice(_) => true,
            GroupSpec::DirectProduct(l, r) => l.is_free_abelian() && r.is_free_abelian(),
            GroupSpec::Finite(f) => f.order() == 1,
            GroupSpec::HeisenbergZ => false,
        }
    }

    pub fn identity(&self) -> GroupElement {
        let mut key = SmallVec::new();
        self.write_identity(&mut key);
        GroupElement(key)
    }

    fn write_identity(&self, out: &mut SmallVec<[i64; 4]>) {
        match self {
            GroupSpec::Finite(f) => out.push(f.identity() as i64),
            GroupSpec::DirectProduct(l, r) => {
                l.write_identity(out);
                r.write_identity(out);
            }
            other => out.extend(std::iter::repeat_n(0, other.key_len())),
        }
    }

    /// Checks that a raw key encodes an element of this group.
    pub fn validate_key(&self, key: &[i64]) -> Result<()> {
        if key.len() != self.key_len() {
            return Err(Error::Encoding(format!(
                "key {key:?} has length {}, group expects {}",
                key.len(),
                self.key_len()
            )));
        }
        match self {
            GroupSpec::Finite(f) => {
                if key[0] < 0 || key[0] as usize >= f.order() {
                    return Err(Error::Encoding(format!(
                        "index {} outside finite group of order {}",
                        key[0],
                        f.order()
                    )));
                }
                Ok(())
            }
            GroupSpec::DirectProduct(l, r) => {
                let (a, b) = key.split_at(l.key_len());
                l.validate_key(a)?;
                r.validate_key(b)
            }
            _ => Ok(()),
        }
    }

    pub fn encode(&self, g: &GroupElement) -> Result<Vec<i64>> {
        self.validate_key(g.key())?;
        Ok(g.key().to_vec())
    }

    pub fn decode(&self, key: &[i64]) -> Result<GroupElement> {
        self.validate_key(key)?;
        Ok(GroupElement::from_slice(key))
    }

    pub fn multiply(&self, g: &GroupElement, h: &GroupElement) -> Result<GroupElement> {
        self.validate_key(g.key())?;
        self.validate_key(h.key())?;
        Ok(self.mul_unchecked(g, h))
    }

    pub fn inverse(&self, g: &GroupElement) -> Result<GroupElement> {
        self.validate_key(g.key())?;
        Ok(self.inv_unchecked(g))
    }

    /// `g h` without key validation; callers guarantee valid keys.
    pub fn mul_unchecked(&self, g: &GroupElement, h: &GroupElement) -> GroupElement {
        let mut out = SmallVec::with_capacity(g.0.len());
        self.mul_into(g.key(), h.key(), &mut out);
        GroupElement(out)
    }

    fn mul_into(&self, g: &[i64], h: &[i64], out: &mut SmallVec<[i64; 4]>) {
        match self {
            GroupSpec::IntegerLattice { .. } | GroupSpec::EmbeddedRealLattice(_) => {
                out.extend(g.iter().zip(h).map(|(a, b)| a + b));
            }
            GroupSpec::Finite(f) => out.push(f.mul(g[0] as usize, h[0] as usize) as i64),
            GroupSpec::HeisenbergZ => {
                out.push(g[0] + h[0]);
                out.push(g[1] + h[1]);
                out.push(g[2] + h[2] + g[0] * h[1]);
            }
            GroupSpec::DirectProduct(l, r) => {
                let k = l.key_len();
                l.mul_into(&g[..k], &h[..k], out);
                r.mul_into(&g[k..], &h[k..], out);
            }
        }
    }

    pub fn inv_unchecked(&self, g: &GroupElement) -> GroupElement {
        let mut out = SmallVec::with_capacity(g.0.len());
        self.inv_into(g.key(), &mut out);
        GroupElement(out)
    }

    fn inv_into(&self, g: &[i64], out: &mut SmallVec<[i64; 4]>) {
        match self {
            GroupSpec::IntegerLattice { .. } | GroupSpec::EmbeddedRealLattice(_) => {
                out.extend(g.iter().map(|a| -a))
            }
            GroupSpec::Finite(f) => out.push(f.inv(g[0] as usize) as i64),
            // (x,y,z)^{-1} = (-x, -y, -z + x y)
            GroupSpec::HeisenbergZ => {
                out.push(-g[0]);
                out.push(-g[1]);
                out.push(-g[2] + g[0] * g[1]);
            }
            GroupSpec::DirectProduct(l, r) => {
                let k = l.key_len();
                l.inv_into(&g[..k], out);
                r.inv_into(&g[k..], out);
            }
        }
    }

    /// Image in the torsion-free abelianization `Z^k`.
    pub fn abelianize(&self, g: &GroupElement) -> Vec<i64> {
        let mut out = Vec::with_capacity(self.abelian_rank());
        self.ab_into(g.key(), &mut out);
        out
    }

    fn ab_into(&self, g: &[i64], out: &mut Vec<i64>) {
        match self {
            GroupSpec::IntegerLattice { .. } | GroupSpec::EmbeddedRealLattice(_) => {
                out.extend_from_slice(g)
            }
            GroupSpec::Finite(_) => {}
            GroupSpec::HeisenbergZ => out.extend_from_slice(&g[..2]),
            GroupSpec::DirectProduct(l, r) => {
                let k = l.key_len();
                l.ab_into(&g[..k], out);
                r.ab_into(&g[k..], out);
            }
        }
    }

    /// Real embedding of an element of an embedded lattice.
    pub fn embed_real(&self, g: &GroupElement) -> Result<Vec<f64>> {
        match self {
            GroupSpec::EmbeddedRealLattice(b) => {
                self.validate_key(g.key())?;
                Ok(b.embed(g.key()))
            }
            _ => Err(Error::Unsupported(
                "real embedding requires an embedded real lattice".into(),
            )),
        }
    }

    pub fn real_basis(&self) -> Option<&RealBasis> {
        match self {
            GroupSpec::EmbeddedRealLattice(b) => Some(b),
            _ => None,
        }
    }

    /// Whether the semigroup generated by `gens` is the whole group.
    ///
    /// Abelian free part: the generated group must be everything and the
    /// positive cone must be all of `R^k` (a full cone makes the semigroup
    /// a group). Finite groups: closure. Heisenberg: in a nilpotent group a
    /// finitely generated semigroup whose abelian image is a group is itself
    /// a group, and a subgroup onto the abelianization is everything.
    pub fn semigroup_generated(&self, gens: &[GroupElement]) -> Result<bool> {
        match self {
            GroupSpec::IntegerLattice { .. } | GroupSpec::EmbeddedRealLattice(_) => {
                let dim = self.key_len();
                let vs: Vec<Vec<i64>> = gens.iter().map(|g| g.key().to_vec()).collect();
                Ok(lattice_semigroup_full(&vs, dim))
            }
            GroupSpec::Finite(f) => {
                let idx: Vec<usize> = gens.iter().map(|g| g.key()[0] as usize).collect();
                Ok(f.generated_subgroup(&idx).len() == f.order())
            }
            GroupSpec::HeisenbergZ => {
                let vs: Vec<Vec<i64>> = gens.iter().map(|g| self.abelianize(g)).collect();
                Ok(lattice_semigroup_full(&vs, 2))
            }
            GroupSpec::DirectProduct(_, _) => Err(Error::Unsupported(
                "semigroup generation is not decided for direct products".into(),
            )),
        }
    }
}

fn lattice_semigroup_full(vs: &[Vec<i64>], dim: usize) -> bool {
    let h = crate::lattice::hermite_rows(vs, dim);
    crate::lattice::index_of(&h, dim) == Some(1) && crate::lattice::cone_is_full(vs, dim)
}

/// All distinct elements of a finite list, in sorted key order.
pub fn distinct(elems: &[GroupElement]) -> Vec<GroupElement> {
    let set: FxHashSet<&GroupElement> = elems.iter().collect();
    let mut v: Vec<GroupElement> = set.into_iter().cloned().collect();
    v.sort();
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn el(v: &[i64]) -> GroupElement {
        GroupElement::from_slice(v)
    }

    fn s3() -> FiniteGroup {
        // permutations of {0,1,2} in lexicographic order, composed as (p q)(i) = p(q(i))
        let perms: Vec<[usize; 3]> = vec![
            [0, 1, 2],
            [0, 2, 1],
            [1, 0, 2],
            [1, 2, 0],
            [2, 0, 1],
            [2, 1, 0],
        ];
        let idx = |p: [usize; 3]| perms.iter().position(|&q| q == p).unwrap();
        let table = perms
            .iter()
            .map(|p| {
                perms
                    .iter()
                    .map(|q| idx([p[q[0]], p[q[1]], p[q[2]]]))
                    .collect()
            })
            .collect();
        FiniteGroup::new(table, 0).unwrap()
    }

    #[test]
    fn lattice_and_heisenberg_products() {
        let z2 = GroupSpec::lattice(2);
        assert_eq!(
            z2.multiply(&el(&[1, 2]), &el(&[3, -1])).unwrap(),
            el(&[4, 1])
        );
        let h = GroupSpec::HeisenbergZ;
        assert_eq!(
            h.multiply(&el(&[1, 0, 0]), &el(&[0, 1, 0])).unwrap(),
            el(&[1, 1, 1])
        );
        assert_eq!(
            h.multiply(&el(&[0, 1, 0]), &el(&[1, 0, 0])).unwrap(),
            el(&[1, 1, 0])
        );
    }

    #[test]
    fn inverses() {
        assert_eq!(GroupSpec::lattice(1).inverse(&el(&[5])).unwrap(), el(&[-5]));
        let h = GroupSpec::HeisenbergZ;
        assert_eq!(h.inverse(&el(&[1, 1, 1])).unwrap(), el(&[-1, -1, 0]));
        assert_eq!(GroupSpec::cyclic(3).inverse(&el(&[2])).unwrap(), el(&[1]));
    }

    #[test]
    fn abelianization() {
        let h = GroupSpec::HeisenbergZ;
        assert_eq!(h.abelianize(&el(&[1, 0, 5])), vec![1, 0]);
        let a = el(&[1, 0, 0]);
        let b = el(&[0, 1, 0]);
        let comm = [
            a.clone(),
            b.clone(),
            h.inv_unchecked(&a),
            h.inv_unchecked(&b),
        ]
        .iter()
        .fold(h.identity(), |acc, x| h.mul_unchecked(&acc, x));
        assert_eq!(comm, el(&[0, 0, 1]));
        assert_eq!(h.abelianize(&comm), vec![0, 0]);
        let p = GroupSpec::product(GroupSpec::cyclic(3), GroupSpec::lattice(1));
        assert_eq!(p.abelianize(&el(&[2, 7])), vec![7]);
    }

    #[test]
    fn real_embedding() {
        let spec = GroupSpec::EmbeddedRealLattice(
            RealBasis::new(1, vec![vec![1.0], vec![2f64.sqrt()]]).unwrap(),
        );
        let v = spec.embed_real(&el(&[2, -1])).unwrap();
        assert!((v[0] - 0.585786).abs() < 1e-6);
        assert_eq!(spec.embed_real(&el(&[0, 0])).unwrap(), vec![0.0]);
        let a = spec.embed_real(&el(&[1, 1])).unwrap()[0];
        let b = spec.embed_real(&el(&[3, -1])).unwrap()[0];
        assert!((a - 2.414214).abs() < 1e-6 && (b - 1.585786).abs() < 1e-6);
        assert!(GroupSpec::lattice(1).embed_real(&el(&[1])).is_err());
    }

    #[test]
    fn encoding_errors() {
        let h = GroupSpec::HeisenbergZ;
        assert!(matches!(
            h.multiply(&el(&[1, 2]), &el(&[0, 0, 0])),
            Err(Error::Encoding(_))
        ));
        assert!(GroupSpec::cyclic(3).decode(&[3]).is_err());
        assert!(GroupSpec::cyclic(3).decode(&[-1]).is_err());
    }

    #[test]
    fn bad_tables_are_rejected() {
        assert!(FiniteGroup::new(vec![vec![0, 1], vec![1, 1]], 0).is_err());
        assert!(FiniteGroup::new(vec![vec![0, 1], vec![1, 0]], 1).is_err());
        // a Latin square with identity that is not associative (order 5 loop)
        let loop5 = vec![
            vec![0, 1, 2, 3, 4],
            vec![1, 0, 3, 4, 2],
            vec![2, 4, 0, 1, 3],
            vec![3, 2, 4, 0, 1],
            vec![4, 3, 1, 2, 0],
        ];
        assert!(FiniteGroup::new(loop5, 0).is_err());
        let s = s3();
        assert!(!s.is_abelian());
        assert_eq!(s.generated_subgroup(&[1]).len(), 2);
        assert_eq!(s.normal_closure(&[1]).len(), 6);
        assert_eq!(s.normal_closure(&[3]).len(), 3);
    }

    #[test]
    fn semigroup_generation() {
        let z = GroupSpec::lattice(1);
        assert!(z.semigroup_generated(&[el(&[-1]), el(&[1])]).unwrap());
        assert!(!z.semigroup_generated(&[el(&[1]), el(&[0])]).unwrap());
        assert!(!z.semigroup_generated(&[el(&[-2]), el(&[2])]).unwrap());
        assert!(z.semigroup_generated(&[el(&[-2]), el(&[3])]).unwrap());
        let h = GroupSpec::HeisenbergZ;
        let gens = [
            el(&[1, 0, 0]),
            el(&[-1, 0, 0]),
            el(&[0, 1, 0]),
            el(&[0, -1, 0]),
        ];
        assert!(h.semigroup_generated(&gens).unwrap());
        let c3 = GroupSpec::cyclic(3);
        assert!(c3.semigroup_generated(&[el(&[1])]).unwrap());
        assert!(!c3.semigroup_generated(&[el(&[0])]).unwrap());
    }

    fn specs() -> Vec<GroupSpec> {
        vec![
            GroupSpec::lattice(1),
            GroupSpec::lattice(3),
            GroupSpec::cyclic(5),
            GroupSpec::Finite(s3()),
            GroupSpec::HeisenbergZ,
            GroupSpec::product(GroupSpec::Finite(s3()), GroupSpec::HeisenbergZ),
            GroupSpec::product(
                GroupSpec::product(GroupSpec::cyclic(3), GroupSpec::lattice(1)),
                GroupSpec::cyclic(2),
            ),
            GroupSpec::EmbeddedRealLattice(
                RealBasis::new(2, vec![vec![1.0, 0.0], vec![0.5, 3f64.sqrt()]]).unwrap(),
            ),
        ]
    }

    fn sample(spec: &GroupSpec, raw: &[i64]) -> GroupElement {
        let mut key = SmallVec::new();
        let mut it = raw.iter().copied().cycle();
        fill(spec, &mut it, &mut key);
        GroupElement(key)
    }

    fn fill(spec: &GroupSpec, it: &mut impl Iterator<Item = i64>, out: &mut SmallVec<[i64; 4]>) {
        match spec {
            GroupSpec::Finite(f) => out.push(it.next().unwrap().rem_euclid(f.order() as i64)),
            GroupSpec::DirectProduct(l, r) => {
                fill(l, it, out);
                fill(r, it, out);
            }
            other => {
                for _ in 0..other.key_len() {
                    out.push(it.next().unwrap());
                }
            }
        }
    }

    fn raw() -> impl Strategy<Value = Vec<i64>> {
        prop::collection::vec(-50i64..50, 8)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]

        #[test]
        fn group_axioms(a in raw(), b in raw(), c in raw()) {
            for spec in specs() {
                let (g, h, k) = (sample(&spec, &a), sample(&spec, &b), sample(&spec, &c));
                let e = spec.identity();
                let gh_k = spec.mul_unchecked(&spec.mul_unchecked(&g, &h), &k);
                let g_hk = spec.mul_unchecked(&g, &spec.mul_unchecked(&h, &k));
                prop_assert_eq!(gh_k, g_hk);
                prop_assert_eq!(spec.mul_unchecked(&g, &e), g.clone());
                prop_assert_eq!(spec.mul_unchecked(&e, &g), g.clone());
                prop_assert_eq!(spec.mul_unchecked(&g, &spec.inv_unchecked(&g)), e.clone());
                prop_assert_eq!(spec.mul_unchecked(&spec.inv_unchecked(&g), &g), e);
                let mut sum = spec.abelianize(&g);
                for (s, t) in sum.iter_mut().zip(spec.abelianize(&h)) {
                    *s += t;
                }
                prop_assert_eq!(spec.abelianize(&spec.mul_unchecked(&g, &h)), sum);
                let key = spec.encode(&g).unwrap();
                prop_assert_eq!(spec.decode(&key).unwrap(), g.clone());
                if spec.real_basis().is_some() {
                    let lhs = spec.embed_real(&spec.mul_unchecked(&g, &h)).unwrap();
                    let rg = spec.embed_real(&g).unwrap();
                    let rh = spec.embed_real(&h).unwrap();
                    for i in 0..lhs.len() {
                        prop_assert!((lhs[i] - rg[i] - rh[i]).abs() <= 1e-12);
                    }
                }
            }
        }
    }
}
