//! Mass tables over (chain state x group element) and the transition kernels
//! that advance them.
//!
//! Three storage backends are selected from the group:
//!
//! * dense stride-indexed boxes for `Z^d` and embedded lattices,
//! * an `(x, y)` box of sparse `z`-fibres for the Heisenberg group,
//! * hash maps for finite groups and products.
//!
//! A step is always a gather: each output cell pulls from the input cells
//! that feed it, so output shards are independent and run in parallel.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::One;
use rayon::prelude::*;
use rustc_hash::FxHashMap;
use smallvec::SmallVec;

use crate::arith::Arith;
use crate::error::{Error, Result};
use crate::groups::{GroupElement, GroupSpec};

/// Default cap on stored cells (summed over states).
pub const DEFAULT_MAX_CELLS: usize = 200_000_000;

/// One weighted transition `from -> to` that left-multiplies the group
/// coordinate by `increment`.
#[derive(Clone, Debug)]
pub struct Move<W> {
    pub from: usize,
    pub to: usize,
    pub weight: W,
    pub increment: GroupElement,
}

/// A transition kernel with integer-encoded weights over a common scale.
#[derive(Clone, Debug)]
pub struct Kernel<W> {
    pub nstates: usize,
    pub moves: Vec<Move<W>>,
    pub scale: BigUint,
}

impl<W: Arith> Kernel<W> {
    /// Builds a kernel from exact entries `(from, to, weight, increment)`.
    /// Entries sharing `(from, to, increment)` are merged and zero weights
    /// dropped.
    pub fn new(nstates: usize, entries: Vec<(usize, usize, BigRational, GroupElement)>) -> Self {
        let mut merged: FxHashMap<(usize, usize, GroupElement), BigRational> = FxHashMap::default();
        let mut order = Vec::new();
        for (from, to, w, inc) in entries {
            assert!(from < nstates && to < nstates, "kernel state out of range");
            let key = (from, to, inc);
            match merged.get_mut(&key) {
                Some(acc) => *acc += w,
                None => {
                    order.push(key.clone());
                    merged.insert(key, w);
                }
            }
        }
        let keys: Vec<(usize, usize, GroupElement)> = order
            .into_iter()
            .filter(|k| !num_traits::Zero::is_zero(&merged[k]))
            .collect();
        let weights: Vec<BigRational> = keys.iter().map(|k| merged[k].clone()).collect();
        let (enc, scale) = W::encode(&weights);
        let moves = keys
            .into_iter()
            .zip(enc)
            .map(|((from, to, increment), weight)| Move {
                from,
                to,
                weight,
                increment,
            })
            .collect();
        Kernel {
            nstates,
            moves,
            scale,
        }
    }
}

#[derive(Clone, Debug)]
enum Store<W> {
    Dense(Dense<W>),
    Heis(Heis<W>),
    Sparse(Vec<FxHashMap<GroupElement, W>>),
}

#[derive(Clone, Debug)]
struct Dense<W> {
    lo: Vec<i64>,
    ext: Vec<usize>,
    /// An empty vector means the state carries no mass.
    data: Vec<Vec<W>>,
}

#[derive(Clone, Debug)]
struct Fiber<W> {
    z0: i64,
    vals: Vec<W>,
}

#[derive(Clone, Debug)]
struct Heis<W> {
    lo: [i64; 2],
    ext: [usize; 2],
    /// `cells[state][ix * ext[1] + iy]`; an empty outer vector means no mass.
    cells: Vec<Vec<Fiber<W>>>,
}

/// A finitely supported measure on (state x group) at step `n`. Stored
/// values are numerators over `scale` (always 1 for floats).
#[derive(Clone, Debug)]
pub struct MassTable<W> {
    n: usize,
    group: GroupSpec,
    nstates: usize,
    scale: BigUint,
    store: Store<W>,
    discarded: f64,
    max_cells: usize,
}

fn uses_dense(group: &GroupSpec) -> bool {
    matches!(group, GroupSpec::IntegerLattice { dim } if *dim >= 1)
        || matches!(group, GroupSpec::EmbeddedRealLattice(_))
}

impl<W: Arith> MassTable<W> {
    /// Unit mass at `(state, e)` at step 0.
    pub fn seed(group: &GroupSpec, nstates: usize, state: usize) -> Self {
        Self::seed_at(group, nstates, state, &group.identity())
    }

    /// Unit mass at `(state, g)` at step 0.
    pub fn seed_at(group: &GroupSpec, nstates: usize, state: usize, g: &GroupElement) -> Self {
        assert!(state < nstates);
        let store = if uses_dense(group) {
            let mut data = vec![Vec::new(); nstates];
            data[state] = vec![W::one()];
            Store::Dense(Dense {
                lo: g.key().to_vec(),
                ext: vec![1; group.key_len()],
                data,
            })
        } else if matches!(group, GroupSpec::HeisenbergZ) {
            let mut cells = vec![Vec::new(); nstates];
            cells[state] = vec![Fiber {
                z0: g.key()[2],
                vals: vec![W::one()],
            }];
            Store::Heis(Heis {
                lo: [g.key()[0], g.key()[1]],
                ext: [1, 1],
                cells,
            })
        } else {
            let mut maps = vec![FxHashMap::default(); nstates];
            maps[state].insert(g.clone(), W::one());
            Store::Sparse(maps)
        };
        MassTable {
            n: 0,
            group: group.clone(),
            nstates,
            scale: BigUint::one(),
            store,
            discarded: 0.0,
            max_cells: DEFAULT_MAX_CELLS,
        }
    }

    pub fn with_max_cells(mut self, cap: usize) -> Self {
        self.max_cells = cap;
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn group(&self) -> &GroupSpec {
        &self.group
    }

    pub fn nstates(&self) -> usize {
        self.nstates
    }

    pub fn scale(&self) -> &BigUint {
        &self.scale
    }

    /// Mass removed by pruning so far (an upper bound on any error it caused).
    pub fn discarded(&self) -> f64 {
        self.discarded
    }

    /// Advances one step under `kernel`.
    pub fn step(&self, kernel: &Kernel<W>) -> Result<Self> {
        assert_eq!(
            kernel.nstates, self.nstates,
            "kernel and table disagree on states"
        );
        let store = match &self.store {
            Store::Dense(d) => {
                Store::Dense(step_dense(d, kernel, self.nstates, self.max_cells, self.n)?)
            }
            Store::Heis(h) => {
                Store::Heis(step_heis(h, kernel, self.nstates, self.max_cells, self.n)?)
            }
            Store::Sparse(s) => Store::Sparse(step_sparse(
                s,
                kernel,
                &self.group,
                self.nstates,
                self.max_cells,
                self.n,
            )?),
        };
        Ok(MassTable {
            n: self.n + 1,
            group: self.group.clone(),
            nstates: self.nstates,
            scale: &self.scale * &kernel.scale,
            store,
            discarded: self.discarded,
            max_cells: self.max_cells,
        })
    }

    /// Number of allocated cells (an upper bound on the support size).
    pub fn cells(&self) -> usize {
        match &self.store {
            Store::Dense(d) => d.data.iter().map(|v| v.len()).sum(),
            Store::Heis(h) => h
                .cells
                .iter()
                .flat_map(|c| c.iter().map(|f| f.vals.len()))
                .sum(),
            Store::Sparse(s) => s.iter().map(|m| m.len()).sum(),
        }
    }

    /// Raw numerator stored at `(state, g)`.
    pub fn raw(&self, state: usize, g: &[i64]) -> Option<&W> {
        match &self.store {
            Store::Dense(d) => {
                let v = &d.data[state];
                if v.is_empty() {
                    return None;
                }
                dense_index(&d.lo, &d.ext, g).map(|i| &v[i])
            }
            Store::Heis(h) => {
                let c = &h.cells[state];
                if c.is_empty() {
                    return None;
                }
                let (ix, iy) = (g[0] - h.lo[0], g[1] - h.lo[1]);
                if ix < 0 || iy < 0 || ix as usize >= h.ext[0] || iy as usize >= h.ext[1] {
                    return None;
                }
                let f = &c[ix as usize * h.ext[1] + iy as usize];
                let iz = g[2] - f.z0;
                if iz < 0 || iz as usize >= f.vals.len() {
                    None
                } else {
                    Some(&f.vals[iz as usize])
                }
            }
            Store::Sparse(s) => s[state].get(&GroupElement::from_slice(g)),
        }
    }

    /// Exact (or float) mass at `(state, g)`.
    pub fn state_mass(&self, state: usize, g: &GroupElement) -> W::Value {
        match self.raw(state, g.key()) {
            Some(w) => w.value(&self.scale),
            None => <W::Value as crate::arith::Value>::zero(),
        }
    }

    /// Raw numerator of `sum_s W(s, g)`.
    pub fn raw_group_mass(&self, g: &GroupElement) -> W {
        let mut acc = W::zero();
        for s in 0..self.nstates {
            if let Some(w) = self.raw(s, g.key()) {
                acc.add_assign(w);
            }
        }
        acc
    }

    /// `mu^n(g)`: the group marginal at `g`.
    pub fn group_mass(&self, g: &GroupElement) -> W::Value {
        self.raw_group_mass(g).value(&self.scale)
    }

    /// Visits every allocated cell with a nonzero value.
    pub fn for_each(&self, mut f: impl FnMut(usize, &[i64], &W)) {
        match &self.store {
            Store::Dense(d) => {
                let dim = d.ext.len();
                for (s, v) in d.data.iter().enumerate() {
                    let mut key: SmallVec<[i64; 4]> = SmallVec::from_slice(&d.lo);
                    for w in v.iter() {
                        if !w.is_zero() {
                            f(s, &key, w);
                        }
                        // increment mixed-radix coordinates, last dimension fastest
                        for j in (0..dim).rev() {
                            key[j] += 1;
                            if ((key[j] - d.lo[j]) as usize) < d.ext[j] {
                                break;
                            }
                            key[j] = d.lo[j];
                        }
                    }
                }
            }
            Store::Heis(h) => {
                for (s, c) in h.cells.iter().enumerate() {
                    for (idx, fib) in c.iter().enumerate() {
                        let x = h.lo[0] + (idx / h.ext[1]) as i64;
                        let y = h.lo[1] + (idx % h.ext[1]) as i64;
                        for (iz, w) in fib.vals.iter().enumerate() {
                            if !w.is_zero() {
                                f(s, &[x, y, fib.z0 + iz as i64], w);
                            }
                        }
                    }
                }
            }
            Store::Sparse(maps) => {
                for (s, m) in maps.iter().enumerate() {
                    for (g, w) in m {
                        if !w.is_zero() {
                            f(s, g.key(), w);
                        }
                    }
                }
            }
        }
    }

    /// Group marginal as raw numerators, sorted by key.
    pub fn raw_group_marginal(&self) -> Vec<(GroupElement, W)> {
        let mut acc: FxHashMap<GroupElement, W> = FxHashMap::default();
        self.for_each(|_, key, w| {
            acc.entry(GroupElement::from_slice(key))
                .or_insert_with(W::zero)
                .add_assign(w);
        });
        let mut v: Vec<(GroupElement, W)> = acc.into_iter().filter(|(_, w)| !w.is_zero()).collect();
        v.sort_by(|a, b| a.0.cmp(&b.0));
        v
    }

    /// Group marginal `g -> mu^n(g)`, sorted by key.
    pub fn group_marginal(&self) -> Vec<(GroupElement, W::Value)> {
        self.raw_group_marginal()
            .into_iter()
            .map(|(g, w)| (g, w.value(&self.scale)))
            .collect()
    }

    /// Full table `(state, g) -> mass`, sorted.
    pub fn entries(&self) -> Vec<(usize, GroupElement, W::Value)> {
        let mut v = Vec::new();
        self.for_each(|s, key, w| v.push((s, GroupElement::from_slice(key), w.value(&self.scale))));
        v.sort_by(|a, b| (a.0, &a.1).cmp(&(b.0, &b.1)));
        v
    }

    /// State marginal as raw numerators.
    pub fn raw_state_marginal(&self) -> Vec<W> {
        let mut acc = vec![W::zero(); self.nstates];
        self.for_each(|s, _, w| acc[s].add_assign(w));
        acc
    }

    pub fn state_marginal(&self) -> Vec<W::Value> {
        self.raw_state_marginal()
            .iter()
            .map(|w| w.value(&self.scale))
            .collect()
    }

    pub fn total(&self) -> W::Value {
        let mut acc = W::zero();
        self.for_each(|_, _, w| acc.add_assign(w));
        acc.value(&self.scale)
    }

    /// Sets the mass at `g` to zero in every state and returns what was removed.
    pub fn remove(&mut self, g: &GroupElement) -> W::Value {
        let mut removed = W::zero();
        for s in 0..self.nstates {
            if let Some(slot) = self.raw_mut(s, g.key()) {
                removed.add_assign(slot);
                *slot = W::zero();
            }
        }
        removed.value(&self.scale)
    }

    fn raw_mut(&mut self, state: usize, g: &[i64]) -> Option<&mut W> {
        match &mut self.store {
            Store::Dense(d) => {
                if d.data[state].is_empty() {
                    return None;
                }
                let i = dense_index(&d.lo, &d.ext, g)?;
                Some(&mut d.data[state][i])
            }
            Store::Heis(h) => {
                if h.cells[state].is_empty() {
                    return None;
                }
                let (ix, iy) = (g[0] - h.lo[0], g[1] - h.lo[1]);
                if ix < 0 || iy < 0 || ix as usize >= h.ext[0] || iy as usize >= h.ext[1] {
                    return None;
                }
                let f = &mut h.cells[state][ix as usize * h.ext[1] + iy as usize];
                let iz = g[2] - f.z0;
                if iz < 0 || iz as usize >= f.vals.len() {
                    None
                } else {
                    Some(&mut f.vals[iz as usize])
                }
            }
            Store::Sparse(s) => s[state].get_mut(&GroupElement::from_slice(g)),
        }
    }

    /// Zeroes every entry whose value is below `eps` and adds the removed
    /// mass to [`discarded`](Self::discarded).
    pub fn prune(&mut self, eps: f64) {
        let scale = self.scale.clone();
        let mut dropped = 0.0;
        let mut visit = |w: &mut W| {
            if !w.is_zero() {
                let v = w.approx(&scale);
                if v < eps {
                    dropped += v;
                    *w = W::zero();
                }
            }
        };
        match &mut self.store {
            Store::Dense(d) => d.data.iter_mut().flatten().for_each(&mut visit),
            Store::Heis(h) => h
                .cells
                .iter_mut()
                .flatten()
                .flat_map(|f| f.vals.iter_mut())
                .for_each(&mut visit),
            Store::Sparse(s) => {
                for m in s.iter_mut() {
                    m.values_mut().for_each(&mut visit);
                    m.retain(|_, w| !w.is_zero());
                }
            }
        }
        self.discarded += dropped;
    }
}

fn dense_index(lo: &[i64], ext: &[usize], g: &[i64]) -> Option<usize> {
    let mut idx = 0usize;
    for j in 0..lo.len() {
        let off = g[j] - lo[j];
        if off < 0 || off as usize >= ext[j] {
            return None;
        }
        idx = idx * ext[j] + off as usize;
    }
    Some(idx)
}

fn bounds<W>(kernel: &Kernel<W>, dims: usize) -> (Vec<i64>, Vec<i64>) {
    let mut lo = vec![i64::MAX; dims];
    let mut hi = vec![i64::MIN; dims];
    for mv in &kernel.moves {
        for j in 0..dims {
            lo[j] = lo[j].min(mv.increment.key()[j]);
            hi[j] = hi[j].max(mv.increment.key()[j]);
        }
    }
    if kernel.moves.is_empty() {
        lo.iter_mut().for_each(|x| *x = 0);
        hi.iter_mut().for_each(|x| *x = 0);
    }
    (lo, hi)
}

fn guard(cells: usize, cap: usize, n: usize) -> Result<()> {
    if cells > cap {
        Err(Error::resource("mass table cells", cap as u64, Some(n)))
    } else {
        Ok(())
    }
}

fn step_dense<W: Arith>(
    d: &Dense<W>,
    kernel: &Kernel<W>,
    nstates: usize,
    cap: usize,
    n: usize,
) -> Result<Dense<W>> {
    let dim = d.ext.len();
    let (ilo, ihi) = bounds(kernel, dim);
    let lo2: Vec<i64> = d.lo.iter().zip(&ilo).map(|(a, b)| a + b).collect();
    let ext2: Vec<usize> = (0..dim)
        .map(|j| d.ext[j] + (ihi[j] - ilo[j]) as usize)
        .collect();
    let total: usize = ext2.iter().product();
    let live_targets: Vec<bool> = (0..nstates)
        .map(|t| {
            kernel
                .moves
                .iter()
                .any(|mv| mv.to == t && !d.data[mv.from].is_empty())
        })
        .collect();
    guard(total * live_targets.iter().filter(|&&b| b).count(), cap, n)?;

    let row_len = ext2[dim - 1];
    let nrows = total / row_len;
    let seg = if nrows >= 64 {
        row_len
    } else {
        (row_len.div_ceil(64)).max(512)
    };
    // input strides
    let mut istride = vec![1usize; dim];
    for j in (0..dim.saturating_sub(1)).rev() {
        istride[j] = istride[j + 1] * d.ext[j + 1];
    }
    let mut data = Vec::with_capacity(nstates);
    for (t, live) in live_targets.iter().enumerate() {
        if !live {
            data.push(Vec::new());
            continue;
        }
        let moves: Vec<&Move<W>> = kernel
            .moves
            .iter()
            .filter(|mv| mv.to == t && !d.data[mv.from].is_empty())
            .collect();
        let mut out = vec![W::zero(); total];
        out.par_chunks_mut(row_len)
            .enumerate()
            .for_each(|(r, row)| {
                // absolute coordinates of this output row (all but the last dimension)
                let mut coords: SmallVec<[i64; 4]> = SmallVec::from_elem(0, dim.saturating_sub(1));
                let mut rem = r;
                for j in (0..dim - 1).rev() {
                    coords[j] = lo2[j] + (rem % ext2[j]) as i64;
                    rem /= ext2[j];
                }
                row.par_chunks_mut(seg).enumerate().for_each(|(si, cells)| {
                    let c_start = si * seg;
                    let c_end = c_start + cells.len();
                    for mv in &moves {
                        let inc = mv.increment.key();
                        let mut base = 0usize;
                        let mut inside = true;
                        for j in 0..dim - 1 {
                            let y = coords[j] - inc[j] - d.lo[j];
                            if y < 0 || y as usize >= d.ext[j] {
                                inside = false;
                                break;
                            }
                            base += y as usize * istride[j];
                        }
                        if !inside {
                            continue;
                        }
                        let delta = (inc[dim - 1] - ilo[dim - 1]) as usize;
                        let from = delta.max(c_start);
                        let to = (delta + d.ext[dim - 1]).min(c_end);
                        if from >= to {
                            continue;
                        }
                        let src = &d.data[mv.from][base + from - delta..base + to - delta];
                        for (o, s) in cells[from - c_start..to - c_start].iter_mut().zip(src) {
                            o.add_product(s, &mv.weight);
                        }
                    }
                });
            });
        data.push(out);
    }
    Ok(Dense {
        lo: lo2,
        ext: ext2,
        data,
    })
}

fn step_heis<W: Arith>(
    h: &Heis<W>,
    kernel: &Kernel<W>,
    nstates: usize,
    cap: usize,
    n: usize,
) -> Result<Heis<W>> {
    let (ilo, ihi) = bounds(kernel, 2);
    let lo2 = [h.lo[0] + ilo[0], h.lo[1] + ilo[1]];
    let ext2 = [
        h.ext[0] + (ihi[0] - ilo[0]) as usize,
        h.ext[1] + (ihi[1] - ilo[1]) as usize,
    ];
    let ncells = ext2[0] * ext2[1];
    let mut cells = Vec::with_capacity(nstates);
    let mut stored = 0usize;
    for t in 0..nstates {
        let moves: Vec<&Move<W>> = kernel
            .moves
            .iter()
            .filter(|mv| mv.to == t && !h.cells[mv.from].is_empty())
            .collect();
        if moves.is_empty() {
            cells.push(Vec::new());
            continue;
        }
        let out: Vec<Fiber<W>> = (0..ncells)
            .into_par_iter()
            .map(|idx| {
                let x = lo2[0] + (idx / ext2[1]) as i64;
                let y = lo2[1] + (idx % ext2[1]) as i64;
                // (a,b,c)(x0,y0,z) = (x0+a, y0+b, z+c+a*y0)
                let mut sources: SmallVec<[(&Fiber<W>, i64, &W); 8]> = SmallVec::new();
                for mv in &moves {
                    let inc = mv.increment.key();
                    let (x0, y0) = (x - inc[0], y - inc[1]);
                    let (ix, iy) = (x0 - h.lo[0], y0 - h.lo[1]);
                    if ix < 0 || iy < 0 || ix as usize >= h.ext[0] || iy as usize >= h.ext[1] {
                        continue;
                    }
                    let f = &h.cells[mv.from][ix as usize * h.ext[1] + iy as usize];
                    if f.vals.is_empty() {
                        continue;
                    }
                    sources.push((f, inc[2] + inc[0] * y0, &mv.weight));
                }
                if sources.is_empty() {
                    return Fiber {
                        z0: 0,
                        vals: Vec::new(),
                    };
                }
                let zlo = sources.iter().map(|(f, s, _)| f.z0 + s).min().unwrap();
                let zhi = sources
                    .iter()
                    .map(|(f, s, _)| f.z0 + s + f.vals.len() as i64)
                    .max()
                    .unwrap();
                let mut vals = vec![W::zero(); (zhi - zlo) as usize];
                for (f, s, w) in sources {
                    let off = (f.z0 + s - zlo) as usize;
                    for (o, v) in vals[off..off + f.vals.len()].iter_mut().zip(&f.vals) {
                        o.add_product(v, w);
                    }
                }
                Fiber { z0: zlo, vals }
            })
            .collect();
        stored += out.iter().map(|f| f.vals.len()).sum::<usize>();
        guard(stored, cap, n)?;
        cells.push(out);
    }
    Ok(Heis {
        lo: lo2,
        ext: ext2,
        cells,
    })
}

fn step_sparse<W: Arith>(
    maps: &[FxHashMap<GroupElement, W>],
    kernel: &Kernel<W>,
    group: &GroupSpec,
    nstates: usize,
    cap: usize,
    n: usize,
) -> Result<Vec<FxHashMap<GroupElement, W>>> {
    let out: Vec<FxHashMap<GroupElement, W>> = (0..nstates)
        .into_par_iter()
        .map(|t| {
            let mut acc: FxHashMap<GroupElement, W> = FxHashMap::default();
            for mv in kernel.moves.iter().filter(|mv| mv.to == t) {
                for (g, w) in &maps[mv.from] {
                    let key = group.mul_unchecked(&mv.increment, g);
                    acc.entry(key)
                        .or_insert_with(W::zero)
                        .add_product(w, &mv.weight);
                }
            }
            acc
        })
        .collect();
    guard(out.iter().map(|m| m.len()).sum(), cap, n)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{ratio, Exact};

    fn el(v: &[i64]) -> GroupElement {
        GroupElement::from_slice(v)
    }

    fn trinomial<W: Arith>(incs: &[&[i64]]) -> Kernel<W> {
        let m = incs.len() as i64;
        Kernel::new(1, incs.iter().map(|i| (0, 0, ratio(1, m), el(i))).collect())
    }

    #[test]
    fn dense_matches_sparse_on_plane() {
        let incs: [&[i64]; 3] = [&[1, 0], &[0, 1], &[-1, -1]];
        let z2 = GroupSpec::lattice(2);
        let fin = GroupSpec::product(GroupSpec::lattice(1), GroupSpec::cyclic(1));
        assert!(matches!(fin, GroupSpec::DirectProduct(..)));
        let k: Kernel<Exact> = trinomial(&incs);
        let mut dense = MassTable::<Exact>::seed(&z2, 1, 0);
        // force the sparse backend with the same law on Z^2 x {e}
        let spec = GroupSpec::product(z2.clone(), GroupSpec::cyclic(1));
        let incs3: Vec<Vec<i64>> = incs.iter().map(|i| vec![i[0], i[1], 0]).collect();
        let k3: Kernel<Exact> = Kernel::new(
            1,
            incs3.iter().map(|i| (0, 0, ratio(1, 3), el(i))).collect(),
        );
        let mut sparse = MassTable::<Exact>::seed(&spec, 1, 0);
        for _ in 0..6 {
            dense = dense.step(&k).unwrap();
            sparse = sparse.step(&k3).unwrap();
        }
        let a: Vec<_> = dense
            .group_marginal()
            .into_iter()
            .map(|(g, v)| (g.key().to_vec(), v))
            .collect();
        let b: Vec<_> = sparse
            .group_marginal()
            .into_iter()
            .map(|(g, v)| (g.key()[..2].to_vec(), v))
            .collect();
        assert_eq!(a, b);
        assert_eq!(dense.total(), ratio(1, 1));
    }

    #[test]
    fn heisenberg_fibres_match_sparse() {
        let h = GroupSpec::HeisenbergZ;
        let gens: [&[i64]; 4] = [&[1, 0, 0], &[-1, 0, 0], &[0, 1, 0], &[0, -1, 0]];
        let weights = [ratio(4, 10), ratio(1, 10), ratio(3, 10), ratio(2, 10)];
        let entries: Vec<_> = gens
            .iter()
            .zip(&weights)
            .map(|(g, w)| (0, 0, w.clone(), el(g)))
            .collect();
        let k: Kernel<Exact> = Kernel::new(1, entries.clone());
        let spec = GroupSpec::product(h.clone(), GroupSpec::cyclic(1));
        let entries3: Vec<_> = entries
            .iter()
            .map(|(a, b, w, g)| {
                (
                    *a,
                    *b,
                    w.clone(),
                    el(&[g.key()[0], g.key()[1], g.key()[2], 0]),
                )
            })
            .collect();
        let k3: Kernel<Exact> = Kernel::new(1, entries3);
        let mut fib = MassTable::<Exact>::seed(&h, 1, 0);
        let mut sp = MassTable::<Exact>::seed(&spec, 1, 0);
        for _ in 0..5 {
            fib = fib.step(&k).unwrap();
            sp = sp.step(&k3).unwrap();
        }
        let a: Vec<_> = fib
            .group_marginal()
            .into_iter()
            .map(|(g, v)| (g.key().to_vec(), v))
            .collect();
        let b: Vec<_> = sp
            .group_marginal()
            .into_iter()
            .map(|(g, v)| (g.key()[..3].to_vec(), v))
            .collect();
        assert_eq!(a, b);
    }

    #[test]
    fn two_state_kernel_and_removal() {
        let z = GroupSpec::lattice(1);
        let entries = vec![
            (0, 0, ratio(1, 2), el(&[1])),
            (0, 1, ratio(1, 2), el(&[-1])),
            (1, 0, ratio(1, 4), el(&[1])),
            (1, 1, ratio(3, 4), el(&[-1])),
        ];
        let k: Kernel<f64> = Kernel::new(2, entries);
        let mut t = MassTable::<f64>::seed(&z, 2, 0);
        for _ in 0..7 {
            t = t.step(&k).unwrap();
        }
        assert!((t.total() - 1.0).abs() < 1e-14);
        let e = z.identity();
        assert_eq!(t.group_mass(&e), 0.0);
        let g = el(&[1]);
        let before = t.group_mass(&g);
        let removed = t.remove(&g);
        assert_eq!(before, removed);
        assert_eq!(t.group_mass(&g), 0.0);
    }

    #[test]
    fn guard_trips_with_completed_step() {
        let z = GroupSpec::lattice(1);
        let k: Kernel<f64> = trinomial(&[&[-1], &[0], &[1]]);
        let mut t = MassTable::<f64>::seed(&z, 1, 0).with_max_cells(7);
        let mut last = Ok(());
        for _ in 0..10 {
            match t.step(&k) {
                Ok(next) => t = next,
                Err(e) => {
                    last = Err(e);
                    break;
                }
            }
        }
        assert_eq!(last, Err(Error::resource("mass table cells", 7, Some(3))));
    }

    #[test]
    fn pruning_tracks_discarded_mass() {
        let z = GroupSpec::lattice(1);
        let k: Kernel<f64> = trinomial(&[&[-1], &[0], &[1]]);
        let mut t = MassTable::<f64>::seed(&z, 1, 0);
        for _ in 0..4 {
            t = t.step(&k).unwrap();
        }
        t.prune(0.02);
        // the two extreme atoms have mass 1/81 each
        assert!((t.discarded() - 2.0 / 81.0).abs() < 1e-15);
        assert!((t.total() + t.discarded() - 1.0).abs() < 1e-14);
    }
}
