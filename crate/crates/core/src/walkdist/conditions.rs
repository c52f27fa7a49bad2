//! Instance checks of the standing conditions on finite parameter grids.
//!
//! Conditioning on a cylinder `b` of length `n'` uses the decomposition
//! `psi_n(x) = psi_{n-n'}(T^{n'} x) psi_{n'}(b)` together with the Markov
//! property: given `b`, the chain restarts from the state of `b`.

use rustc_hash::FxHashMap;

use crate::arith::{Arith, Value};
use crate::error::{Error, Result};
use crate::groups::{GroupElement, GroupSpec};

use super::windows::{require_basis, window_raw, Window};
use super::{MassTable, Walk};

/// Default cap on the number of cylinders enumerated per check.
pub const DEFAULT_MAX_CYLINDERS: usize = 1 << 20;

#[derive(Clone, Debug, PartialEq)]
pub struct CylinderRow {
    pub offset: usize,
    pub word: Vec<usize>,
    /// Conditional mass `mu(b ∩ {...}) / mu(b)`.
    pub conditional: f64,
    /// `conditional / reference`.
    pub ratio: f64,
    /// `|ratio - 1|`.
    pub deviation: f64,
    /// Smallest `eps` with `ratio` in `[1/(1+eps), 1+eps]`.
    pub epsilon: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConditionReport {
    pub condition: &'static str,
    pub params: Vec<(String, String)>,
    /// The unconditioned quantity (`mu^n(g)`, `mu^n(E g)`, or the CM
    /// right-hand side).
    pub reference: f64,
    /// `(n', worst deviation over b in alpha_{n'})`.
    pub per_offset: Vec<(usize, f64)>,
    pub best_offset: usize,
    /// Cylinder table for the best offset.
    pub rows: Vec<CylinderRow>,
    /// Maximum deviation over `rows`.
    pub worst_deviation: f64,
    pub worst_epsilon: f64,
    /// Mass dropped by pruning; an additive bound on every deviation above.
    pub discarded: f64,
    /// For CM: whether LHS <= RHS (within rounding).
    pub holds: Option<bool>,
}

fn words(m: usize, len: usize) -> impl Iterator<Item = Vec<usize>> {
    let count = m.pow(len as u32);
    (0..count).map(move |mut c| {
        let mut w = vec![0; len];
        for slot in w.iter_mut().rev() {
            *slot = c % m;
            c /= m;
        }
        w
    })
}

/// `psi_{|w|}(w) = psi(w_{last}) ... psi(w_0)`.
fn word_value(group: &GroupSpec, values: &[GroupElement], word: &[usize]) -> GroupElement {
    word.iter().fold(group.identity(), |acc, &s| {
        group.mul_unchecked(&values[s], &acc)
    })
}

fn check_grid(n0: usize, n1: usize, n: usize) -> Result<()> {
    if !(n0 >= 1 && n1 >= n0 && n > n1) {
        return Err(Error::validation(format!(
            "condition grid needs n > n1 >= n0 >= 1, got n0 = {n0}, n1 = {n1}, n = {n}"
        )));
    }
    Ok(())
}

fn cylinder_budget(m: usize, n0: usize, n1: usize, cap: usize) -> Result<()> {
    let mut total: usize = 0;
    for len in n0..=n1 {
        total = m
            .checked_pow(len as u32)
            .and_then(|c| total.checked_add(c))
            .filter(|&t| t <= cap)
            .ok_or_else(|| Error::resource("condition cylinders", cap as u64, None))?;
    }
    Ok(())
}

/// For each `n'` and chain state, the conditional tables at step `n - n'`
/// are visited once; `visit(n', state, table)` reads what it needs.
fn conditional_tables<W: Arith>(
    walk: &Walk<'_, W>,
    n0: usize,
    n1: usize,
    n: usize,
    mut visit: impl FnMut(usize, usize, &MassTable<W>),
) -> Result<f64> {
    let m = walk.system.alphabet();
    let mut states: Vec<usize> = Vec::new();
    for len in n0..=n1 {
        for w in words(m, len.min(walk.system.order())) {
            // all words of length n' reach every state of length min(n', k)
            let s = walk.state_after(&w);
            if !states.contains(&s) {
                states.push(s);
            }
        }
    }
    let mut discarded: f64 = 0.0;
    for &state in &states {
        let len = walk.graph.words[state].len();
        let mut t = MassTable::seed(walk.cocycle.group(), walk.nstates(), state)
            .with_max_cells(walk.options.max_cells);
        for step in 0..=(n - n0) {
            let offset = n - step;
            if offset <= n1 && offset >= n0 {
                // the state of b has length min(n', k)
                if len == offset.min(walk.system.order()) {
                    visit(offset, state, &t);
                }
            }
            if step < n - n0 {
                t = walk.advance(&t)?;
            }
        }
        discarded = discarded.max(t.discarded());
    }
    Ok(discarded)
}

fn finish(
    condition: &'static str,
    params: Vec<(String, String)>,
    reference: f64,
    mut by_offset: FxHashMap<usize, Vec<CylinderRow>>,
    n0: usize,
    n1: usize,
    discarded: f64,
) -> ConditionReport {
    let mut per_offset = Vec::new();
    for off in n0..=n1 {
        let rows = by_offset.get(&off).map(|r| r.as_slice()).unwrap_or(&[]);
        per_offset.push((off, rows.iter().map(|r| r.deviation).fold(0.0, f64::max)));
    }
    let best_offset = per_offset
        .iter()
        .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal))
        .map(|x| x.0)
        .unwrap_or(n0);
    let rows = by_offset.remove(&best_offset).unwrap_or_default();
    let worst_deviation = rows.iter().map(|r| r.deviation).fold(0.0, f64::max);
    let worst_epsilon = rows.iter().map(|r| r.epsilon).fold(0.0, f64::max);
    ConditionReport {
        condition,
        params,
        reference,
        per_offset,
        best_offset,
        rows,
        worst_deviation,
        worst_epsilon,
        discarded,
        holds: None,
    }
}

fn row(offset: usize, word: Vec<usize>, ratio: f64, reference: f64) -> CylinderRow {
    let conditional = ratio * reference;
    let epsilon = if ratio > 0.0 {
        ratio.max(1.0 / ratio) - 1.0
    } else {
        f64::INFINITY
    };
    CylinderRow {
        offset,
        word,
        conditional,
        ratio,
        deviation: (ratio - 1.0).abs(),
        epsilon,
    }
}

/// Condition (D) at `g`: compares `mu(b ∩ {psi_n = g}) / mu(b)` with
/// `mu^n(g)` for every cylinder `b` of each length `n' in [n0, n1]`.
pub fn check_condition_d<W: Arith>(
    walk: &Walk<'_, W>,
    g: &GroupElement,
    n0: usize,
    n1: usize,
    n: usize,
    max_cylinders: usize,
) -> Result<ConditionReport> {
    check_grid(n0, n1, n)?;
    let group = walk.cocycle.group();
    group.validate_key(g.key())?;
    let m = walk.system.alphabet();
    cylinder_budget(m, n0, n1, max_cylinders)?;
    let reference = walk.distribution(n)?.group_mass(g);
    if reference.is_zero() {
        return Err(Error::Degenerate(format!("mu^{n}({g}) = 0")));
    }
    let reference_f = reference.to_f64();
    // targets per (offset, state): (word, g psi_{n'}(b)^-1)
    let mut targets: FxHashMap<(usize, usize), Vec<(Vec<usize>, GroupElement)>> =
        FxHashMap::default();
    for off in n0..=n1 {
        for w in words(m, off) {
            let s = walk.state_after(&w);
            let t = group.mul_unchecked(
                g,
                &group.inv_unchecked(&word_value(group, walk.cocycle.values(), &w)),
            );
            targets.entry((off, s)).or_default().push((w, t));
        }
    }
    let mut by_offset: FxHashMap<usize, Vec<CylinderRow>> = FxHashMap::default();
    let discarded = conditional_tables(walk, n0, n1, n, |off, state, table| {
        if let Some(list) = targets.get(&(off, state)) {
            for (w, t) in list {
                let cond = table.group_mass(t);
                by_offset.entry(off).or_default().push(row(
                    off,
                    w.clone(),
                    cond.div(&reference).to_f64(),
                    reference_f,
                ));
            }
        }
    })?;
    for rows in by_offset.values_mut() {
        rows.sort_by(|a, b| a.word.cmp(&b.word));
    }
    let params = vec![
        ("g".into(), g.to_string()),
        ("n0".into(), n0.to_string()),
        ("n1".into(), n1.to_string()),
        ("n".into(), n.to_string()),
    ];
    Ok(finish(
        "D",
        params,
        reference_f,
        by_offset,
        n0,
        n1,
        discarded,
    ))
}

/// Condition (C): the window analogue of (D) with `E g` in place of `g`.
pub fn check_condition_c<W: Arith>(
    walk: &Walk<'_, W>,
    window: &Window,
    g: &GroupElement,
    n0: usize,
    n1: usize,
    n: usize,
    max_cylinders: usize,
) -> Result<ConditionReport> {
    check_grid(n0, n1, n)?;
    let group = walk.cocycle.group();
    let basis = require_basis(group)?;
    group.validate_key(g.key())?;
    if window.dim() != basis.ambient_dim() {
        return Err(Error::validation(
            "window dimension does not match the embedding",
        ));
    }
    let m = walk.system.alphabet();
    cylinder_budget(m, n0, n1, max_cylinders)?;
    let full = walk.distribution(n)?;
    let shifted = window.translate(&basis.embed(g.key()));
    let (ref_raw, _) = window_raw(basis, &full.raw_group_marginal(), &shifted);
    let reference = ref_raw.value(full.scale());
    if reference.is_zero() {
        return Err(Error::Degenerate(format!("mu^{n}(E g) = 0")));
    }
    let reference_f = reference.to_f64();
    let mut targets: FxHashMap<(usize, usize), Vec<(Vec<usize>, Window)>> = FxHashMap::default();
    let gx = basis.embed(g.key());
    for off in n0..=n1 {
        for w in words(m, off) {
            let s = walk.state_after(&w);
            let bx = basis.embed(word_value(group, walk.cocycle.values(), &w).key());
            let shift: Vec<f64> = gx.iter().zip(&bx).map(|(a, b)| a - b).collect();
            targets
                .entry((off, s))
                .or_default()
                .push((w, window.translate(&shift)));
        }
    }
    let mut by_offset: FxHashMap<usize, Vec<CylinderRow>> = FxHashMap::default();
    let discarded = conditional_tables(walk, n0, n1, n, |off, state, table| {
        if let Some(list) = targets.get(&(off, state)) {
            let marginal = table.raw_group_marginal();
            for (w, win) in list {
                let (raw, _) = window_raw(basis, &marginal, win);
                let cond = raw.value(table.scale());
                by_offset.entry(off).or_default().push(row(
                    off,
                    w.clone(),
                    cond.div(&reference).to_f64(),
                    reference_f,
                ));
            }
        }
    })?;
    for rows in by_offset.values_mut() {
        rows.sort_by(|a, b| a.word.cmp(&b.word));
    }
    let params = vec![
        ("E".into(), format!("{:?}..{:?}", window.lo, window.hi)),
        ("g".into(), g.to_string()),
        ("n0".into(), n0.to_string()),
        ("n1".into(), n1.to_string()),
        ("n".into(), n.to_string()),
    ];
    Ok(finish(
        "C",
        params,
        reference_f,
        by_offset,
        n0,
        n1,
        discarded,
    ))
}

/// Condition (CM) for the cylinder `a` and windows `F`, `A`, `E`:
///
/// ```text
/// LHS = sum_h mu(a ∩ {psi_n = h}) |F ∩ (A - h)|
/// RHS = mu(a) |F| (|A| / |E|) mu^n(E g)
/// ```
#[allow(clippy::too_many_arguments)]
pub fn check_condition_cm<W: Arith>(
    walk: &Walk<'_, W>,
    a: &[usize],
    f: &Window,
    big_a: &Window,
    e: &Window,
    g: &GroupElement,
    n: usize,
) -> Result<ConditionReport> {
    let group = walk.cocycle.group();
    let basis = require_basis(group)?;
    if a.is_empty() || a.len() > n {
        return Err(Error::validation(
            "CM cylinder must be nonempty and no longer than n",
        ));
    }
    for w in [f, big_a, e] {
        if w.dim() != basis.ambient_dim() {
            return Err(Error::validation(
                "window dimension does not match the embedding",
            ));
        }
    }
    if f.volume() <= 0.0 {
        return Err(Error::validation("CM requires m_G(F) > 0"));
    }
    let mu_a = walk.system.cylinder_mass(a)?;
    let mu_a = crate::arith::rational_to_f64(&mu_a);
    // conditional law after a
    let after = walk.run(walk.seed_after(a), n - a.len(), |_| {})?;
    let shift = basis.embed(word_value(group, walk.cocycle.values(), a).key());
    let mut lhs = 0.0;
    after.for_each(|_, key, w| {
        let mut x = basis.embed(key);
        for (xi, si) in x.iter_mut().zip(&shift) {
            *xi += si;
        }
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        lhs += w.approx(after.scale()) * f.overlap(&big_a.translate(&neg));
    });
    lhs *= mu_a;
    let full = walk.distribution(n)?;
    let shifted = e.translate(&basis.embed(g.key()));
    let (raw, _) = window_raw(basis, &full.raw_group_marginal(), &shifted);
    let mu_eg = raw.approx(full.scale());
    let rhs = if e.volume() > 0.0 {
        mu_a * f.volume() * (big_a.volume() / e.volume()) * mu_eg
    } else {
        f64::INFINITY
    };
    let ratio = if rhs > 0.0 && rhs.is_finite() {
        lhs / rhs
    } else {
        0.0
    };
    let body = CylinderRow {
        offset: a.len(),
        word: a.to_vec(),
        conditional: lhs,
        ratio,
        deviation: (ratio - 1.0).abs(),
        epsilon: if ratio > 0.0 {
            ratio.max(1.0 / ratio) - 1.0
        } else {
            f64::INFINITY
        },
    };
    let params = vec![
        ("a".into(), format!("{a:?}")),
        ("F".into(), format!("{:?}..{:?}", f.lo, f.hi)),
        ("A".into(), format!("{:?}..{:?}", big_a.lo, big_a.hi)),
        ("E".into(), format!("{:?}..{:?}", e.lo, e.hi)),
        ("g".into(), g.to_string()),
        ("n".into(), n.to_string()),
    ];
    Ok(ConditionReport {
        condition: "CM",
        params,
        reference: rhs,
        per_offset: vec![(a.len(), body.deviation)],
        best_offset: a.len(),
        worst_deviation: body.deviation,
        worst_epsilon: body.epsilon,
        rows: vec![body],
        discarded: after.discarded().max(full.discarded()),
        holds: Some(lhs <= rhs * (1.0 + 1e-12)),
    })
}
