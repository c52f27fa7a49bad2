use nalgebra::{DMatrix, DVector};

use crate::arith::Value;

/// Slack allowed in floating comparisons of the almost-superadditive inequality.
const SLACK: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct FeketeReport {
    pub log_c: f64,
    /// `a_{n+m} >= a_n + a_m + log C` on the whole index range.
    pub holds: bool,
    /// First violating pair `(n, m)`.
    pub witness: Option<(usize, usize)>,
    pub pairs_checked: u64,
    /// `sup_p (a_p + log C) / p`, a rigorous lower bound on the limit.
    pub lower: f64,
    pub lower_at: Option<usize>,
    /// `a_N / N` at the largest finite index.
    pub estimate: f64,
    pub estimate_at: Option<usize>,
    /// Fit of `a_n / n = L + c1 ln(n)/n + c2/n` over the upper three
    /// quarters of the finite indices.
    pub extrapolated: Option<f64>,
}

/// Verifies `a_{n+m} >= a_n + a_m + log C` and brackets `lim a_n / n`.
///
/// `a[i]` is `a_{i+1}`; entries may be `-inf` (a vanishing mass).
pub fn fekete_limit(a: &[f64], log_c: f64) -> FeketeReport {
    let n_max = a.len();
    let at = |n: usize| a[n - 1];
    let mut witness = None;
    let mut pairs = 0u64;
    'outer: for n in 1..=n_max {
        for m in n..=n_max - n {
            pairs += 1;
            let rhs = at(n) + at(m) + log_c;
            let lhs = at(n + m);
            if rhs.is_finite() && lhs < rhs - SLACK * rhs.abs().max(1.0) {
                witness = Some((n, m));
                break 'outer;
            }
        }
    }
    let mut lower = f64::NEG_INFINITY;
    let mut lower_at = None;
    for n in 1..=n_max {
        let v = (at(n) + log_c) / n as f64;
        if v > lower {
            lower = v;
            lower_at = Some(n);
        }
    }
    let estimate_at = (1..=n_max).rev().find(|&n| at(n).is_finite());
    let estimate = estimate_at.map_or(f64::NEG_INFINITY, |n| at(n) / n as f64);
    FeketeReport {
        log_c,
        holds: witness.is_none(),
        witness,
        pairs_checked: pairs,
        lower,
        lower_at,
        estimate,
        estimate_at,
        extrapolated: extrapolate(a),
    }
}

fn extrapolate(a: &[f64]) -> Option<f64> {
    let n_max = a.len();
    let pts: Vec<(f64, f64)> = (n_max.div_ceil(4).max(2)..=n_max)
        .filter(|&n| a[n - 1].is_finite())
        .map(|n| (n as f64, a[n - 1] / n as f64))
        .collect();
    if pts.len() < 4 {
        return None;
    }
    let design = DMatrix::from_fn(pts.len(), 3, |i, j| {
        let n = pts[i].0;
        match j {
            0 => 1.0,
            1 => n.ln() / n,
            _ => 1.0 / n,
        }
    });
    let rhs = DVector::from_iterator(pts.len(), pts.iter().map(|p| p.1));
    let sol = design.svd(true, true).solve(&rhs, 1e-15).ok()?;
    Some(sol[0])
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuperadditivityReport<V> {
    pub factor: V,
    pub holds: bool,
    pub witness: Option<(usize, usize)>,
    pub pairs_checked: u64,
}

/// `s_{n+m} >= D s_n s_m` for all `n, m >= 1` with `n + m <= s.len()`,
/// compared exactly in the value type. `s[i]` is `s_{i+1}`.
pub fn check_superadditive<V: Value>(s: &[V], factor: &V) -> SuperadditivityReport<V> {
    let mut witness = None;
    let mut pairs = 0;
    'outer: for n in 1..=s.len() {
        for m in n..=s.len() - n {
            pairs += 1;
            if s[n + m - 1] < factor.mul(&s[n - 1].mul(&s[m - 1])) {
                witness = Some((n, m));
                break 'outer;
            }
        }
    }
    SuperadditivityReport {
        factor: factor.clone(),
        holds: witness.is_none(),
        witness,
        pairs_checked: pairs,
    }
}
