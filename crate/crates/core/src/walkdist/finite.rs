use crate::arith::{Arith, Value};
use crate::error::{Error, Result};
use crate::gm_system::{check_aperiodicity_algebraic, enumerate_finite};

use super::Walk;

#[derive(Clone, Debug, PartialEq)]
pub struct MixingReport<V> {
    pub order: usize,
    /// `(n, sup_g |mu^n(g) - 1/#G|)` for `n = 1..=n_max`.
    pub deviations: Vec<(usize, V)>,
    /// Least-squares slope of `log deviation` against `n` on the dyadic grid
    /// `1, 2, 4, ...`; `exp(slope)` is the fitted contraction factor.
    pub rate: Option<f64>,
    pub diagnostic: Option<String>,
}

fn require_finite<W: Arith>(walk: &Walk<'_, W>) -> Result<usize> {
    walk.cocycle.group().finite_order().ok_or_else(|| {
        Error::Unsupported("finite-group checks require a finite target group".into())
    })
}

/// Sup-distance of `mu^n` from the uniform law, `n = 1..=n_max`.
pub fn finite_group_mixing<W: Arith>(
    walk: &Walk<'_, W>,
    n_max: usize,
) -> Result<MixingReport<W::Value>> {
    let order = require_finite(walk)?;
    let group = walk.cocycle.group();
    let elems = enumerate_finite(group);
    let uniform = <W::Value as Value>::from_rational(&crate::arith::ratio(1, order as i64));
    let aperiodic = check_aperiodicity_algebraic(walk.system, walk.cocycle)?.full;
    let mut deviations = Vec::with_capacity(n_max);
    walk.run(walk.seed(), n_max, |t| {
        if t.n() == 0 {
            return;
        }
        let mut worst = <W::Value as Value>::zero();
        for g in &elems {
            let v = t.group_mass(g);
            let d = if v >= uniform {
                v.sub(&uniform)
            } else {
                uniform.sub(&v)
            };
            if d > worst {
                worst = d;
            }
        }
        deviations.push((t.n(), worst));
    })?;
    let (rate, diagnostic) = if !aperiodic {
        (
            None,
            Some(
                "aperiodicity fails: differences do not generate the group; no rate fitted"
                    .to_string(),
            ),
        )
    } else {
        let pts: Vec<(f64, f64)> = deviations
            .iter()
            .filter(|(n, _)| n.is_power_of_two())
            .map(|(n, d)| (*n as f64, d.ln()))
            .filter(|(_, l)| l.is_finite())
            .collect();
        if pts.len() >= 2 {
            (Some(linear_fit(&pts).0), None)
        } else {
            (
                None,
                Some("deviation vanishes on the dyadic grid; no rate fitted".to_string()),
            )
        }
    };
    Ok(MixingReport {
        order,
        deviations,
        rate,
        diagnostic,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct TailReport<V> {
    /// `mu(tau > n)` for `n = 0..=n_max`, where `tau` is the first return
    /// of `psi_n` to the identity.
    pub tail: Vec<V>,
    /// Least-squares slope and intercept of `log mu(tau > n)` on `n >= 1`.
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Return-time tail by absorbing the extended chain at the identity.
pub fn return_time_tail<W: Arith>(
    walk: &Walk<'_, W>,
    n_max: usize,
) -> Result<TailReport<W::Value>> {
    require_finite(walk)?;
    let e = walk.cocycle.group().identity();
    let mut t = walk.seed();
    let mut tail = vec![<W::Value as Value>::one()];
    for _ in 0..n_max {
        t = walk.advance(&t)?;
        t.remove(&e);
        tail.push(t.total());
    }
    let pts: Vec<(f64, f64)> = tail
        .iter()
        .enumerate()
        .skip(1)
        .map(|(n, v)| (n as f64, v.ln()))
        .filter(|(_, l)| l.is_finite())
        .collect();
    let (slope, intercept, r_squared) = if pts.len() >= 2 {
        let (s, i) = linear_fit(&pts);
        (s, i, r_squared(&pts, s, i))
    } else {
        (f64::NEG_INFINITY, 0.0, f64::NAN)
    };
    Ok(TailReport {
        tail,
        slope,
        intercept,
        r_squared,
    })
}

/// Ordinary least squares `y = slope x + intercept`.
pub fn linear_fit(pts: &[(f64, f64)]) -> (f64, f64) {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

pub fn r_squared(pts: &[(f64, f64)], slope: f64, intercept: f64) -> f64 {
    let my = pts.iter().map(|p| p.1).sum::<f64>() / pts.len() as f64;
    let ss_tot: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let ss_res: f64 = pts
        .iter()
        .map(|p| (p.1 - slope * p.0 - intercept).powi(2))
        .sum();
    if ss_tot == 0.0 {
        1.0
    } else {
        1.0 - ss_res / ss_tot
    }
}
