use crate::arith::{Arith, Value};
use crate::error::{Error, Result};
use crate::gm_system::check_aperiodicity_algebraic;
use crate::groups::GroupElement;

use super::{MassTable, Walk};

/// `r_n = mu^{n+s}(g) / mu^n(g)` along `n = n_start, n_start + s, ...`.
#[derive(Clone, Debug, PartialEq)]
pub struct RatioSeries<V> {
    pub g: GroupElement,
    pub stride: usize,
    pub ns: Vec<usize>,
    pub ratios: Vec<V>,
    pub deviations: Vec<f64>,
    /// Set when the cocycle fails the algebraic aperiodicity check.
    pub periodicity: Option<String>,
}

impl<V: Value> RatioSeries<V> {
    pub fn deviation_at(&self, n: usize) -> Option<f64> {
        self.ns
            .iter()
            .position(|&m| m == n)
            .map(|i| self.deviations[i])
    }

    /// Running maximum of deviations from `n` onward, evaluated at each of
    /// `points`; the envelope shrinks when this is nonincreasing.
    pub fn envelope(&self, points: &[usize]) -> Vec<f64> {
        points
            .iter()
            .map(|&p| {
                self.ns
                    .iter()
                    .zip(&self.deviations)
                    .filter(|(n, _)| **n >= p)
                    .map(|(_, d)| *d)
                    .fold(0.0, f64::max)
            })
            .collect()
    }
}

fn periodicity_note<W: Arith>(walk: &Walk<'_, W>) -> Option<String> {
    let rep = check_aperiodicity_algebraic(walk.system, walk.cocycle).ok()?;
    if rep.full {
        None
    } else {
        Some(match (rep.index, rep.finite_part) {
            (_, Some((sub, order))) => format!(
                "differences generate a subgroup of order {sub} in a group of order {order}; aperiodicity fails"
            ),
            (Some(i), None) => format!("differences span a sublattice of index {i}; aperiodicity fails"),
            (None, None) => format!(
                "differences span a rank-{} sublattice of Z^{}; aperiodicity fails",
                rep.rank, rep.ambient_rank
            ),
        })
    }
}

/// Ratio sequence at `g` for `n` in `n_start..=n_end` with the given stride.
pub fn ratio_sequence<W: Arith>(
    walk: &Walk<'_, W>,
    g: &GroupElement,
    n_start: usize,
    n_end: usize,
    stride: usize,
) -> Result<RatioSeries<W::Value>> {
    if stride == 0 || n_start > n_end {
        return Err(Error::validation(
            "ratio sequence needs stride >= 1 and n_start <= n_end",
        ));
    }
    walk.cocycle.group().validate_key(g.key())?;
    let last = n_end + stride;
    let mut masses: Vec<W::Value> = Vec::with_capacity(last + 1);
    walk.run(walk.seed(), last, |t: &MassTable<W>| {
        masses.push(t.group_mass(g))
    })?;
    let periodicity = periodicity_note(walk);
    let mut ns = Vec::new();
    let mut ratios = Vec::new();
    let mut deviations = Vec::new();
    let mut n = n_start;
    while n <= n_end {
        if masses[n].is_zero() || masses[n + stride].is_zero() {
            let bad = if masses[n].is_zero() { n } else { n + stride };
            let first = (bad..=last).find(|&j| !masses[j].is_zero());
            return Err(Error::Degenerate(format!(
                "mu^{bad}({g}) = 0; first n >= {bad} with positive mass: {}{}",
                first.map_or("none in range".to_string(), |j| j.to_string()),
                periodicity.as_ref().map_or(String::new(), |p| format!(
                    "; {p}; try a stride equal to the period"
                ))
            )));
        }
        let r = masses[n + stride].div(&masses[n]);
        deviations.push((r.to_f64() - 1.0).abs());
        ratios.push(r);
        ns.push(n);
        n += stride;
    }
    Ok(RatioSeries {
        g: g.clone(),
        stride,
        ns,
        ratios,
        deviations,
        periodicity,
    })
}

/// `mu^n(g) / mu^n(e)` with a Gaussian reference curve for free abelian targets.
#[derive(Clone, Debug, PartialEq)]
pub struct CrossRatio<V> {
    pub n: usize,
    pub value: V,
    pub mass_g: V,
    pub mass_e: V,
    /// `exp(-q(g - m) + q(-m))` where `m` is the mean of `psi_n` and
    /// `q(v) = v^T Cov(psi_n)^-1 v / 2`.
    pub clt_reference: Option<f64>,
}

pub fn cross_ratio<W: Arith>(
    walk: &Walk<'_, W>,
    g: &GroupElement,
    n: usize,
) -> Result<CrossRatio<W::Value>> {
    let group = walk.cocycle.group();
    group.validate_key(g.key())?;
    let t = walk.distribution(n)?;
    let e = group.identity();
    let mass_g = t.group_mass(g);
    let mass_e = t.group_mass(&e);
    if mass_e.is_zero() || mass_g.is_zero() {
        return Err(Error::Degenerate(format!(
            "cross ratio at n = {n}: mu^n({g}) = {mass_g}, mu^n(e) = {mass_e}"
        )));
    }
    let clt_reference = if group.is_free_abelian() {
        gaussian_reference(&t, g)
    } else {
        None
    };
    Ok(CrossRatio {
        n,
        value: mass_g.div(&mass_e),
        mass_g,
        mass_e,
        clt_reference,
    })
}

fn gaussian_reference<W: Arith>(t: &MassTable<W>, g: &GroupElement) -> Option<f64> {
    let d = g.key().len();
    let mut mean = vec![0.0; d];
    let mut second = vec![vec![0.0; d]; d];
    for (h, v) in t.group_marginal() {
        let p = v.to_f64();
        for i in 0..d {
            mean[i] += p * h.key()[i] as f64;
            for j in 0..d {
                second[i][j] += p * (h.key()[i] * h.key()[j]) as f64;
            }
        }
    }
    let cov = nalgebra::DMatrix::from_fn(d, d, |i, j| second[i][j] - mean[i] * mean[j]);
    let inv = cov.try_inverse()?;
    let q = |v: &[f64]| {
        let x = nalgebra::DVector::from_column_slice(v);
        0.5 * (x.transpose() * &inv * &x)[(0, 0)]
    };
    let shifted: Vec<f64> = (0..d).map(|i| g.key()[i] as f64 - mean[i]).collect();
    let neg_mean: Vec<f64> = mean.iter().map(|m| -m).collect();
    Some((-q(&shifted) + q(&neg_mean)).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{ratio, Exact};
    use crate::gm_system::{Cocycle, GibbsMarkovSystem};
    use crate::groups::GroupSpec;

    fn el(v: &[i64]) -> GroupElement {
        GroupElement::from_slice(v)
    }

    #[test]
    fn first_ratio_is_one_for_trinomial() {
        let s = GibbsMarkovSystem::uniform(3);
        let c = Cocycle::new(GroupSpec::lattice(1), vec![el(&[-1]), el(&[0]), el(&[1])]).unwrap();
        let w = Walk::<Exact>::new(&s, &c).unwrap();
        let r = ratio_sequence(&w, &el(&[0]), 1, 3, 1).unwrap();
        assert_eq!(r.ratios[0], ratio(1, 1));
        assert!(r.periodicity.is_none());
        let cr = cross_ratio(&w, &el(&[0]), 7).unwrap();
        assert_eq!(cr.value, ratio(1, 1));
        let cr = cross_ratio(&Walk::<f64>::new(&s, &c).unwrap(), &el(&[5]), 300).unwrap();
        let reference = cr.clt_reference.unwrap();
        assert!((reference - (-18.75f64 / 300.0).exp()).abs() < 1e-9);
    }

    #[test]
    fn periodic_walk_needs_stride() {
        let s = GibbsMarkovSystem::uniform(2);
        let c = Cocycle::new(GroupSpec::lattice(1), vec![el(&[-1]), el(&[1])]).unwrap();
        let w = Walk::<Exact>::new(&s, &c).unwrap();
        let err = ratio_sequence(&w, &el(&[0]), 2, 10, 1).unwrap_err();
        assert!(matches!(err, Error::Degenerate(ref m) if m.contains("index 2")));
        let ok = ratio_sequence(&w, &el(&[0]), 2, 10, 2).unwrap();
        assert!(ok.periodicity.is_some());
        // mu^4(0)/mu^2(0) = (6/16)/(1/2)
        assert_eq!(ok.ratios[0], ratio(3, 4));
    }
}
