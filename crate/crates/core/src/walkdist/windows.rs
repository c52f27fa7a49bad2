use crate::arith::{Arith, Value};
use crate::error::{Error, Result};
use crate::groups::{GroupElement, GroupSpec, RealBasis};

use super::{MassTable, Walk};

/// Atoms closer than this to a face of a window are flagged.
pub const BOUNDARY_TOL: f64 = 1e-9;

/// An open axis-aligned box in `R^d`; empty when some `lo >= hi`.
#[derive(Clone, Debug, PartialEq)]
pub struct Window {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl Window {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(Error::validation(
                "window bounds must be nonempty and of equal length",
            ));
        }
        if lo.iter().chain(&hi).any(|x| x.is_nan()) {
            return Err(Error::validation("window bounds must not be NaN"));
        }
        Ok(Window { lo, hi })
    }

    /// The interval `(lo, hi)` in one dimension.
    pub fn interval(lo: f64, hi: f64) -> Self {
        Window {
            lo: vec![lo],
            hi: vec![hi],
        }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lo.iter().zip(&self.hi).any(|(a, b)| a >= b)
    }

    pub fn volume(&self) -> f64 {
        if self.is_empty() {
            0.0
        } else {
            self.lo.iter().zip(&self.hi).map(|(a, b)| b - a).product()
        }
    }

    pub fn translate(&self, v: &[f64]) -> Window {
        Window {
            lo: self.lo.iter().zip(v).map(|(a, b)| a + b).collect(),
            hi: self.hi.iter().zip(v).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(v, (a, b))| a < v && v < b)
    }

    /// Within `tol` of a face while inside the closed, slightly enlarged box.
    pub fn near_boundary(&self, x: &[f64], tol: f64) -> bool {
        if self.is_empty() {
            return false;
        }
        let inside = x
            .iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(v, (a, b))| *v > a - tol && *v < b + tol);
        inside
            && x.iter()
                .zip(self.lo.iter().zip(&self.hi))
                .any(|(v, (a, b))| (v - a).abs() <= tol || (v - b).abs() <= tol)
    }

    /// Lebesgue measure of `self ∩ other`.
    pub fn overlap(&self, other: &Window) -> f64 {
        let mut vol = 1.0;
        for j in 0..self.dim() {
            let lo = self.lo[j].max(other.lo[j]);
            let hi = self.hi[j].min(other.hi[j]);
            if hi <= lo {
                return 0.0;
            }
            vol *= hi - lo;
        }
        vol
    }
}

pub(crate) fn require_basis(group: &GroupSpec) -> Result<&RealBasis> {
    group.real_basis().ok_or_else(|| {
        Error::Unsupported("window experiments require an embedded real lattice".into())
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct WindowMass<V> {
    pub n: usize,
    pub mass: V,
    /// Atoms within [`BOUNDARY_TOL`] of a face.
    pub boundary_atoms: usize,
}

/// Raw numerator of the mass of atoms `h` with `embed(h) ∈ window`, and the
/// number of boundary atoms, from the group marginal `marginal`.
pub(crate) fn window_raw<W: Arith>(
    basis: &RealBasis,
    marginal: &[(GroupElement, W)],
    window: &Window,
) -> (W, usize) {
    let mut acc = W::zero();
    let mut flagged = 0;
    for (h, w) in marginal {
        let x = basis.embed(h.key());
        if window.contains(&x) {
            acc.add_assign(w);
        }
        if window.near_boundary(&x, BOUNDARY_TOL) {
            flagged += 1;
        }
    }
    (acc, flagged)
}

fn check_dim(basis: &RealBasis, w: &Window) -> Result<()> {
    if w.dim() != basis.ambient_dim() {
        return Err(Error::validation(format!(
            "window has dimension {}, embedding has ambient dimension {}",
            w.dim(),
            basis.ambient_dim()
        )));
    }
    Ok(())
}

/// `mu^n(E g)`: mass of atoms `h` with `embed(h) ∈ E + embed(g)`.
pub fn window_mass<W: Arith>(
    walk: &Walk<'_, W>,
    window: &Window,
    g: &GroupElement,
    n: usize,
    strict: bool,
) -> Result<WindowMass<W::Value>> {
    let group = walk.cocycle.group();
    let basis = require_basis(group)?;
    check_dim(basis, window)?;
    let t = walk.distribution(n)?;
    window_mass_in(&t, basis, window, g, strict)
}

pub(crate) fn window_mass_in<W: Arith>(
    t: &MassTable<W>,
    basis: &RealBasis,
    window: &Window,
    g: &GroupElement,
    strict: bool,
) -> Result<WindowMass<W::Value>> {
    let shifted = window.translate(&basis.embed(g.key()));
    let (raw, flagged) = window_raw(basis, &t.raw_group_marginal(), &shifted);
    if strict && flagged > 0 {
        return Err(Error::Validation(format!(
            "{flagged} atoms lie within {BOUNDARY_TOL:e} of the window boundary at n = {}",
            t.n()
        )));
    }
    Ok(WindowMass {
        n: t.n(),
        mass: raw.value(t.scale()),
        boundary_atoms: flagged,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct StoneRatio<V> {
    pub n: usize,
    pub value: V,
    pub mass_e: V,
    pub mass_a: V,
    /// `|E| / |A|`.
    pub target: f64,
    pub boundary_atoms: usize,
}

/// `mu^n(E) / mu^n(A)` with the Lebesgue target `|E| / |A|`.
pub fn stone_ratio<W: Arith>(
    walk: &Walk<'_, W>,
    e: &Window,
    a: &Window,
    n: usize,
) -> Result<StoneRatio<W::Value>> {
    let group = walk.cocycle.group();
    let basis = require_basis(group)?;
    check_dim(basis, e)?;
    check_dim(basis, a)?;
    let t = walk.distribution(n)?;
    let id = group.identity();
    let me = window_mass_in(&t, basis, e, &id, false)?;
    let ma = window_mass_in(&t, basis, a, &id, false)?;
    if ma.mass.is_zero() {
        return Err(Error::Degenerate(format!("mu^{n}(A) = 0")));
    }
    Ok(StoneRatio {
        n,
        value: me.mass.div(&ma.mass),
        target: e.volume() / a.volume(),
        boundary_atoms: me.boundary_atoms + ma.boundary_atoms,
        mass_e: me.mass,
        mass_a: ma.mass,
    })
}
