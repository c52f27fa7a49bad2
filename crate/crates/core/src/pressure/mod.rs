//! Periodic-orbit sums, walk measures and spectral radii.
//!
//! Periodic points of period `n` are the words `w` of length `n` repeated
//! forever; with memory `k` their weight is the product of the transitions
//! read around the cycle, computed on the chain of `max(k,1)`-blocks. The
//! base cylinder `a` is a symbol and the base point of walk measures is the
//! fixed point `a a a ...`.

mod fekete;
mod kesten;
mod phi;

pub use fekete::{check_superadditive, fekete_limit, FeketeReport, SuperadditivityReport};
pub use kesten::{
    growth_exponent, kesten_identity_check, phi_tilde_check, spectral_radius_convolution, ConvolutionReport,
    KestenReport, PhiTildeReport, PhiTildeRow,
};
pub use phi::{hessian_is_psd, minimize_phi, phi_value, AbelianLaw, MinimizerResult, PhiValue, GRAD_TOL};

use num_rational::BigRational;

use crate::arith::{rational_ln, Arith, Mode, Value};
use crate::error::{Error, Result};
use crate::gm_system::{Cocycle, GibbsMarkovSystem};
use crate::groups::{GroupElement, GroupSpec};
use crate::walkdist::{Kernel, MassTable, Walk, DEFAULT_MAX_CELLS};

fn check_symbol(system: &GibbsMarkovSystem, a: usize) -> Result<()> {
    if a >= system.alphabet() {
        return Err(Error::validation(format!(
            "base symbol {a} outside alphabet of size {}",
            system.alphabet()
        )));
    }
    Ok(())
}

/// The cocycle pushed to the torsion-free abelianisation.
pub fn abelianized_cocycle(cocycle: &Cocycle) -> Result<Cocycle> {
    let g = cocycle.group();
    Cocycle::new(
        GroupSpec::lattice(g.abelian_rank()),
        cocycle.abelian_values().into_iter().map(GroupElement::from).collect(),
    )
}

/// Cocycle into the trivial group, for sums without a group constraint.
fn trivial_cocycle(m: usize) -> Cocycle {
    Cocycle::new(GroupSpec::cyclic(1), vec![GroupElement::from_slice(&[0]); m]).expect("trivial cocycle")
}

/// Kernel of the block chain `(b, g) -> (shift(b) a, psi(b_0) g)`.
fn block_kernel<W: Arith>(system: &GibbsMarkovSystem, cocycle: &Cocycle) -> Kernel<W> {
    let m = system.alphabet();
    let k = system.order();
    let mut entries = Vec::new();
    for b in 0..system.num_blocks() {
        let row = if k == 0 { 0 } else { b };
        for c in 0..m {
            entries.push((
                b,
                system.shift_block(b, c),
                system.transition(row, c).clone(),
                cocycle.value(system.block_head(b)).clone(),
            ));
        }
    }
    Kernel::new(system.num_blocks(), entries)
}

/// `Z_{a,g}^n` for `n = 1..=n_max`.
pub fn grouped_periodic_series<W: Arith>(
    system: &GibbsMarkovSystem,
    cocycle: &Cocycle,
    a: usize,
    g: &GroupElement,
    n_max: usize,
    max_cells: usize,
) -> Result<Vec<W::Value>> {
    check_symbol(system, a)?;
    cocycle.check_alphabet(system.alphabet())?;
    cocycle.group().validate_key(g.key())?;
    let kernel = block_kernel::<W>(system, cocycle);
    let nb = system.num_blocks();
    let per = nb / system.alphabet();
    let mut out = vec![<W::Value as Value>::zero(); n_max];
    // blocks with head a are the codes a * per .. (a + 1) * per
    for s in a * per..(a + 1) * per {
        let mut t = MassTable::<W>::seed(cocycle.group(), nb, s).with_max_cells(max_cells);
        for slot in out.iter_mut() {
            t = t.step(&kernel)?;
            *slot = slot.add(&t.state_mass(s, g));
        }
    }
    Ok(out)
}

/// `Z_{a,g}^n`.
pub fn grouped_periodic_sum<W: Arith>(
    system: &GibbsMarkovSystem,
    cocycle: &Cocycle,
    a: usize,
    g: &GroupElement,
    n: usize,
) -> Result<W::Value> {
    if n == 0 {
        return Err(Error::validation("periodic sums need n >= 1"));
    }
    Ok(grouped_periodic_series::<W>(system, cocycle, a, g, n, DEFAULT_MAX_CELLS)?.pop().expect("n >= 1"))
}

/// `Z_{a,g}^n` for every `g` in the support.
pub fn grouped_periodic_table<W: Arith>(
    system: &GibbsMarkovSystem,
    cocycle: &Cocycle,
    a: usize,
    n: usize,
) -> Result<Vec<(GroupElement, W::Value)>> {
    check_symbol(system, a)?;
    cocycle.check_alphabet(system.alphabet())?;
    if n == 0 {
        return Err(Error::validation("periodic sums need n >= 1"));
    }
    let kernel = block_kernel::<W>(system, cocycle);
    let nb = system.num_blocks();
    let per = nb / system.alphabet();
    let mut acc: std::collections::BTreeMap<GroupElement, W::Value> = Default::default();
    for s in a * per..(a + 1) * per {
        let mut t = MassTable::<W>::seed(cocycle.group(), nb, s);
        for _ in 0..n {
            t = t.step(&kernel)?;
        }
        for (state, g, v) in t.entries() {
            if state == s {
                let e = acc.entry(g).or_insert_with(<W::Value as Value>::zero);
                *e = e.add(&v);
            }
        }
    }
    Ok(acc.into_iter().filter(|(_, v)| !v.is_zero()).collect())
}

/// `Z_a^n`.
pub fn periodic_sum<W: Arith>(system: &GibbsMarkovSystem, a: usize, n: usize) -> Result<W::Value> {
    let c = trivial_cocycle(system.alphabet());
    grouped_periodic_sum::<W>(system, &c, a, &GroupElement::from_slice(&[0]), n)
}

/// Which periodic sums a pressure estimate is built from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PressureKind {
    /// `Z_a^n`: the base system.
    Base,
    /// `Z_{a,e}^n` and the return masses `mu^n(e)`.
    Extension,
    /// `Z_{a,0}^n` for the abelianised cocycle.
    Abelianized,
}

impl std::str::FromStr for PressureKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "base" => Ok(PressureKind::Base),
            "extension" => Ok(PressureKind::Extension),
            "abelianized" => Ok(PressureKind::Abelianized),
            other => Err(Error::validation(format!(
                "unknown pressure kind '{other}' (expected base, extension or abelianized)"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PressureReport<V> {
    pub kind: PressureKind,
    pub mode: Mode,
    /// `Z^n` for `n = 1..=n_max`.
    pub sums: Vec<V>,
    /// `(1/n) log Z^n`.
    pub rates: Vec<f64>,
    pub fekete: FeketeReport,
    /// `mu^n(e)` and its Fekete data, for the extension kind.
    pub returns: Option<Vec<V>>,
    pub return_rates: Option<Vec<f64>>,
    pub return_fekete: Option<FeketeReport>,
    /// Rigorous upper bound: the pressure of a probability-weighted base is 0.
    pub upper: f64,
}

impl<V> PressureReport<V> {
    /// `[fekete lower, upper]` for the periodic-sum estimator.
    pub fn bracket(&self) -> (f64, f64) {
        (self.fekete.lower, self.upper)
    }
}

fn rates<V: Value>(s: &[V]) -> Vec<f64> {
    s.iter().enumerate().map(|(i, v)| v.ln() / (i + 1) as f64).collect()
}

/// Pressure from periodic sums, with a Fekete bracket using
/// `log D = -2 log C`.
pub fn pressure_estimate<W: Arith>(
    kind: PressureKind,
    system: &GibbsMarkovSystem,
    cocycle: &Cocycle,
    a: usize,
    n_max: usize,
) -> Result<PressureReport<W::Value>> {
    if n_max == 0 {
        return Err(Error::validation("pressure estimates need n_max >= 1"));
    }
    let log_c = -2.0 * rational_ln(system.gibbs_constant());
    let (coc, g) = match kind {
        PressureKind::Base => (trivial_cocycle(system.alphabet()), GroupElement::from_slice(&[0])),
        PressureKind::Extension => (cocycle.clone(), cocycle.group().identity()),
        PressureKind::Abelianized => {
            let ab = abelianized_cocycle(cocycle)?;
            let id = ab.group().identity();
            (ab, id)
        }
    };
    let sums = grouped_periodic_series::<W>(system, &coc, a, &g, n_max, DEFAULT_MAX_CELLS)?;
    if sums.iter().all(|v| v.is_zero()) {
        return Err(Error::Degenerate(format!(
            "no periodic orbit through symbol {a} returns to {g} within n <= {n_max}; the extension is not transitive on this horizon"
        )));
    }
    let r = rates(&sums);
    let fekete = fekete_limit(&sums.iter().map(|v| v.ln()).collect::<Vec<_>>(), log_c);
    let (returns, return_rates, return_fekete) = if kind == PressureKind::Extension {
        let walk = Walk::<W>::new(system, cocycle)?;
        let e = cocycle.group().identity();
        let mut masses = Vec::with_capacity(n_max);
        walk.run(walk.seed(), n_max, |t| {
            if t.n() > 0 {
                masses.push(t.group_mass(&e));
            }
        })?;
        let rr = rates(&masses);
        let fk = fekete_limit(&masses.iter().map(|v| v.ln()).collect::<Vec<_>>(), log_c);
        (Some(masses), Some(rr), Some(fk))
    } else {
        (None, None, None)
    };
    Ok(PressureReport {
        kind,
        mode: W::MODE,
        sums,
        rates: r,
        fekete,
        returns,
        return_rates,
        return_fekete,
        upper: 0.0,
    })
}

/// The normalised measure `m_n` with its normaliser `P_n(1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct WalkMeasure<V> {
    pub n: usize,
    pub a: usize,
    /// First `k` symbols of the base point.
    pub xi: Vec<usize>,
    pub group: GroupSpec,
    /// Sorted by element; masses sum to one.
    pub masses: Vec<(GroupElement, V)>,
    pub pn_one: V,
}

impl<V: Value> WalkMeasure<V> {
    pub fn support(&self) -> Vec<GroupElement> {
        self.masses.iter().map(|p| p.0.clone()).collect()
    }

    pub fn mass(&self, g: &GroupElement) -> V {
        self.masses
            .binary_search_by(|p| p.0.cmp(g))
            .map_or_else(|_| V::zero(), |i| self.masses[i].1.clone())
    }

    /// Push-forward to the abelianisation, as floats.
    pub fn abelianized(&self) -> Vec<(Vec<i64>, f64)> {
        let mut acc: std::collections::BTreeMap<Vec<i64>, f64> = Default::default();
        for (g, v) in &self.masses {
            *acc.entry(self.group.abelianize(g)).or_default() += v.to_f64();
        }
        acc.into_iter().collect()
    }
}

impl WalkMeasure<BigRational> {
    /// Exact law, for convolution.
    pub fn law(&self) -> Vec<(GroupElement, BigRational)> {
        self.masses.clone()
    }
}

/// `m_n` and `P_n(1)` at the base point `a a a ...`:
/// `P_n(1) m_n(g) = sum_{v : v_0 = a, psi_n(v) = g} mu[v xi_{<k}] / mu[xi_{<k}]`.
pub fn walk_measure<W: Arith>(
    system: &GibbsMarkovSystem,
    cocycle: &Cocycle,
    a: usize,
    n: usize,
) -> Result<WalkMeasure<W::Value>> {
    Ok(walk_measure_series::<W>(system, cocycle, a, n)?.pop().expect("n >= 1"))
}

/// `m_1, ..., m_n` from one forward run.
pub fn walk_measure_series<W: Arith>(
    system: &GibbsMarkovSystem,
    cocycle: &Cocycle,
    a: usize,
    n: usize,
) -> Result<Vec<WalkMeasure<W::Value>>> {
    check_symbol(system, a)?;
    if n == 0 {
        return Err(Error::validation("walk measures need n >= 1"));
    }
    let walk = Walk::<W>::new(system, cocycle)?;
    let k = system.order();
    let xi = vec![a; k];
    let mu_xi = system.mass_unchecked(&xi);
    let mu_a = system.mass_unchecked(&[a]);
    // weight of continuing each lag state by xi
    let cont: Vec<W::Value> = walk
        .graph
        .words
        .iter()
        .map(|s| {
            let mut w = s.clone();
            w.extend_from_slice(&xi);
            <W::Value as Value>::from_rational(&(system.mass_unchecked(&w) / system.mass_unchecked(s) * &mu_a / &mu_xi))
        })
        .collect();
    let group = cocycle.group().clone();
    let start = MassTable::<W>::seed_at(&group, walk.nstates(), walk.state_after(&[a]), cocycle.value(a))
        .with_max_cells(walk.options.max_cells);
    let mut out = Vec::with_capacity(n);
    walk.run(start, n - 1, |t| {
        let mut acc: std::collections::BTreeMap<GroupElement, W::Value> = Default::default();
        for (state, g, v) in t.entries() {
            let e = acc.entry(g).or_insert_with(<W::Value as Value>::zero);
            *e = e.add(&v.mul(&cont[state]));
        }
        let total = acc.values().fold(<W::Value as Value>::zero(), |s, v| s.add(v));
        let masses = acc
            .into_iter()
            .filter(|(_, v)| !v.is_zero())
            .map(|(g, v)| (g, v.div(&total)))
            .collect();
        out.push(WalkMeasure {
            n: t.n() + 1,
            a,
            xi: xi.clone(),
            group: group.clone(),
            masses,
            pn_one: total,
        });
    })?;
    Ok(out)
}

/// `P_n(1)`.
pub fn pn_one<W: Arith>(system: &GibbsMarkovSystem, cocycle: &Cocycle, a: usize, n: usize) -> Result<W::Value> {
    Ok(walk_measure::<W>(system, cocycle, a, n)?.pn_one)
}

#[derive(Clone, Debug, PartialEq)]
pub struct GeneratingPeriod {
    pub s: usize,
    /// Support size of `m_j` for `j = 1..=s`.
    pub support_sizes: Vec<usize>,
}

/// Smallest `s <= s_max` whose walk measure support generates the group
/// as a semigroup, so that `m_s` is non-degenerate.
pub fn generating_period(system: &GibbsMarkovSystem, cocycle: &Cocycle, a: usize, s_max: usize) -> Result<GeneratingPeriod> {
    if s_max == 0 {
        return Err(Error::validation("s_max must be at least 1"));
    }
    let series = walk_measure_series::<f64>(system, cocycle, a, s_max)?;
    let mut sizes = Vec::new();
    for m in &series {
        sizes.push(m.masses.len());
        if cocycle.group().semigroup_generated(&m.support())? {
            return Ok(GeneratingPeriod {
                s: m.n,
                support_sizes: sizes,
            });
        }
    }
    Err(Error::Degenerate(format!(
        "no s <= {s_max} has a generating walk-measure support; support sizes by s: {sizes:?}"
    )))
}
