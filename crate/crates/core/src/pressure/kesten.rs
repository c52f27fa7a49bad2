use num_rational::BigRational;

use crate::arith::{rational_ln, Arith, Value};
use crate::error::{Error, Result};
use crate::gm_system::{Cocycle, GibbsMarkovSystem};
use crate::groups::{GroupElement, GroupSpec};
use crate::walkdist::{Kernel, MassTable};

use super::phi::{minimize_phi, MinimizerResult};
use super::walk_measure_series;

/// Polynomial decay exponent `gamma` of return masses `~ lambda^k k^-gamma`
/// for a walk whose tilted version is centred: half the homogeneous
/// dimension of the group's polynomial growth.
pub fn growth_exponent(group: &GroupSpec) -> f64 {
    match group {
        GroupSpec::IntegerLattice { dim } => *dim as f64 / 2.0,
        GroupSpec::EmbeddedRealLattice(b) => b.rank() as f64 / 2.0,
        GroupSpec::Finite(_) => 0.0,
        GroupSpec::HeisenbergZ => 2.0,
        GroupSpec::DirectProduct(l, r) => growth_exponent(l) + growth_exponent(r),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvolutionReport<V> {
    pub stride: usize,
    /// `k = s, 2s, ...` up to `k_max`.
    pub ks: Vec<usize>,
    /// `nu^{*k}(e)` at each `k`.
    pub returns: Vec<V>,
    pub kth_roots: Vec<f64>,
    /// `(nu^{*(k+s)}(e) / nu^{*k}(e))^{1/s}` at each `k`.
    pub stride_ratios: Vec<f64>,
    /// `sup_k (nu^{*k}(e))^{1/k}`, a lower bound by supermultiplicativity.
    pub fekete_lower: f64,
    /// Stride ratio at `k_max`.
    pub estimate: f64,
    /// Stride ratio times `((k+s)/k)^{gamma/s}`: removes the leading
    /// polynomial factor when return masses decay like `lambda^k k^-gamma`.
    pub corrected: f64,
    pub gamma: f64,
}

impl<V> ConvolutionReport<V> {
    /// `[fekete lower, 1]`: a probability measure has spectral radius at most one.
    pub fn bracket(&self) -> (f64, f64) {
        (self.fekete_lower, 1.0)
    }
}

/// Return masses of convolution powers of a finitely supported law, up to
/// `k_max + s`, along the stride `s`.
pub fn spectral_radius_convolution<W: Arith>(
    group: &GroupSpec,
    law: &[(GroupElement, BigRational)],
    k_max: usize,
    s: usize,
    max_cells: usize,
) -> Result<ConvolutionReport<W::Value>> {
    if s == 0 || k_max < s {
        return Err(Error::validation("convolution needs stride s >= 1 and k_max >= s"));
    }
    for (g, _) in law {
        group.validate_key(g.key())?;
    }
    let kernel = Kernel::<W>::new(1, law.iter().map(|(g, w)| (0, 0, w.clone(), g.clone())).collect());
    let e = group.identity();
    let last = k_max + s;
    let mut t = MassTable::<W>::seed(group, 1, 0).with_max_cells(max_cells);
    let mut all = Vec::with_capacity(last);
    for _ in 0..last {
        t = t.step(&kernel)?;
        all.push(t.group_mass(&e));
    }
    let ks: Vec<usize> = (1..=k_max / s).map(|i| i * s).collect();
    let returns: Vec<W::Value> = ks.iter().map(|&k| all[k - 1].clone()).collect();
    let kth_roots: Vec<f64> = ks.iter().map(|&k| (all[k - 1].ln() / k as f64).exp()).collect();
    let stride_ratios: Vec<f64> = ks
        .iter()
        .map(|&k| ((all[k + s - 1].ln() - all[k - 1].ln()) / s as f64).exp())
        .collect();
    let fekete_lower = (1..=last).map(|k| (all[k - 1].ln() / k as f64).exp()).fold(0.0, f64::max);
    let estimate = *stride_ratios.last().expect("k_max >= s");
    let gamma = growth_exponent(group);
    let k = *ks.last().expect("k_max >= s") as f64;
    let corrected = estimate * ((k + s as f64) / k).powf(gamma / s as f64);
    Ok(ConvolutionReport {
        stride: s,
        ks,
        returns,
        kth_roots,
        stride_ratios,
        fekete_lower,
        estimate,
        corrected,
        gamma,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct KestenReport<V> {
    pub convolution: ConvolutionReport<V>,
    pub minimizer: MinimizerResult,
    /// `|convolution estimate - phi(x*)|`.
    pub difference: f64,
    /// `estimate - fekete lower`.
    pub bracket_width: f64,
    pub holds: bool,
}

/// Compares the convolution spectral radius on `G` with the minimum of the
/// exponential moment function of the abelianised law.
pub fn kesten_identity_check<W: Arith>(
    group: &GroupSpec,
    law: &[(GroupElement, BigRational)],
    k_max: usize,
    s: usize,
    max_cells: usize,
) -> Result<KestenReport<W::Value>> {
    let convolution = spectral_radius_convolution::<W>(group, law, k_max, s, max_cells)?;
    let mut acc: std::collections::BTreeMap<Vec<i64>, f64> = Default::default();
    for (g, w) in law {
        *acc.entry(group.abelianize(g)).or_default() += crate::arith::rational_to_f64(w);
    }
    let ab: Vec<(Vec<i64>, f64)> = acc.into_iter().collect();
    let minimizer = minimize_phi(&ab)?;
    let difference = (convolution.estimate - minimizer.phi).abs();
    let bracket_width = (convolution.estimate - convolution.fekete_lower).abs();
    Ok(KestenReport {
        holds: difference <= bracket_width,
        difference,
        bracket_width,
        convolution,
        minimizer,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct PhiTildeRow {
    pub i: usize,
    pub n: usize,
    pub pn_one: f64,
    pub phi_min: f64,
    /// `P_n(1) phi(x_i)`.
    pub phi_tilde: f64,
    /// `(1/n) log phi(x_i)`.
    pub rate: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PhiTildeReport {
    pub factor: f64,
    pub rows: Vec<PhiTildeRow>,
    pub holds: bool,
    pub witness: Option<(usize, usize)>,
}

/// `tilde phi_{i+j}(x_{i+j}) >= D tilde phi_i(x_i) tilde phi_j(x_j)` along
/// `n_i = i s`, with `D = C^-2`.
pub fn phi_tilde_check<W: Arith>(
    system: &GibbsMarkovSystem,
    cocycle: &Cocycle,
    a: usize,
    i_max: usize,
    s: usize,
) -> Result<PhiTildeReport> {
    if i_max == 0 || s == 0 {
        return Err(Error::validation("phi-tilde check needs i_max >= 1 and s >= 1"));
    }
    let series = walk_measure_series::<W>(system, cocycle, a, i_max * s)?;
    let factor = (-2.0 * rational_ln(system.gibbs_constant())).exp();
    let mut rows = Vec::with_capacity(i_max);
    for i in 1..=i_max {
        let m = &series[i * s - 1];
        let min = minimize_phi(&m.abelianized())?;
        let pn = m.pn_one.to_f64();
        rows.push(PhiTildeRow {
            i,
            n: m.n,
            pn_one: pn,
            phi_min: min.phi,
            phi_tilde: pn * min.phi,
            rate: min.phi.ln() / m.n as f64,
        });
    }
    let mut witness = None;
    'outer: for i in 1..=i_max {
        for j in i..=i_max - i {
            let lhs = rows[i + j - 1].phi_tilde;
            let rhs = factor * rows[i - 1].phi_tilde * rows[j - 1].phi_tilde;
            if lhs < rhs * (1.0 - 1e-12) {
                witness = Some((i, j));
                break 'outer;
            }
        }
    }
    Ok(PhiTildeReport {
        factor,
        rows,
        holds: witness.is_none(),
        witness,
    })
}
