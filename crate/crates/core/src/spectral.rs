//! Character-twisted transfer matrices and the Fourier side of the walk.
//!
//! Characters are parameterised on the torsion-free abelianisation `Z^d` of
//! the target (the internal coordinate lattice for embedded real lattices):
//! `chi_theta(g) = exp(i <theta, ab(g)>)`. For embedded lattices the real
//! dual variable `t in R^D` acts through `theta_j = <t, beta_j>`.
//!
//! Matrices are column-stochastic at `theta = 0`: entry `(s', s)` carries the
//! weight of the move `s -> s'` times the character of the emitted increment.

use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::arith::rational_to_f64;
use crate::error::{Error, Result};
use crate::gm_system::{check_aperiodicity_algebraic, check_symmetry, Cocycle, GibbsMarkovSystem, SymmetryInvolution};
use crate::groups::{GroupElement, GroupSpec, RealBasis};
use crate::walkdist::{window_mass, Walk, Window};

use std::f64::consts::{PI, TAU};

/// Largest state count handled by the dense eigensolver.
pub const DENSE_LIMIT: usize = 64;

/// Below this distance between `|lambda|` and `|lambda_1|` the leading
/// eigenvalue is flagged as near-degenerate.
pub const GAP_WARNING: f64 = 1e-6;

/// Agreement demanded between two computations of the same Fourier datum.
pub const PATH_TOL: f64 = 1e-10;

/// A point of the dual torus, reduced into `[0, 2pi)^d`.
#[derive(Clone, Debug, PartialEq)]
pub struct CharacterPoint {
    theta: Vec<f64>,
}

impl CharacterPoint {
    pub fn new(theta: Vec<f64>) -> Self {
        CharacterPoint {
            theta: theta.into_iter().map(|x| x.rem_euclid(TAU)).collect(),
        }
    }

    pub fn zero(dim: usize) -> Self {
        CharacterPoint { theta: vec![0.0; dim] }
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn dim(&self) -> usize {
        self.theta.len()
    }

    /// Representative in `(-pi, pi]^d`.
    pub fn centered(&self) -> Vec<f64> {
        self.theta.iter().map(|&x| if x > PI { x - TAU } else { x }).collect()
    }

    /// Euclidean distance to `0` on the torus.
    pub fn norm(&self) -> f64 {
        self.centered().iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    fn phase(&self, ab: &[i64]) -> Complex64 {
        let arg: f64 = self.theta.iter().zip(ab).map(|(t, &g)| t * g as f64).sum();
        Complex64::from_polar(1.0, arg)
    }
}

/// `theta_j = <t, beta_j>` for a real dual vector `t`.
pub fn theta_from_real(basis: &RealBasis, t: &[f64]) -> CharacterPoint {
    CharacterPoint::new(
        basis
            .vectors()
            .iter()
            .map(|b| b.iter().zip(t).map(|(x, y)| x * y).sum())
            .collect(),
    )
}

/// Rank of the character lattice; finite factors carry no torsion-free
/// characters and are rejected.
pub fn character_rank(group: &GroupSpec) -> Result<usize> {
    fn ok(g: &GroupSpec) -> bool {
        match g {
            GroupSpec::IntegerLattice { .. } | GroupSpec::EmbeddedRealLattice(_) | GroupSpec::HeisenbergZ => true,
            GroupSpec::Finite(_) => false,
            GroupSpec::DirectProduct(l, r) => ok(l) && ok(r),
        }
    }
    if ok(group) && group.abelian_rank() > 0 {
        Ok(group.abelian_rank())
    } else {
        Err(Error::Unsupported(
            "perturbed operators require a lattice target (Z^d, embedded lattice or their extensions)".into(),
        ))
    }
}

fn check_theta(group: &GroupSpec, theta: &CharacterPoint) -> Result<()> {
    let d = character_rank(group)?;
    if theta.dim() != d {
        return Err(Error::validation(format!(
            "character has dimension {}, target abelianisation has rank {d}",
            theta.dim()
        )));
    }
    Ok(())
}

/// Plain transition matrix on the steady blocks (one state when `k = 0`).
pub fn transition_matrix(system: &GibbsMarkovSystem) -> DMatrix<Complex64> {
    let graph = system.state_graph();
    let ss = graph.steady_start;
    let n = graph.words.len() - ss;
    let mut a = DMatrix::zeros(n, n);
    for (from, to, _, w) in &graph.edges {
        if *from >= ss {
            a[(to - ss, from - ss)] += Complex64::new(rational_to_f64(w), 0.0);
        }
    }
    a
}

/// Twisted transfer matrix on the steady blocks.
pub fn perturbed_matrix(system: &GibbsMarkovSystem, cocycle: &Cocycle, theta: &CharacterPoint) -> Result<DMatrix<Complex64>> {
    cocycle.check_alphabet(system.alphabet())?;
    check_theta(cocycle.group(), theta)?;
    let ab = cocycle.abelian_values();
    let graph = system.state_graph();
    let ss = graph.steady_start;
    let n = graph.words.len() - ss;
    let mut a = DMatrix::zeros(n, n);
    for (from, to, sym, w) in &graph.edges {
        if *from >= ss {
            a[(to - ss, from - ss)] += theta.phase(&ab[*sym]) * rational_to_f64(w);
        }
    }
    Ok(a)
}

/// Precomputed edge list of the full state graph, for repeated evaluation.
struct Twister {
    nstates: usize,
    edges: Vec<(usize, usize, f64, Vec<i64>)>,
    steady_start: usize,
}

impl Twister {
    fn new(system: &GibbsMarkovSystem, cocycle: &Cocycle) -> Result<Self> {
        cocycle.check_alphabet(system.alphabet())?;
        character_rank(cocycle.group())?;
        let ab = cocycle.abelian_values();
        let graph = system.state_graph();
        Ok(Twister {
            nstates: graph.words.len(),
            edges: graph
                .edges
                .iter()
                .map(|(f, t, s, w)| (*f, *t, rational_to_f64(w), ab[*s].clone()))
                .collect(),
            steady_start: graph.steady_start,
        })
    }

    fn steady(&self, theta: &CharacterPoint) -> DMatrix<Complex64> {
        let ss = self.steady_start;
        let n = self.nstates - ss;
        let mut a = DMatrix::zeros(n, n);
        for (f, t, w, g) in &self.edges {
            if *f >= ss {
                a[(t - ss, f - ss)] += theta.phase(g) * *w;
            }
        }
        a
    }

    /// `E[chi(psi_n)]` from the empty word by `n` twisted steps.
    fn characteristic(&self, theta: &CharacterPoint, n: usize) -> Complex64 {
        let twisted: Vec<(usize, usize, Complex64)> =
            self.edges.iter().map(|(f, t, w, g)| (*f, *t, theta.phase(g) * *w)).collect();
        let mut v = vec![Complex64::new(0.0, 0.0); self.nstates];
        v[0] = Complex64::new(1.0, 0.0);
        let mut next = vec![Complex64::new(0.0, 0.0); self.nstates];
        for _ in 0..n {
            next.iter_mut().for_each(|x| *x = Complex64::new(0.0, 0.0));
            for (f, t, w) in &twisted {
                next[*t] += w * v[*f];
            }
            std::mem::swap(&mut v, &mut next);
        }
        v.iter().sum()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Eigen {
    pub lambda: Complex64,
    /// Modulus of the next eigenvalue (0 for a 1x1 matrix).
    pub second_modulus: f64,
    /// `|lambda_1| / |lambda|` (0 when `lambda = 0`).
    pub gap_ratio: f64,
    pub near_degenerate: bool,
    pub dense: bool,
}

/// Eigenvalue of maximal modulus with the gap to the next one.
pub fn leading_eigenvalue(a: &DMatrix<Complex64>) -> Result<Eigen> {
    let n = a.nrows();
    if n == 0 || n != a.ncols() {
        return Err(Error::validation("leading eigenvalue needs a nonempty square matrix"));
    }
    let (lambda, second, dense) = if n == 1 {
        (a[(0, 0)], 0.0, true)
    } else if n <= DENSE_LIMIT {
        let mut ev: Vec<Complex64> = a
            .clone()
            .schur()
            .eigenvalues()
            .ok_or_else(|| Error::Consistency("complex Schur decomposition failed".into()))?
            .iter()
            .copied()
            .collect();
        ev.sort_by(|x, y| y.norm().total_cmp(&x.norm()));
        (ev[0], ev[1].norm(), true)
    } else {
        let (l, s) = power_pair(a);
        (l, s, false)
    };
    let gap_ratio = if lambda.norm() > 0.0 { second / lambda.norm() } else { 0.0 };
    Ok(Eigen {
        lambda,
        second_modulus: second,
        gap_ratio,
        near_degenerate: n > 1 && lambda.norm() - second < GAP_WARNING,
        dense,
    })
}

/// Power iteration; returns the Rayleigh quotient, the last growth factor
/// `|A v| / |v|` and the iterate.
fn power_iterate(a: &DMatrix<Complex64>) -> (Complex64, f64, nalgebra::DVector<Complex64>) {
    let n = a.nrows();
    let mut v = nalgebra::DVector::from_fn(n, |i, _| Complex64::new(1.0 + i as f64 * 1e-3, (i % 7) as f64 * 1e-3));
    v /= Complex64::new(v.norm(), 0.0);
    let mut lambda = Complex64::new(0.0, 0.0);
    let mut growth = 0.0;
    let mut steady = 0;
    for _ in 0..20_000 {
        let w = a * &v;
        lambda = v.dotc(&w);
        let prev = growth;
        growth = w.norm();
        steady = if (growth - prev).abs() <= 1e-15 * growth { steady + 1 } else { 0 };
        let resid = (&w - &v * lambda).norm();
        if growth == 0.0 {
            break;
        }
        v = w / Complex64::new(growth, 0.0);
        if resid < 1e-13 || steady >= 50 {
            break;
        }
    }
    (lambda, growth, v)
}

/// Power iteration for the leading eigenvalue, then Hotelling deflation with
/// the left eigenvector for the modulus of the next one. The deflated
/// iteration need not settle on one eigenvector when several share the
/// modulus, so its growth factor is used instead of the quotient.
fn power_pair(a: &DMatrix<Complex64>) -> (Complex64, f64) {
    let (lambda, _, v) = power_iterate(a);
    let (_, _, w) = power_iterate(&a.adjoint());
    let denom = w.dotc(&v);
    if denom.norm() < 1e-300 {
        return (lambda, lambda.norm());
    }
    let deflated = a - (&v * w.adjoint()) * (lambda / denom);
    let (_, growth, _) = power_iterate(&deflated);
    (lambda, growth)
}

/// One grid point of a scan.
#[derive(Clone, Debug, PartialEq)]
pub struct ScanPoint {
    pub theta: Vec<f64>,
    pub lambda: Complex64,
    pub gap_ratio: f64,
    pub near_degenerate: bool,
}

/// Leading eigenvalues over the uniform grid `2 pi j / resolution`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralScan {
    pub resolution: usize,
    pub dim: usize,
    pub points: Vec<ScanPoint>,
    /// `|lambda_0 - 1|`.
    pub origin_error: f64,
    pub max_imaginary: f64,
    pub max_modulus: f64,
}

fn grid(resolution: usize, dim: usize) -> Vec<CharacterPoint> {
    let total = resolution.pow(dim as u32);
    (0..total)
        .map(|mut idx| {
            let mut th = vec![0.0; dim];
            for slot in th.iter_mut().rev() {
                *slot = TAU * (idx % resolution) as f64 / resolution as f64;
                idx /= resolution;
            }
            CharacterPoint { theta: th }
        })
        .collect()
}

/// Leading eigenvalue at every point of the `resolution^d` grid.
pub fn spectral_scan(system: &GibbsMarkovSystem, cocycle: &Cocycle, resolution: usize) -> Result<SpectralScan> {
    if resolution < 16 {
        return Err(Error::validation("spectral scans need at least 16 points per dimension"));
    }
    let tw = Twister::new(system, cocycle)?;
    let dim = character_rank(cocycle.group())?;
    if (resolution as f64).powi(dim as i32) > 1e7 {
        return Err(Error::resource("scan grid points", 10_000_000, None));
    }
    let points: Vec<ScanPoint> = grid(resolution, dim)
        .par_iter()
        .map(|th| {
            let e = leading_eigenvalue(&tw.steady(th))?;
            Ok(ScanPoint {
                theta: th.theta.clone(),
                lambda: e.lambda,
                gap_ratio: e.gap_ratio,
                near_degenerate: e.near_degenerate,
            })
        })
        .collect::<Result<_>>()?;
    let origin_error = (points[0].lambda - Complex64::new(1.0, 0.0)).norm();
    let max_imaginary = points.iter().map(|p| p.lambda.im.abs()).fold(0.0, f64::max);
    let max_modulus = points.iter().map(|p| p.lambda.norm()).fold(0.0, f64::max);
    Ok(SpectralScan {
        resolution,
        dim,
        points,
        origin_error,
        max_imaginary,
        max_modulus,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct AperiodicityScan {
    pub epsilon: f64,
    pub resolution: usize,
    /// Maximum over grid points outside the `epsilon`-ball.
    pub grid_max: f64,
    /// Grid maximum refined by a local search constrained to `|theta| >= epsilon`.
    pub max_modulus: f64,
    pub argmax: Vec<f64>,
    pub passes: bool,
    /// Verdict of the lattice-spanning check, reported alongside.
    pub algebraic_full: bool,
    pub agrees_with_algebraic: bool,
}

/// Threshold below one that a scan must clear.
pub const SCAN_MARGIN: f64 = 1e-9;

/// Sup of `|lambda_theta|` off the `epsilon`-ball.
pub fn aperiodicity_scan(
    system: &GibbsMarkovSystem,
    cocycle: &Cocycle,
    resolution: usize,
    epsilon: f64,
) -> Result<AperiodicityScan> {
    if !(epsilon > 0.0 && epsilon < PI) {
        return Err(Error::validation("scan radius must lie in (0, pi)"));
    }
    let scan = spectral_scan(system, cocycle, resolution)?;
    let tw = Twister::new(system, cocycle)?;
    let modulus = |th: &CharacterPoint| -> f64 { leading_eigenvalue(&tw.steady(th)).map(|e| e.lambda.norm()).unwrap_or(0.0) };
    let (mut best, mut grid_max) = (None::<Vec<f64>>, -1.0);
    for p in &scan.points {
        let th = CharacterPoint { theta: p.theta.clone() };
        if th.norm() >= epsilon && p.lambda.norm() > grid_max {
            grid_max = p.lambda.norm();
            best = Some(th.centered());
        }
    }
    let start = best.ok_or_else(|| Error::validation("no grid point lies outside the scan radius"))?;
    let project = |x: &mut Vec<f64>| {
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if r < epsilon {
            if r == 0.0 {
                x[0] = epsilon;
            } else {
                x.iter_mut().for_each(|v| *v *= epsilon / r);
            }
        }
    };
    // compass search from the grid argmax
    let mut x = start;
    let mut fx = modulus(&CharacterPoint::new(x.clone()));
    let mut h = TAU / resolution as f64;
    while h > 1e-12 {
        let mut improved = false;
        for j in 0..x.len() {
            for sign in [1.0, -1.0] {
                let mut y = x.clone();
                y[j] += sign * h;
                project(&mut y);
                let fy = modulus(&CharacterPoint::new(y.clone()));
                if fy > fx {
                    x = y;
                    fx = fy;
                    improved = true;
                }
            }
        }
        if !improved {
            h *= 0.5;
        }
    }
    let max_modulus = fx.max(grid_max);
    let passes = max_modulus < 1.0 - SCAN_MARGIN;
    let algebraic_full = check_aperiodicity_algebraic(system, cocycle)?.full;
    Ok(AperiodicityScan {
        epsilon,
        resolution,
        grid_max,
        max_modulus,
        argmax: CharacterPoint::new(x).theta,
        passes,
        algebraic_full,
        agrees_with_algebraic: passes == algebraic_full,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Characteristic {
    pub n: usize,
    /// Twisted matrix power applied from the empty word.
    pub matrix_path: Complex64,
    /// `sum_g mu^n(g) chi(g)` from the walk law.
    pub direct_path: Complex64,
}

/// `E[chi_theta(psi_n)]` by two independent paths that must agree.
pub fn characteristic_function(walk: &Walk<'_, f64>, theta: &CharacterPoint, n: usize) -> Result<Characteristic> {
    let group = walk.cocycle.group();
    check_theta(group, theta)?;
    let tw = Twister::new(walk.system, walk.cocycle)?;
    let matrix_path = tw.characteristic(theta, n);
    let table = walk.distribution(n)?;
    let direct_path: Complex64 = table
        .group_marginal()
        .iter()
        .map(|(g, p)| theta.phase(&group.abelianize(g)) * *p)
        .sum();
    if (matrix_path - direct_path).norm() > PATH_TOL {
        return Err(Error::Consistency(format!(
            "characteristic function paths disagree at n = {n}: {matrix_path} vs {direct_path}"
        )));
    }
    Ok(Characteristic {
        n,
        matrix_path,
        direct_path,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct FourierInversion {
    pub n: usize,
    pub grid: usize,
    pub value: f64,
    /// The law of `psi_n` at `g` from the forward computation.
    pub exact: f64,
    pub error: f64,
    /// `M > 2 n R + 1`, where `R` bounds the increments.
    pub band_limited: bool,
}

/// `mu^n(g)` by the `M^d`-point trapezoid rule on the dual torus.
pub fn fourier_invert(walk: &Walk<'_, f64>, g: &GroupElement, n: usize, m: usize) -> Result<FourierInversion> {
    let group = walk.cocycle.group();
    if !group.is_free_abelian() {
        return Err(Error::Unsupported(
            "Fourier inversion recovers point masses only on free abelian targets".into(),
        ));
    }
    group.validate_key(g.key())?;
    let dim = character_rank(group)?;
    if m == 0 || (m as f64).powi(dim as i32) > 1e7 {
        return Err(Error::validation("inversion grid must have between 1 and 1e7 points"));
    }
    let tw = Twister::new(walk.system, walk.cocycle)?;
    let ab = group.abelianize(g);
    let neg: Vec<i64> = ab.iter().map(|x| -x).collect();
    let sum: Complex64 = grid(m, dim)
        .par_iter()
        .map(|th| th.phase(&neg) * tw.characteristic(th, n))
        .sum();
    let value = sum.re / (m as f64).powi(dim as i32);
    let exact = walk.distribution(n)?.group_mass(g);
    let error = (value - exact).abs();
    let r = walk.cocycle.abelian_radius() as f64;
    let band_limited = m as f64 > 2.0 * n as f64 * r + 1.0;
    if error > PATH_TOL {
        return Err(Error::Consistency(format!(
            "Fourier inversion differs from the forward law by {error:e} at n = {n}{}",
            if band_limited { "" } else { "; grid too coarse, aliasing (need M > 2nR+1)" }
        )));
    }
    Ok(FourierInversion {
        n,
        grid: m,
        value,
        exact,
        error,
        band_limited,
    })
}

/// Relative tolerance of the adaptive quadrature.
pub const QUAD_TOL: f64 = 1e-12;

/// Adaptive Gauss-Legendre on `[a, b]`: a panel is accepted when its value
/// agrees with the sum over its two halves.
pub fn adaptive_integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, rel_tol: f64) -> f64 {
    let rule = GaussLegendre::new(NonZeroUsize::new(12).expect("nonzero"));
    const PANELS: usize = 64;
    let h = (b - a) / PANELS as f64;
    let coarse: Vec<(f64, f64, f64)> = (0..PANELS)
        .map(|i| {
            let (lo, hi) = (a + i as f64 * h, a + (i + 1) as f64 * h);
            (lo, hi, rule.integrate(lo, hi, f))
        })
        .collect();
    let scale = coarse.iter().map(|p| p.2.abs()).sum::<f64>().max(f64::MIN_POSITIVE);
    let mut total = 0.0;
    let mut stack: Vec<(f64, f64, f64, u32)> = coarse.into_iter().map(|(l, h, v)| (l, h, v, 0)).collect();
    while let Some((lo, hi, whole, depth)) = stack.pop() {
        let mid = 0.5 * (lo + hi);
        let left = rule.integrate(lo, mid, f);
        let right = rule.integrate(mid, hi, f);
        let width = (hi - lo) / (b - a);
        if (left + right - whole).abs() <= rel_tol * scale * width.max(1e-6) || depth >= 40 {
            total += left + right;
        } else {
            stack.push((lo, mid, left, depth + 1));
            stack.push((mid, hi, right, depth + 1));
        }
    }
    total
}

/// Integral of `f` over the Euclidean ball of radius `r` in `R^d`, by
/// nested adaptive quadrature.
fn ball_integrate(f: &(dyn Fn(&[f64]) -> f64 + Sync), d: usize, r: f64, rel_tol: f64) -> f64 {
    fn nest(f: &(dyn Fn(&[f64]) -> f64 + Sync), prefix: &mut Vec<f64>, d: usize, r2: f64, tol: f64) -> f64 {
        let rem = (r2 - prefix.iter().map(|x| x * x).sum::<f64>()).max(0.0).sqrt();
        if prefix.len() + 1 == d {
            let g = |x: f64| {
                let mut p = prefix.clone();
                p.push(x);
                f(&p)
            };
            return adaptive_integrate(&g, -rem, rem, tol);
        }
        let cell = std::cell::RefCell::new(prefix.clone());
        let g = |x: f64| {
            let mut p = cell.borrow().clone();
            p.push(x);
            nest(f, &mut p, d, r2, tol)
        };
        adaptive_integrate(&g, -rem, rem, tol)
    }
    nest(f, &mut Vec::new(), d, r * r, rel_tol)
}

/// Real leading eigenvalue at a dual point; errors unless it is real.
fn real_lambda(tw: &Twister, th: &CharacterPoint) -> Result<f64> {
    let e = leading_eigenvalue(&tw.steady(th))?;
    if e.lambda.im.abs() > PATH_TOL {
        return Err(Error::Validation(format!(
            "symmetry violation: Im lambda = {:e} at theta = {:?}",
            e.lambda.im,
            th.theta()
        )));
    }
    Ok(e.lambda.re)
}

/// Dual variable of the local limit: internal torus for lattice targets,
/// ambient `R^D` for embedded lattices.
fn dual_dim(group: &GroupSpec) -> Result<usize> {
    Ok(match group.real_basis() {
        Some(b) => b.ambient_dim(),
        None => character_rank(group)?,
    })
}

fn dual_point(group: &GroupSpec, x: &[f64]) -> CharacterPoint {
    match group.real_basis() {
        Some(b) => theta_from_real(b, x),
        None => CharacterPoint::new(x.to_vec()),
    }
}

/// `u_n(eta) = int_{|theta| <= eta} lambda_theta^n dtheta` against Lebesgue
/// measure on the dual variable.
pub fn u_n_integral(system: &GibbsMarkovSystem, cocycle: &Cocycle, eta: f64, n: usize) -> Result<f64> {
    let group = cocycle.group();
    let d = dual_dim(group)?;
    if !(eta > 0.0) || (group.real_basis().is_none() && eta > PI) {
        return Err(Error::validation("eta must lie in (0, pi] on a lattice dual"));
    }
    let tw = Twister::new(system, cocycle)?;
    let failure = std::sync::Mutex::new(None::<Error>);
    let f = |x: &[f64]| -> f64 {
        match real_lambda(&tw, &dual_point(group, x)) {
            Ok(l) => l.powi(n as i32),
            Err(e) => {
                failure.lock().expect("poisoned").get_or_insert(e);
                0.0
            }
        }
    };
    let tol = if d == 1 { QUAD_TOL } else { 1e-9 };
    let value = ball_integrate(&f, d, eta, tol);
    if let Some(e) = failure.into_inner().expect("poisoned") {
        return Err(e);
    }
    Ok(value)
}

/// What a local limit compares against.
#[derive(Clone, Debug, PartialEq)]
pub enum LocalTarget {
    Point(GroupElement),
    /// `E + embed(g)` on an embedded real lattice.
    Window(Window, GroupElement),
}

#[derive(Clone, Debug, PartialEq)]
pub struct LocalLimitRow {
    pub n: usize,
    pub mass: f64,
    pub u_n: f64,
    /// `mass (2 pi)^d / (u_n |E|)`, with `|E| = 1` for a point.
    pub normalized: f64,
    pub deviation: f64,
}

/// Deviation of `mu^n` from `u_n m_G / (2 pi)^d` along `n_grid`.
pub fn local_limit_check(
    walk: &Walk<'_, f64>,
    target: &LocalTarget,
    n_grid: &[usize],
    eta: f64,
) -> Result<Vec<LocalLimitRow>> {
    let group = walk.cocycle.group();
    let d = dual_dim(group)?;
    let mut out = Vec::with_capacity(n_grid.len());
    for &n in n_grid {
        let (mass, vol) = match target {
            LocalTarget::Point(g) => {
                if group.real_basis().is_some() {
                    return Err(Error::validation("point local limits need a discrete target; use a window"));
                }
                (walk.distribution(n)?.group_mass(g), 1.0)
            }
            LocalTarget::Window(e, g) => (window_mass(walk, e, g, n, false)?.mass, e.volume()),
        };
        let u = u_n_integral(walk.system, walk.cocycle, eta, n)?;
        let normalized = mass * TAU.powi(d as i32) / (u * vol);
        out.push(LocalLimitRow {
            n,
            mass,
            u_n: u,
            normalized,
            deviation: (normalized - 1.0).abs(),
        });
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct RealityReport {
    pub symmetry_holds: bool,
    pub symmetry_witnesses: Vec<String>,
    pub max_imaginary: f64,
    pub argmax: Vec<f64>,
    pub passes: bool,
}

/// Largest `|Im lambda_theta|` over the grid, alongside the involution check.
pub fn symmetry_reality_check(
    system: &GibbsMarkovSystem,
    cocycle: &Cocycle,
    involution: &SymmetryInvolution,
    resolution: usize,
) -> Result<RealityReport> {
    let sym = check_symmetry(system, cocycle, involution)?;
    let scan = spectral_scan(system, cocycle, resolution)?;
    let worst = scan
        .points
        .iter()
        .max_by(|a, b| a.lambda.im.abs().total_cmp(&b.lambda.im.abs()))
        .expect("nonempty grid");
    Ok(RealityReport {
        symmetry_holds: sym.holds,
        symmetry_witnesses: sym.witnesses,
        max_imaginary: worst.lambda.im.abs(),
        argmax: worst.theta.clone(),
        passes: worst.lambda.im.abs() <= PATH_TOL,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::ratio;

    fn el(v: &[i64]) -> GroupElement {
        GroupElement::from_slice(v)
    }

    fn trinomial() -> (GibbsMarkovSystem, Cocycle) {
        (
            GibbsMarkovSystem::uniform(3),
            Cocycle::new(GroupSpec::lattice(1), vec![el(&[-1]), el(&[0]), el(&[1])]).unwrap(),
        )
    }

    fn markov() -> (GibbsMarkovSystem, Cocycle) {
        let s = GibbsMarkovSystem::new(
            2,
            1,
            vec![vec![ratio(1, 2), ratio(1, 2)], vec![ratio(1, 4), ratio(3, 4)]],
            0.0,
        )
        .unwrap();
        (s, Cocycle::new(GroupSpec::lattice(1), vec![el(&[1]), el(&[-1])]).unwrap())
    }

    #[test]
    fn trinomial_eigenvalue_formula() {
        let (s, c) = trinomial();
        for th in [0.0, 0.3, 1.7, PI] {
            let a = perturbed_matrix(&s, &c, &CharacterPoint::new(vec![th])).unwrap();
            assert_eq!(a.nrows(), 1);
            let l = leading_eigenvalue(&a).unwrap().lambda;
            assert!((l.re - (1.0 + 2.0 * th.cos()) / 3.0).abs() < 1e-15 && l.im.abs() < 1e-15);
        }
    }

    #[test]
    fn markov_matrix_and_characteristic() {
        let (s, c) = markov();
        let th = CharacterPoint::new(vec![0.7]);
        let a = perturbed_matrix(&s, &c, &th).unwrap();
        assert!((a[(1, 0)] - Complex64::from_polar(0.5, -0.7)).norm() < 1e-15);
        assert!((a[(1, 1)] - Complex64::from_polar(0.75, -0.7)).norm() < 1e-15);
        let zero = leading_eigenvalue(&perturbed_matrix(&s, &c, &CharacterPoint::zero(1)).unwrap()).unwrap();
        assert!((zero.lambda - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        let w = Walk::<f64>::new(&s, &c).unwrap();
        for n in 0..6 {
            characteristic_function(&w, &th, n).unwrap();
        }
    }

    #[test]
    fn simple_walk_is_periodic_on_the_scan() {
        let s = GibbsMarkovSystem::uniform(2);
        let c = Cocycle::new(GroupSpec::lattice(1), vec![el(&[-1]), el(&[1])]).unwrap();
        let rep = aperiodicity_scan(&s, &c, 64, 0.1).unwrap();
        assert!(!rep.passes);
        assert!((rep.max_modulus - 1.0).abs() < 1e-12);
        assert!(rep.agrees_with_algebraic);
    }

    #[test]
    fn trinomial_scan_hits_the_ball_edge() {
        let (s, c) = trinomial();
        let rep = aperiodicity_scan(&s, &c, 512, 0.1).unwrap();
        assert!(rep.passes);
        assert!((rep.max_modulus - (1.0 + 2.0 * 0.1f64.cos()) / 3.0).abs() < 1e-9);
    }

    #[test]
    fn inversion_and_support() {
        let (s, c) = trinomial();
        let w = Walk::<f64>::new(&s, &c).unwrap();
        let r = fourier_invert(&w, &el(&[0]), 4, 16).unwrap();
        assert!((r.value - 19.0 / 81.0).abs() < 1e-12);
        assert!(fourier_invert(&w, &el(&[9]), 4, 16).unwrap().value.abs() < 1e-12);
        // n = 40 on 16 points aliases
        assert!(matches!(fourier_invert(&w, &el(&[0]), 40, 16), Err(Error::Consistency(_))));
    }

    #[test]
    fn u_n_identities() {
        let (s, c) = trinomial();
        assert!((u_n_integral(&s, &c, 1.0, 0).unwrap() - 2.0).abs() < 1e-12);
        let w = Walk::<f64>::new(&s, &c).unwrap();
        let mu = w.distribution(30).unwrap().group_mass(&el(&[0]));
        assert!((u_n_integral(&s, &c, PI, 30).unwrap() - TAU * mu).abs() < 1e-12);
        let rows = local_limit_check(&w, &LocalTarget::Point(el(&[0])), &[10, 20], PI).unwrap();
        assert!(rows.iter().all(|r| r.deviation < 1e-10));
    }

    #[test]
    fn asymmetric_reality_fails() {
        let s = GibbsMarkovSystem::bernoulli(vec![ratio(3, 10), ratio(7, 10)]).unwrap();
        let c = Cocycle::new(GroupSpec::lattice(1), vec![el(&[1]), el(&[-1])]).unwrap();
        let rep = symmetry_reality_check(&s, &c, &SymmetryInvolution::new(vec![1, 0]).unwrap(), 16).unwrap();
        assert!(!rep.passes && !rep.symmetry_holds);
        assert!((rep.max_imaginary - 0.4).abs() < 1e-12);
        assert!(u_n_integral(&s, &c, 1.0, 3).is_err());
    }

    #[test]
    fn finite_targets_have_no_characters() {
        let c = Cocycle::new(GroupSpec::cyclic(3), vec![el(&[0]), el(&[1]), el(&[2])]).unwrap();
        let s = GibbsMarkovSystem::uniform(3);
        assert!(matches!(perturbed_matrix(&s, &c, &CharacterPoint::zero(0)), Err(Error::Unsupported(_))));
        let l = leading_eigenvalue(&transition_matrix(&s)).unwrap();
        assert!((l.lambda.re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn power_iteration_on_a_large_chain() {
        // half uniform refresh, half rotation: spectrum {1} and a circle of radius 1/2
        let n = 70;
        let m = DMatrix::from_fn(n, n, |i, j| {
            let rot = if i == (j + 1) % n { 0.5 } else { 0.0 };
            Complex64::new(0.5 / n as f64 + rot, 0.0)
        });
        let e = leading_eigenvalue(&m).unwrap();
        assert!(!e.dense);
        assert!((e.lambda - Complex64::new(1.0, 0.0)).norm() < 1e-10);
        assert!((e.second_modulus - 0.5).abs() < 1e-6);
    }
}
