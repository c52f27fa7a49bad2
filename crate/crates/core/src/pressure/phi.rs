//! The exponential moment function of an abelianised measure and its
//! minimisation.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::lattice;

/// A finitely supported measure on `Z^k`, weights as `f64`.
pub type AbelianLaw = [(Vec<i64>, f64)];

#[derive(Clone, Debug, PartialEq)]
pub struct PhiValue {
    pub value: f64,
    pub gradient: Vec<f64>,
    pub hessian: DMatrix<f64>,
}

fn dim_of(law: &AbelianLaw) -> usize {
    law.first().map_or(0, |p| p.0.len())
}

/// `phi(x) = sum_m exp(<m, x>) law(m)` with gradient and Hessian.
pub fn phi_value(law: &AbelianLaw, x: &[f64]) -> PhiValue {
    let k = x.len();
    let mut value = 0.0;
    let mut gradient = vec![0.0; k];
    let mut hessian = DMatrix::zeros(k, k);
    for (m, w) in law {
        let e = w * m.iter().zip(x).map(|(a, b)| *a as f64 * b).sum::<f64>().exp();
        value += e;
        for i in 0..k {
            gradient[i] += e * m[i] as f64;
            for j in 0..k {
                hessian[(i, j)] += e * (m[i] * m[j]) as f64;
            }
        }
    }
    PhiValue {
        value,
        gradient,
        hessian,
    }
}

/// Whether the Hessian of `phi` at `x` is positive semidefinite.
pub fn hessian_is_psd(law: &AbelianLaw, x: &[f64]) -> bool {
    let h = phi_value(law, x).hessian;
    if h.nrows() == 0 {
        return true;
    }
    if h.clone().cholesky().is_some() {
        return true;
    }
    let scale = h.amax().max(f64::MIN_POSITIVE);
    SymmetricEigen::new(h).eigenvalues.iter().all(|&l| l >= -1e-12 * scale)
}

#[derive(Clone, Debug, PartialEq)]
pub struct MinimizerResult {
    pub x: Vec<f64>,
    pub phi: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    /// Cholesky succeeded on the Hessian restricted to the support span.
    pub convex_certificate: bool,
    /// Orthonormal directions along which `phi` is constant.
    pub degenerate_directions: Vec<Vec<f64>>,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Target gradient norm of the Newton iteration.
pub const GRAD_TOL: f64 = 1e-12;

/// Newton's method from `0` with backtracking.
///
/// The infimum is attained exactly when the cone spanned by the support is
/// a linear subspace; otherwise some direction drives `phi` down towards
/// its infimum at infinity and a diagnostic is returned. When the support
/// spans a proper subspace the search runs inside it and the orthogonal
/// directions are reported as degenerate.
pub fn minimize_phi(law: &AbelianLaw) -> Result<MinimizerResult> {
    let law: Vec<(Vec<i64>, f64)> = law.iter().filter(|p| p.1 > 0.0).cloned().collect();
    if law.is_empty() {
        return Err(Error::validation("phi needs a nonempty positive measure"));
    }
    let k = dim_of(&law);
    let support: Vec<Vec<i64>> = law.iter().map(|p| p.0.clone()).collect();
    let herm = lattice::hermite_rows(&support, k);
    let r = herm.len();
    let coords: Vec<Vec<i64>> = support
        .iter()
        .map(|s| lattice::coordinates_in(&herm, s).expect("support lies in its own span"))
        .collect();
    if !lattice::cone_is_full(&coords, r) {
        return Err(Error::Degenerate(
            "phi is unbounded towards its infimum: the support lies in a closed half-space of its span".into(),
        ));
    }
    // orthonormal basis of the span (columns of q) and of its complement
    let (q, degenerate) = if r == k {
        (DMatrix::identity(k, k), Vec::new())
    } else {
        let gram = DMatrix::from_fn(k, k, |i, j| support.iter().map(|s| (s[i] * s[j]) as f64).sum::<f64>());
        let eig = SymmetricEigen::new(gram);
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let q = DMatrix::from_fn(k, r, |i, j| eig.eigenvectors[(i, order[j])]);
        let deg = order[r..]
            .iter()
            .map(|&c| eig.eigenvectors.column(c).iter().copied().collect())
            .collect();
        (q, deg)
    };
    let to_x = |y: &DVector<f64>| -> Vec<f64> { (&q * y).iter().copied().collect() };
    let mut y = DVector::zeros(r);
    let mut cur = phi_value(&law, &to_x(&y));
    let mut iterations = 0;
    while norm(&cur.gradient) > GRAD_TOL && iterations < 200 {
        iterations += 1;
        let g = q.transpose() * DVector::from_column_slice(&cur.gradient);
        let h = q.transpose() * &cur.hessian * &q;
        let step = match h.clone().cholesky() {
            Some(ch) => -ch.solve(&g),
            None => -&g,
        };
        let slope = g.dot(&step);
        let mut t = 1.0;
        let mut accepted = false;
        while t >= 1e-12 {
            let cand = &y + &step * t;
            let v = phi_value(&law, &to_x(&cand));
            // once the Newton decrement is at rounding level the value
            // cannot resolve progress, so the gradient decides
            let armijo = v.value <= cur.value + 1e-4 * t * slope;
            let tiny = -slope <= 1e-14 * cur.value && norm(&v.gradient) < norm(&cur.gradient);
            if armijo || tiny {
                y = cand;
                cur = v;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    let h = q.transpose() * &cur.hessian * &q;
    let x = to_x(&y);
    Ok(MinimizerResult {
        phi: cur.value,
        grad_norm: norm(&cur.gradient),
        iterations,
        convex_certificate: h.cholesky().is_some(),
        degenerate_directions: degenerate,
        x,
    })
}
