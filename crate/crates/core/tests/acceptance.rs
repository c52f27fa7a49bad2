//! Acceptance suite: one PASS/FAIL line per criterion with its runtime.
//!
//! Exits non-zero when a criterion fails, unless it is listed in `KNOWN`
//! (reported as FAIL all the same).

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use gmlab::arith::{ratio, rational_to_f64};
use gmlab::catalog::{self, Example};
use gmlab::oracle::{oracle_distribution, oracle_periodic_sums, oracle_walk_measure, ProductOrder};
use gmlab::pressure::{
    check_superadditive, grouped_periodic_table, kesten_identity_check, minimize_phi, periodic_sum, phi_value,
    pressure_estimate, walk_measure, PressureKind, GRAD_TOL,
};
use gmlab::spectral::{
    aperiodicity_scan, character_rank, fourier_invert, leading_eigenvalue, local_limit_check, perturbed_matrix,
    symmetry_reality_check, transition_matrix, u_n_integral, CharacterPoint, LocalTarget,
};
use gmlab::walkdist::{
    check_condition_d, cross_ratio, finite_group_mixing, ratio_sequence, return_time_tail, stone_ratio, Walk,
    Window, DEFAULT_MAX_CELLS, DEFAULT_MAX_CYLINDERS,
};
use gmlab::{Exact, GroupElement, SymmetryInvolution};

/// Criteria that cannot be met as stated; see the project notes.
const KNOWN: [usize; 1] = [9];

type Outcome = Result<(bool, String), String>;

fn el(v: &[i64]) -> GroupElement {
    GroupElement::from_slice(v)
}

fn ex(name: &str) -> Example {
    catalog::example(name).expect("catalogue entry")
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn nonzero<K: Ord + Clone>(v: impl IntoIterator<Item = (K, BigRational)>) -> Vec<(K, BigRational)> {
    let mut out: Vec<_> = v.into_iter().filter(|(_, x)| !x.is_zero()).collect();
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out
}

fn oracle_equivalence() -> Outcome {
    let mut checked = 0;
    for e in catalog::all() {
        let walk = Walk::<Exact>::new(&e.system, &e.cocycle).map_err(err)?;
        let mut t = walk.seed();
        for n in 1..=10 {
            t = walk.advance(&t).map_err(err)?;
            let o = oracle_distribution(&e.system, &e.cocycle, n, ProductOrder::Left).map_err(err)?;
            let joint = nonzero(t.entries().into_iter().map(|(s, g, v)| ((walk.graph.words[s].clone(), g), v)));
            if joint != nonzero(o.joint) || nonzero(t.group_marginal()) != nonzero(o.law) {
                return Ok((false, format!("{} distribution differs at n={n}", e.name)));
            }
            let p = oracle_periodic_sums(&e.system, &e.cocycle, 0, n).map_err(err)?;
            let fast = grouped_periodic_table::<Exact>(&e.system, &e.cocycle, 0, n).map_err(err)?;
            let base = periodic_sum::<Exact>(&e.system, 0, n).map_err(err)?;
            if nonzero(fast) != nonzero(p.table) || base != p.total {
                return Ok((false, format!("{} periodic sums differ at n={n}", e.name)));
            }
            let w = walk_measure::<Exact>(&e.system, &e.cocycle, 0, n).map_err(err)?;
            let ow = oracle_walk_measure(&e.system, &e.cocycle, 0, n).map_err(err)?;
            if w.masses != ow.masses || w.pn_one != ow.pn_one {
                return Ok((false, format!("{} walk measure differs at n={n}", e.name)));
            }
            checked += 1;
        }
    }
    Ok((true, format!("{checked} (example, n) pairs exact")))
}

fn ratio_limit() -> Outcome {
    let e = ex("trinomial");
    let walk = Walk::<Exact>::new(&e.system, &e.cocycle).map_err(err)?;
    let r = ratio_sequence(&walk, &el(&[0]), 250, 1000, 1).map_err(err)?;
    let d: Vec<f64> = [250, 500, 1000].iter().map(|&n| r.deviation_at(n).expect("on grid")).collect();
    let env = r.envelope(&[250, 500, 1000]);
    let ok = d[2] <= 2e-3 && d[0] > d[1] && d[1] > d[2] && env.windows(2).all(|w| w[0] >= w[1]);
    Ok((ok, format!("deviations {:.3e} {:.3e} {:.3e}", d[0], d[1], d[2])))
}

fn cross() -> Outcome {
    let e = ex("trinomial");
    let walk = Walk::<Exact>::new(&e.system, &e.cocycle).map_err(err)?;
    let c = cross_ratio(&walk, &el(&[5]), 2000).map_err(err)?;
    let dev = (rational_to_f64(&c.value) - 1.0).abs();
    Ok((dev <= 0.02, format!("|mu(5)/mu(0) - 1| = {dev:.3e}")))
}

fn stone() -> Outcome {
    let e = ex("real_four");
    let walk = Walk::<Exact>::new(&e.system, &e.cocycle).map_err(err)?;
    let s = stone_ratio(&walk, &Window::interval(-1.0, 1.0), &Window::interval(-2.0, 2.0), 200).map_err(err)?;
    let v = rational_to_f64(&s.value);
    Ok(((v - 0.5).abs() <= 0.05, format!("ratio {v:.4}")))
}

/// `mu^n(g)` for the trinomial by direct multinomial counting.
fn trinomial_mass(n: u64, g: i64) -> f64 {
    let mut total = 0.0;
    for plus in 0..=n {
        let minus = plus as i64 - g;
        if minus < 0 || plus + minus as u64 > n {
            continue;
        }
        let zero = n - plus - minus as u64;
        let ln = ln_fact(n) - ln_fact(plus) - ln_fact(minus as u64) - ln_fact(zero) - n as f64 * 3f64.ln();
        total += ln.exp();
    }
    total
}

fn ln_fact(n: u64) -> f64 {
    (1..=n).map(|i| (i as f64).ln()).sum()
}

fn fourier() -> Outcome {
    let e = ex("trinomial");
    let walk = Walk::<f64>::new(&e.system, &e.cocycle).map_err(err)?;
    let mut worst: f64 = 0.0;
    for g in [0, 7] {
        let f = fourier_invert(&walk, &el(&[g]), 50, 128).map_err(err)?;
        let independent = (f.value - trinomial_mass(50, g)).abs();
        worst = worst.max(f.error).max(independent);
    }
    Ok((worst <= 1e-10, format!("max error {worst:.2e}")))
}

fn spectral_conditions() -> Outcome {
    let mut origin: f64 = 0.0;
    for e in catalog::all() {
        let a = match character_rank(e.cocycle.group()) {
            Ok(d) => perturbed_matrix(&e.system, &e.cocycle, &CharacterPoint::zero(d)).map_err(err)?,
            Err(_) => transition_matrix(&e.system),
        };
        let l = leading_eigenvalue(&a).map_err(err)?.lambda;
        origin = origin.max((l - num_complex::Complex64::new(1.0, 0.0)).norm());
    }
    let mut notes = vec![format!("max |lambda_0 - 1| = {origin:.1e}")];
    let mut ok = origin <= 1e-12;
    for name in ["trinomial", "z2"] {
        let e = ex(name);
        let s = aperiodicity_scan(&e.system, &e.cocycle, 64, 0.1).map_err(err)?;
        ok &= s.passes && s.agrees_with_algebraic;
        notes.push(format!("{name} sup {:.4}", s.max_modulus));
    }
    let e = ex("simple_walk");
    let s = aperiodicity_scan(&e.system, &e.cocycle, 64, 0.1).map_err(err)?;
    ok &= !s.passes && (s.max_modulus - 1.0).abs() <= 1e-9;
    notes.push(format!("simple walk sup {:.12}", s.max_modulus));
    let mut imag: f64 = 0.0;
    for name in ["trinomial", "simple_walk", "real_four", "heisenberg_symmetric"] {
        let e = ex(name);
        let r = symmetry_reality_check(&e.system, &e.cocycle, e.involution.as_ref().expect("symmetric"), 32)
            .map_err(err)?;
        ok &= r.passes && r.symmetry_holds;
        imag = imag.max(r.max_imaginary);
    }
    let e = ex("asymmetric_z");
    let flip = SymmetryInvolution::new(vec![1, 0]).map_err(err)?;
    let r = symmetry_reality_check(&e.system, &e.cocycle, &flip, 32).map_err(err)?;
    ok &= imag <= 1e-10 && !r.passes && r.max_imaginary > 1e-3;
    notes.push(format!("symmetric max |Im| {imag:.1e}, (0.3,0.7) max |Im| {:.3}", r.max_imaginary));
    Ok((ok, notes.join("; ")))
}

fn local_limit() -> Outcome {
    let e = ex("trinomial");
    let ratio_u = u_n_integral(&e.system, &e.cocycle, 0.5, 500).map_err(err)?
        / u_n_integral(&e.system, &e.cocycle, 1.0, 500).map_err(err)?;
    let walk = Walk::<f64>::new(&e.system, &e.cocycle).map_err(err)?;
    let row = local_limit_check(&walk, &LocalTarget::Point(el(&[3])), &[1000], PI).map_err(err)?.remove(0);
    let independent = (row.mass - trinomial_mass(1000, 3)).abs() / row.mass;
    let ok = (ratio_u - 1.0).abs() <= 0.01 && row.deviation <= 0.02 && independent <= 1e-9;
    Ok((ok, format!("u(0.5)/u(1) = {ratio_u:.6}; normalised local mass {:.5}", row.normalized)))
}

fn pressure() -> Outcome {
    let e = ex("asymmetric_z");
    let target = (2.0 * 0.21f64.sqrt()).ln();
    let r = pressure_estimate::<f64>(PressureKind::Extension, &e.system, &e.cocycle, 0, 1000).map_err(err)?;
    let periodic = r.rates[999];
    let returns = r.return_rates.as_ref().expect("extension")[999];
    let fk = r.return_fekete.as_ref().expect("extension");
    let consistent = r.fekete.holds && fk.holds && r.fekete.lower <= target && fk.lower <= target && target <= r.upper;
    let ok = (periodic - target).abs() <= 5e-3 && (returns - target).abs() <= 5e-3 && consistent;
    Ok((
        ok,
        format!(
            "periodic {periodic:.6}, returns {returns:.6}, target {target:.6}, fekete lower {:.6}",
            r.fekete.lower
        ),
    ))
}

fn kesten() -> Outcome {
    let e = ex("heisenberg_asymmetric");
    let law: Vec<(GroupElement, BigRational)> = e
        .cocycle
        .values()
        .iter()
        .enumerate()
        .map(|(i, g)| (g.clone(), e.system.transition(0, i).clone()))
        .collect();
    let closed = 2.0 * 0.04f64.sqrt() + 2.0 * 0.06f64.sqrt();
    let r = kesten_identity_check::<f64>(e.cocycle.group(), &law, 30, 2, DEFAULT_MAX_CELLS).map_err(err)?;
    let c = &r.convolution;
    let ok = (c.estimate - closed).abs() <= 0.05
        && r.minimizer.grad_norm <= 1e-12
        && (r.minimizer.phi - closed).abs() <= 1e-9;
    Ok((
        ok,
        format!(
            "stride ratio {:.4} vs {closed:.6}; phi(x*) err {:.1e}, grad {:.1e}; k^-gamma corrected {:.4}, fekete lower {:.4}",
            c.estimate,
            (r.minimizer.phi - closed).abs(),
            r.minimizer.grad_norm,
            c.corrected,
            c.fekete_lower
        ),
    ))
}

fn abelianization() -> Outcome {
    let e = ex("heisenberg_symmetric");
    let full = pressure_estimate::<Exact>(PressureKind::Extension, &e.system, &e.cocycle, 0, 20).map_err(err)?;
    let ab = pressure_estimate::<Exact>(PressureKind::Abelianized, &e.system, &e.cocycle, 0, 20).map_err(err)?;
    let diff = (full.rates[19] - ab.rates[19]).abs();
    let (l1, u1) = full.bracket();
    let (l2, u2) = ab.bracket();
    let overlap = l1.max(l2) <= u1.min(u2);
    Ok((
        diff <= 0.1 && overlap,
        format!("|delta| = {diff:.4}; brackets [{l1:.3}, {u1}] [{l2:.3}, {u2}]"),
    ))
}

fn superadditivity() -> Outcome {
    let mut pairs = 0;
    for e in catalog::all() {
        let walk = Walk::<Exact>::new(&e.system, &e.cocycle).map_err(err)?;
        let id = e.cocycle.group().identity();
        let mut s = Vec::with_capacity(60);
        walk.run(walk.seed(), 60, |t| {
            if t.n() > 0 {
                s.push(t.group_mass(&id));
            }
        })
        .map_err(err)?;
        let c = e.system.gibbs_constant();
        let d = BigRational::one() / (c * c);
        let r = check_superadditive(&s, &d);
        if !r.holds {
            return Ok((false, format!("{} fails at {:?}", e.name, r.witness)));
        }
        pairs += r.pairs_checked;
        if e.system.is_bernoulli() {
            let r = check_superadditive(&s, &BigRational::one());
            if !r.holds {
                return Ok((false, format!("{} fails with D = 1 at {:?}", e.name, r.witness)));
            }
        }
    }
    Ok((true, format!("{pairs} pairs, exact")))
}

fn condition_d() -> Outcome {
    let e = ex("trinomial");
    let walk = Walk::<Exact>::new(&e.system, &e.cocycle).map_err(err)?;
    let t = check_condition_d(&walk, &el(&[0]), 1, 3, 500, DEFAULT_MAX_CYLINDERS).map_err(err)?;
    let e = ex("cyclic3");
    let walk = Walk::<Exact>::new(&e.system, &e.cocycle).map_err(err)?;
    let c = check_condition_d(&walk, &el(&[0]), 1, 3, 60, DEFAULT_MAX_CYLINDERS).map_err(err)?;
    Ok((
        t.worst_deviation <= 0.01 && c.worst_deviation <= 1e-8,
        format!("trinomial {:.3e}; Z/3 {:.3e}", t.worst_deviation, c.worst_deviation),
    ))
}

fn mixing() -> Outcome {
    let e = ex("cyclic2_weighted");
    let walk = Walk::<f64>::new(&e.system, &e.cocycle).map_err(err)?;
    let m = finite_group_mixing(&walk, 50).map_err(err)?;
    let worst = m
        .deviations
        .iter()
        .map(|&(n, v)| (v - 0.5 * 0.8f64.powi(n as i32)).abs())
        .fold(0.0, f64::max);
    let tail = return_time_tail(&walk, 50).map_err(err)?;
    let exact = ratio(1, 2) * ratio(4, 5);
    let exact_check = {
        let w = Walk::<Exact>::new(&e.system, &e.cocycle).map_err(err)?;
        finite_group_mixing(&w, 1).map_err(err)?.deviations[0].1 == exact
    };
    Ok((
        worst <= 1e-12 && tail.r_squared > 0.999 && exact_check,
        format!("max |dev - 0.5*0.8^n| = {worst:.1e}; tail R^2 = {:.6}", tail.r_squared),
    ))
}

fn gradients() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(20261014);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let dim = rng.gen_range(1..=3);
        let mut law: Vec<(Vec<i64>, f64)> = (0..rng.gen_range(2..8))
            .map(|_| ((0..dim).map(|_| rng.gen_range(-3..=3)).collect(), rng.gen_range(0.05..1.0)))
            .collect();
        for i in 0..dim {
            for sign in [-1, 1] {
                let mut v = vec![0; dim];
                v[i] = sign * 2;
                law.push((v, 0.1));
            }
        }
        let total: f64 = law.iter().map(|p| p.1).sum();
        law.iter_mut().for_each(|p| p.1 /= total);
        for _ in 0..100 {
            let x: Vec<f64> = (0..dim).map(|_| rng.gen_range(-0.7..0.7)).collect();
            let p = phi_value(&law, &x);
            for i in 0..dim {
                let (mut up, mut dn) = (x.clone(), x.clone());
                up[i] += 1e-6;
                dn[i] -= 1e-6;
                let fd = (phi_value(&law, &up).value - phi_value(&law, &dn).value) / 2e-6;
                worst = worst.max((fd - p.gradient[i]).abs() / p.gradient[i].abs().max(1.0));
            }
            if !gmlab::pressure::hessian_is_psd(&law, &x) {
                return Ok((false, format!("Hessian not PSD at {x:?}")));
            }
        }
        let m = minimize_phi(&law).map_err(err)?;
        if m.grad_norm > GRAD_TOL {
            return Ok((false, format!("minimiser stalled at grad {:.1e}", m.grad_norm)));
        }
    }
    Ok((worst <= 1e-6, format!("max relative FD gap {worst:.1e}")))
}

fn main() {
    let criteria: [(usize, &str, u64, fn() -> Outcome); 14] = [
        (1, "oracle equivalence", 60, oracle_equivalence),
        (2, "ratio limit", 5, ratio_limit),
        (3, "cross ratio", 10, cross),
        (4, "stone ratio", 120, stone),
        (5, "fourier inversion", 1, fourier),
        (6, "spectral conditions", 10, spectral_conditions),
        (7, "u_n stability and local limit", 30, local_limit),
        (8, "pressure", 30, pressure),
        (9, "kesten identity", 300, kesten),
        (10, "abelianised pressure", 120, abelianization),
        (11, "superadditivity", 60, superadditivity),
        (12, "condition (D)", 60, condition_d),
        (13, "finite-group mixing", 1, mixing),
        (14, "gradients and convexity", 10, gradients),
    ];
    let filter: Option<usize> = std::env::args().nth(1).and_then(|a| a.parse().ok());
    let mut unexpected = Vec::new();
    for (id, name, budget, f) in criteria {
        if filter.is_some_and(|only| only != id) {
            continue;
        }
        let start = Instant::now();
        let outcome = f();
        let took = start.elapsed();
        let (ok, detail) = match outcome {
            Ok((ok, d)) => (ok && took <= Duration::from_secs(budget), d),
            Err(e) => (false, format!("error: {e}")),
        };
        let tag = if ok { "PASS" } else { "FAIL" };
        let note = if !ok && KNOWN.contains(&id) { " [known]" } else { "" };
        println!("{tag} {id:>2} {name} ({:.2} s, budget {budget} s){note}: {detail}", took.as_secs_f64());
        if !ok && !KNOWN.contains(&id) {
            unexpected.push(id);
        }
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
