use num_rational::BigRational;
use num_traits::One;
use proptest::prelude::*;

use gmlab::arith::ratio;
use gmlab::catalog;
use gmlab::pressure::{
    check_superadditive, fekete_limit, grouped_periodic_series, minimize_phi, periodic_sum, pressure_estimate,
    spectral_radius_convolution, PressureKind,
};
use gmlab::walkdist::{Walk, DEFAULT_MAX_CELLS};
use gmlab::{Exact, GibbsMarkovSystem, GroupElement, GroupSpec};

#[test]
fn return_masses_are_supermultiplicative_on_every_example() {
    for ex in catalog::all() {
        let walk = Walk::<Exact>::new(&ex.system, &ex.cocycle).unwrap();
        let id = ex.cocycle.group().identity();
        let mut s = Vec::new();
        walk.run(walk.seed(), 24, |t| {
            if t.n() > 0 {
                s.push(t.group_mass(&id));
            }
        })
        .unwrap();
        let c = ex.system.gibbs_constant();
        let d = BigRational::one() / (c * c);
        assert!(check_superadditive(&s, &d).holds, "{}", ex.name);
    }
}

#[test]
fn periodic_sums_sum_to_base_sums() {
    // Z_a^n = sum over g of Z_{a,g}^n, on a chain with memory
    let ex = catalog::example("markov_two_state").unwrap();
    for n in 1..=8 {
        let table = gmlab::pressure::grouped_periodic_table::<Exact>(&ex.system, &ex.cocycle, 1, n).unwrap();
        let total: BigRational = table.iter().map(|e| &e.1).sum();
        assert_eq!(total, periodic_sum::<Exact>(&ex.system, 1, n).unwrap());
    }
}

#[test]
fn symmetric_extension_pressure_is_returned_mass_rate() {
    let ex = catalog::example("trinomial").unwrap();
    let r = pressure_estimate::<f64>(PressureKind::Extension, &ex.system, &ex.cocycle, 1, 400).unwrap();
    assert!(r.fekete.holds);
    let (lo, hi) = r.bracket();
    assert!(lo <= 0.0 && hi == 0.0);
    // Z_{a,e}^n decays polynomially, so the rate tends to 0
    assert!(r.rates[399].abs() < 0.02);
    assert!(r.fekete.extrapolated.unwrap().abs() < 2e-3);
}

#[test]
fn convolution_kth_roots_sit_inside_the_bracket() {
    let law = vec![
        (GroupElement::from_slice(&[1, 0]), ratio(2, 5)),
        (GroupElement::from_slice(&[-1, 0]), ratio(1, 5)),
        (GroupElement::from_slice(&[0, 1]), ratio(1, 5)),
        (GroupElement::from_slice(&[0, -1]), ratio(1, 5)),
    ];
    let r = spectral_radius_convolution::<f64>(&GroupSpec::lattice(2), &law, 60, 2, DEFAULT_MAX_CELLS).unwrap();
    let (lo, hi) = r.bracket();
    assert!(r.kth_roots.iter().all(|&x| x <= lo + 1e-15 && x <= hi));
    let phi = minimize_phi(&[(vec![1, 0], 0.4), (vec![-1, 0], 0.2), (vec![0, 1], 0.2), (vec![0, -1], 0.2)])
        .unwrap()
        .phi;
    assert!(lo <= phi && (r.corrected - phi).abs() < 5e-3);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn periodic_sums_are_almost_superadditive(
        w in prop::collection::vec(prop::collection::vec(1i64..=6, 2), 2),
        a in 0usize..2,
    ) {
        let rows = w
            .into_iter()
            .map(|r| {
                let t: i64 = r.iter().sum();
                r.into_iter().map(|x| ratio(x, t)).collect()
            })
            .collect();
        let s = GibbsMarkovSystem::new(2, 1, rows, 0.0).unwrap();
        let sums = grouped_periodic_series::<Exact>(
            &s,
            &gmlab::Cocycle::new(GroupSpec::cyclic(1), vec![GroupElement::from_slice(&[0]); 2]).unwrap(),
            a,
            &GroupElement::from_slice(&[0]),
            16,
            DEFAULT_MAX_CELLS,
        )
        .unwrap();
        let c = s.gibbs_constant();
        let d = BigRational::one() / (c * c);
        prop_assert!(check_superadditive(&sums, &d).holds);
        let logs: Vec<f64> = sums.iter().map(|x| gmlab::arith::rational_ln(x)).collect();
        let rep = fekete_limit(&logs, gmlab::arith::rational_ln(&d));
        prop_assert!(rep.holds);
        // a stochastic base has zero pressure
        prop_assert!(rep.lower <= 1e-12);
    }

    #[test]
    fn symmetric_laws_minimise_at_origin(pts in prop::collection::vec((prop::collection::vec(-3i64..=3, 2), 1u32..5), 1..5)) {
        let mut law = Vec::new();
        for (v, w) in &pts {
            if v.iter().all(|&x| x == 0) {
                continue;
            }
            law.push((v.clone(), *w as f64));
            law.push((v.iter().map(|x| -x).collect(), *w as f64));
        }
        prop_assume!(!law.is_empty());
        let total: f64 = law.iter().map(|p| p.1).sum();
        law.iter_mut().for_each(|p| p.1 /= total);
        let r = minimize_phi(&law).unwrap();
        prop_assert!(r.x.iter().map(|x| x * x).sum::<f64>().sqrt() <= 1e-10);
        prop_assert!((r.phi - 1.0).abs() <= 1e-12);
    }
}
