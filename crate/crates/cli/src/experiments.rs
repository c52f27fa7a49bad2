//! One runner per experiment kind. Each returns CSV tables and labelled
//! checks; library errors propagate unchanged for the exit-code mapping.

use std::collections::BTreeMap;

use num_rational::BigRational;

use gmlab::arith::{rational_ln, rational_to_f64};
use gmlab::gm_system::check_aperiodicity_algebraic;
use gmlab::oracle::{oracle_distribution, oracle_periodic_sums, oracle_walk_measure, ProductOrder};
use gmlab::pressure::{
    check_superadditive, fekete_limit, generating_period, grouped_periodic_table, kesten_identity_check, phi_tilde_check,
    pressure_estimate, walk_measure,
};
use gmlab::spectral::{
    aperiodicity_scan, fourier_invert, local_limit_check, spectral_scan, symmetry_reality_check, LocalTarget,
};
use gmlab::walkdist::{
    check_condition_c, check_condition_cm, check_condition_d, cross_ratio, finite_group_mixing, ratio_sequence,
    return_time_tail, stone_ratio, window_mass, ConditionReport, Walk, WalkOptions,
};
use gmlab::{Arith, Error, Mode, Result, Value};

use crate::config::{bernoulli_law, ConditionSpec, Config, Experiment, LocalSpec};

#[derive(Clone, Debug, PartialEq)]
pub struct Csv {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Csv {
    fn new(name: &str, columns: &[&str]) -> Self {
        Csv {
            name: name.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub label: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Outcome {
    pub tables: Vec<Csv>,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
}

impl Outcome {
    fn check(&mut self, label: &str, passed: bool, detail: String) {
        self.checks.push(Check {
            label: label.to_string(),
            passed,
            detail,
        });
    }
}

/// Shortest round-trip scientific notation.
pub fn num(x: f64) -> String {
    format!("{x:e}")
}

fn val<V: Value>(v: &V) -> String {
    num(v.to_f64())
}

fn key(g: &gmlab::GroupElement) -> String {
    g.key().iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

/// Longest period tried when `phi_stride = 0` asks for the generating period.
const PERIOD_SEARCH: usize = 8;

pub fn run<W: Arith>(cfg: &Config) -> Result<Outcome> {
    let walk = Walk::<W>::with_options(
        &cfg.system,
        &cfg.cocycle,
        WalkOptions {
            max_cells: cfg.max_cells,
            prune: None,
        },
    )?;
    let mut out = Outcome::default();
    match &cfg.experiment {
        Experiment::Ratio { g, n_start, n_end, stride } => {
            let r = ratio_sequence(&walk, g, *n_start, *n_end, *stride)?;
            let mut t = Csv::new("ratio", &["n", "ratio", "deviation"]);
            for ((n, v), d) in r.ns.iter().zip(&r.ratios).zip(&r.deviations) {
                t.push(vec![n.to_string(), val(v), num(*d)]);
            }
            out.notes.extend(r.periodicity);
            out.tables.push(t);
        }
        Experiment::CrossRatio { g, ns } => {
            let mut t = Csv::new("cross_ratio", &["n", "ratio", "mass_g", "mass_e", "clt_reference"]);
            for &n in ns {
                let c = cross_ratio(&walk, g, n)?;
                t.push(vec![
                    n.to_string(),
                    val(&c.value),
                    val(&c.mass_g),
                    val(&c.mass_e),
                    c.clt_reference.map_or(String::new(), num),
                ]);
            }
            out.tables.push(t);
        }
        Experiment::Stone { e, a, ns } => {
            let mut t = Csv::new("stone", &["n", "ratio", "target", "deviation", "boundary_atoms"]);
            for &n in ns {
                let s = stone_ratio(&walk, e, a, n)?;
                let v = s.value.to_f64();
                t.push(vec![
                    n.to_string(),
                    num(v),
                    num(s.target),
                    num((v - s.target).abs()),
                    s.boundary_atoms.to_string(),
                ]);
            }
            out.tables.push(t);
        }
        Experiment::Window { e, g, ns, strict } => {
            let mut t = Csv::new("window", &["n", "mass", "boundary_atoms"]);
            for &n in ns {
                let w = window_mass(&walk, e, g, n, *strict)?;
                t.push(vec![n.to_string(), val(&w.mass), w.boundary_atoms.to_string()]);
            }
            out.tables.push(t);
        }
        Experiment::Conditions(spec) => {
            let rep = match spec {
                ConditionSpec::D { g, n0, n1, n } => check_condition_d(&walk, g, *n0, *n1, *n, cfg.max_cylinders)?,
                ConditionSpec::C { e, g, n0, n1, n } => {
                    check_condition_c(&walk, e, g, *n0, *n1, *n, cfg.max_cylinders)?
                }
                ConditionSpec::Cm { cylinder, f, a, e, g, n } => check_condition_cm(&walk, cylinder, f, a, e, g, *n)?,
            };
            condition_tables(&rep, &mut out);
        }
        Experiment::SpectralScan { resolution, epsilon, reality } => {
            let scan = spectral_scan(&cfg.system, &cfg.cocycle, *resolution)?;
            let mut cols: Vec<String> = (1..=scan.dim).map(|i| format!("theta_{i}")).collect();
            cols.extend(["re", "im", "modulus", "gap_ratio", "near_degenerate"].map(String::from));
            let mut t = Csv {
                name: "spectral_scan".into(),
                columns: cols,
                rows: Vec::new(),
            };
            for p in &scan.points {
                let mut row: Vec<String> = p.theta.iter().map(|x| num(*x)).collect();
                row.extend([
                    num(p.lambda.re),
                    num(p.lambda.im),
                    num(p.lambda.norm()),
                    num(p.gap_ratio),
                    p.near_degenerate.to_string(),
                ]);
                t.push(row);
            }
            out.tables.push(t);
            out.check(
                "lambda_origin",
                scan.origin_error <= 1e-12,
                format!("|lambda_0 - 1| = {:e}", scan.origin_error),
            );
            let ap = aperiodicity_scan(&cfg.system, &cfg.cocycle, *resolution, *epsilon)?;
            let detail = if ap.passes {
                format!("sup |lambda| off the {epsilon}-ball = {}", ap.max_modulus)
            } else {
                format!(
                    "periodic: sup |lambda| off the {epsilon}-ball = {} at theta = {:?} (lattice check full: {})",
                    ap.max_modulus, ap.argmax, ap.algebraic_full
                )
            };
            out.check("aperiodicity", ap.passes, detail);
            if *reality {
                if let Some(inv) = &cfg.involution {
                    let r = symmetry_reality_check(&cfg.system, &cfg.cocycle, inv, *resolution)?;
                    let mut detail = format!("max |Im lambda| = {:e} at theta = {:?}", r.max_imaginary, r.argmax);
                    if !r.symmetry_holds {
                        detail.push_str(&format!("; symmetry fails: {}", r.symmetry_witnesses.join("; ")));
                    }
                    out.check("reality", r.passes, detail);
                }
            }
        }
        Experiment::FourierInvert { g, n, grid } => {
            let fw = Walk::<f64>::with_options(&cfg.system, &cfg.cocycle, walk.options.clone())?;
            let f = fourier_invert(&fw, g, *n, *grid)?;
            let mut t = Csv::new("fourier_invert", &["n", "grid", "g", "quadrature", "exact", "error"]);
            t.push(vec![n.to_string(), grid.to_string(), key(g), num(f.value), num(f.exact), num(f.error)]);
            out.tables.push(t);
            out.check(
                "exactness",
                f.error <= 1e-10,
                format!("|quadrature - exact| = {:e} (band limited: {})", f.error, f.band_limited),
            );
        }
        Experiment::LocalLimit { target, ns, eta } => {
            let fw = Walk::<f64>::with_options(&cfg.system, &cfg.cocycle, walk.options.clone())?;
            let target = match target {
                LocalSpec::Point(g) => LocalTarget::Point(g.clone()),
                LocalSpec::Window(w, g) => LocalTarget::Window(w.clone(), g.clone()),
            };
            let rows = local_limit_check(&fw, &target, ns, *eta)?;
            let mut t = Csv::new("local_limit", &["n", "mass", "u_n", "normalized", "deviation"]);
            for r in rows {
                t.push(vec![r.n.to_string(), num(r.mass), num(r.u_n), num(r.normalized), num(r.deviation)]);
            }
            out.tables.push(t);
        }
        Experiment::Mixing { n_max } => {
            let m = finite_group_mixing(&walk, *n_max)?;
            let mut t = Csv::new("mixing", &["n", "deviation"]);
            for (n, d) in &m.deviations {
                t.push(vec![n.to_string(), val(d)]);
            }
            out.tables.push(t);
            let tail = return_time_tail(&walk, *n_max)?;
            let mut t = Csv::new("return_tail", &["n", "tail"]);
            for (n, v) in tail.tail.iter().enumerate() {
                t.push(vec![n.to_string(), val(v)]);
            }
            out.tables.push(t);
            if let Some(r) = m.rate {
                out.notes.push(format!("fitted contraction factor {}", num(r.exp())));
            }
            out.notes.push(format!(
                "return tail log-slope {} (R^2 = {})",
                num(tail.slope),
                num(tail.r_squared)
            ));
            let alg = check_aperiodicity_algebraic(&cfg.system, &cfg.cocycle)?;
            if let Some(d) = &m.diagnostic {
                out.notes.push(d.clone());
            }
            out.check(
                "aperiodicity",
                alg.full,
                if alg.full {
                    format!("differences generate all {} elements", m.order)
                } else {
                    "differences generate a proper subgroup".to_string()
                },
            );
        }
        Experiment::Pressure { kind, n_max } => {
            let r = pressure_estimate::<W>(*kind, &cfg.system, &cfg.cocycle, cfg.a, *n_max)?;
            let log_c = r.fekete.log_c;
            let lower = running_lower(&r.sums, log_c);
            let mut cols = vec!["n", "Z", "logZ_over_n", "fekete_lower"];
            if r.returns.is_some() {
                cols.extend(["return_mass", "log_return_over_n", "return_fekete_lower"]);
            }
            let mut t = Csv::new("pressure", &cols);
            let ret_lower = r.returns.as_ref().map(|m| running_lower(m, log_c));
            for i in 0..*n_max {
                let mut row = vec![(i + 1).to_string(), val(&r.sums[i]), num(r.rates[i]), num(lower[i])];
                if let (Some(m), Some(rr), Some(rl)) = (&r.returns, &r.return_rates, &ret_lower) {
                    row.extend([val(&m[i]), num(rr[i]), num(rl[i])]);
                }
                t.push(row);
            }
            out.tables.push(t);
            out.notes.push(format!(
                "bracket [{}, {}]; extrapolated {}",
                num(r.fekete.lower),
                num(r.upper),
                r.fekete.extrapolated.map_or("n/a".into(), num)
            ));
            out.check(
                "almost_superadditive",
                r.fekete.holds,
                r.fekete
                    .witness
                    .map_or(format!("{} pairs", r.fekete.pairs_checked), |w| format!("violated at {w:?}")),
            );
        }
        Experiment::Kesten { k_max, stride } => {
            let law = bernoulli_law(&cfg.system, &cfg.cocycle).ok_or_else(|| {
                Error::validation("kesten experiments need an order-0 system: its weights are the convolved law")
            })?;
            let r = kesten_identity_check::<W>(cfg.cocycle.group(), &law, *k_max, *stride, cfg.max_cells)?;
            let c = &r.convolution;
            let mut t = Csv::new("kesten_convolution", &["k", "conv_return", "kth_root", "stride_ratio"]);
            for i in 0..c.ks.len() {
                t.push(vec![
                    c.ks[i].to_string(),
                    val(&c.returns[i]),
                    num(c.kth_roots[i]),
                    num(c.stride_ratios[i]),
                ]);
            }
            out.tables.push(t);
            let d = r.minimizer.x.len();
            let mut cols: Vec<String> = (1..=d).map(|i| format!("x_{i}")).collect();
            cols.extend(["phi_min", "grad_norm"].map(String::from));
            let mut row: Vec<String> = r.minimizer.x.iter().map(|x| num(*x)).collect();
            row.extend([num(r.minimizer.phi), num(r.minimizer.grad_norm)]);
            out.tables.push(Csv {
                name: "kesten_minimizer".into(),
                columns: cols,
                rows: vec![row],
            });
            out.notes.push(format!(
                "stride ratio {}, polynomially corrected {} (gamma = {}), fekete lower {}",
                num(c.estimate),
                num(c.corrected),
                c.gamma,
                num(c.fekete_lower)
            ));
            out.check(
                "kesten_identity",
                r.holds,
                format!(
                    "|estimate - phi(x*)| = {} against bracket width {}",
                    num(r.difference),
                    num(r.bracket_width)
                ),
            );
        }
        Experiment::Fekete { n_max, phi_stride, phi_steps } => {
            let e = cfg.cocycle.group().identity();
            let mut masses = Vec::with_capacity(*n_max);
            walk.run(walk.seed(), *n_max, |t| {
                if t.n() > 0 {
                    masses.push(t.group_mass(&e));
                }
            })?;
            let c = cfg.system.gibbs_constant();
            let d = <W::Value as Value>::from_rational(&((c * c).recip()));
            let sup = check_superadditive(&masses, &d);
            let log_c = -2.0 * rational_ln(c);
            let fk = fekete_limit(&masses.iter().map(Value::ln).collect::<Vec<_>>(), log_c);
            let lower = running_lower(&masses, log_c);
            let mut t = Csv::new("fekete", &["n", "return_mass", "log_over_n", "fekete_lower"]);
            for (i, m) in masses.iter().enumerate() {
                t.push(vec![(i + 1).to_string(), val(m), num(m.ln() / (i + 1) as f64), num(lower[i])]);
            }
            out.tables.push(t);
            out.notes.push(format!("D = C^-2 = {}", num(rational_to_f64(&((c * c).recip())))));
            out.check(
                "superadditivity",
                sup.holds,
                sup.witness
                    .map_or(format!("{} pairs", sup.pairs_checked), |w| format!("violated at {w:?}")),
            );
            out.notes.push(format!("fekete lower {} at n = {:?}", num(fk.lower), fk.lower_at));
            if *phi_steps > 0 {
                let stride = match *phi_stride {
                    0 => generating_period(&cfg.system, &cfg.cocycle, cfg.a, PERIOD_SEARCH)?.s,
                    s => s,
                };
                out.notes.push(format!("phi_tilde along n = i * {stride}"));
                let p = phi_tilde_check::<W>(&cfg.system, &cfg.cocycle, cfg.a, *phi_steps, stride)?;
                let mut t = Csv::new("phi_tilde", &["i", "n", "pn_one", "phi_min", "phi_tilde", "rate"]);
                for r in &p.rows {
                    t.push(vec![
                        r.i.to_string(),
                        r.n.to_string(),
                        num(r.pn_one),
                        num(r.phi_min),
                        num(r.phi_tilde),
                        num(r.rate),
                    ]);
                }
                out.tables.push(t);
                out.check(
                    "phi_tilde_superadditivity",
                    p.holds,
                    p.witness.map_or("holds".into(), |w| format!("violated at {w:?}")),
                );
            }
        }
        Experiment::OracleCompare { n_max } => oracle_compare::<W>(cfg, &walk, *n_max, &mut out)?,
    }
    Ok(out)
}

fn running_lower<V: Value>(s: &[V], log_c: f64) -> Vec<f64> {
    let mut best = f64::NEG_INFINITY;
    s.iter()
        .enumerate()
        .map(|(i, v)| {
            best = best.max((v.ln() + log_c) / (i + 1) as f64);
            best
        })
        .collect()
}

fn condition_tables(rep: &ConditionReport, out: &mut Outcome) {
    let mut t = Csv::new("condition_offsets", &["offset", "worst_deviation"]);
    for (o, d) in &rep.per_offset {
        t.push(vec![o.to_string(), num(*d)]);
    }
    out.tables.push(t);
    let mut t = Csv::new(
        "condition_cylinders",
        &["offset", "word", "conditional", "ratio", "deviation", "epsilon"],
    );
    for r in &rep.rows {
        t.push(vec![
            r.offset.to_string(),
            r.word.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(" "),
            num(r.conditional),
            num(r.ratio),
            num(r.deviation),
            num(r.epsilon),
        ]);
    }
    out.tables.push(t);
    out.notes.push(format!(
        "condition {}: worst deviation {} (epsilon {}) at offset {}; discarded mass {}",
        rep.condition,
        num(rep.worst_deviation),
        num(rep.worst_epsilon),
        rep.best_offset,
        num(rep.discarded)
    ));
    if let Some(h) = rep.holds {
        out.check("cm_inequality", h, format!("reference {}", num(rep.reference)));
    }
}

/// Entry count, largest relative gap and exact agreement of nonzero entries.
fn compare<K: Ord + Clone, V: Value>(fast: &[(K, V)], oracle: &[(K, BigRational)]) -> (usize, f64, bool) {
    let f: BTreeMap<K, V> = fast.iter().filter(|(_, v)| !v.is_zero()).cloned().collect();
    let o: BTreeMap<K, V> = oracle
        .iter()
        .map(|(k, v)| (k.clone(), V::from_rational(v)))
        .filter(|(_, v)| !v.is_zero())
        .collect();
    let mut worst: f64 = 0.0;
    for (k, x) in &o {
        let x = x.to_f64();
        let y = f.get(k).map_or(0.0, Value::to_f64);
        worst = worst.max((x - y).abs() / x.abs());
    }
    for (k, y) in &f {
        if !o.contains_key(k) {
            worst = worst.max(y.to_f64().abs());
        }
    }
    (o.len(), worst, f == o)
}

fn oracle_compare<W: Arith>(cfg: &Config, walk: &Walk<'_, W>, n_max: usize, out: &mut Outcome) -> Result<()> {
    let exact = W::MODE == Mode::Rational;
    let mut t = Csv::new("oracle_compare", &["n", "quantity", "entries", "max_rel_error", "match"]);
    let mut all = true;
    let mut tab = walk.seed();
    for n in 1..=n_max {
        tab = walk.advance(&tab)?;
        let fast: Vec<_> = tab
            .entries()
            .into_iter()
            .map(|(s, g, v)| ((walk.graph.words[s].clone(), g), v))
            .collect();
        let o = oracle_distribution(&cfg.system, &cfg.cocycle, n, ProductOrder::Left)?;
        let dist = compare(&fast, &o.joint);
        let fp = grouped_periodic_table::<W>(&cfg.system, &cfg.cocycle, cfg.a, n)?;
        let per = compare(&fp, &oracle_periodic_sums(&cfg.system, &cfg.cocycle, cfg.a, n)?.table);
        let mut rows = vec![("distribution", dist), ("periodic_sums", per)];
        if n <= 10 {
            let w = walk_measure::<W>(&cfg.system, &cfg.cocycle, cfg.a, n)?;
            rows.push(("walk_measure", compare(&w.masses, &oracle_walk_measure(&cfg.system, &cfg.cocycle, cfg.a, n)?.masses)));
        }
        for (name, (entries, gap, equal)) in rows {
            let ok = if exact { equal } else { gap <= 1e-12 };
            all &= ok;
            t.push(vec![n.to_string(), name.into(), entries.to_string(), num(gap), ok.to_string()]);
        }
    }
    out.tables.push(t);
    out.check(
        "oracle_equivalence",
        all,
        format!("n <= {n_max}, {} comparison", if exact { "exact" } else { "relative 1e-12" }),
    );
    Ok(())
}
