//! Experiment configuration: a TOML document with `system`, `cocycle`,
//! `experiment` and `output` sections (or `example = "<name>"` in place of
//! the first two). Parsing collects every problem before giving up, and
//! records each value actually used, defaults included, for the echo.

use std::collections::BTreeSet;
use std::fmt;
use std::path::PathBuf;

use num_bigint::BigInt;
use num_rational::BigRational;
use toml::{Table, Value};

use gmlab::arith::parse_rational;
use gmlab::catalog;
use gmlab::groups::{FiniteGroup, RealBasis};
use gmlab::walkdist::{Window, DEFAULT_MAX_CELLS, DEFAULT_MAX_CYLINDERS};
use gmlab::{Cocycle, GibbsMarkovSystem, GroupElement, GroupSpec, Mode, SymmetryInvolution};

pub const KINDS: [&str; 13] = [
    "ratio",
    "cross-ratio",
    "stone",
    "window",
    "conditions",
    "spectral-scan",
    "fourier-invert",
    "local-limit",
    "mixing",
    "pressure",
    "kesten",
    "fekete",
    "oracle-compare",
];

/// Every problem found in a configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigErrors(pub Vec<String>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

/// Typed parameters of one experiment.
#[derive(Debug, Clone)]
pub enum Experiment {
    Ratio { g: GroupElement, n_start: usize, n_end: usize, stride: usize },
    CrossRatio { g: GroupElement, ns: Vec<usize> },
    Stone { e: Window, a: Window, ns: Vec<usize> },
    Window { e: Window, g: GroupElement, ns: Vec<usize>, strict: bool },
    Conditions(ConditionSpec),
    SpectralScan { resolution: usize, epsilon: f64, reality: bool },
    FourierInvert { g: GroupElement, n: usize, grid: usize },
    LocalLimit { target: LocalSpec, ns: Vec<usize>, eta: f64 },
    Mixing { n_max: usize },
    Pressure { kind: gmlab::pressure::PressureKind, n_max: usize },
    Kesten { k_max: usize, stride: usize },
    Fekete { n_max: usize, phi_stride: usize, phi_steps: usize },
    OracleCompare { n_max: usize },
}

#[derive(Debug, Clone)]
pub enum ConditionSpec {
    D { g: GroupElement, n0: usize, n1: usize, n: usize },
    C { e: Window, g: GroupElement, n0: usize, n1: usize, n: usize },
    Cm { cylinder: Vec<usize>, f: Window, a: Window, e: Window, g: GroupElement, n: usize },
}

#[derive(Debug, Clone)]
pub enum LocalSpec {
    Point(GroupElement),
    Window(Window, GroupElement),
}

#[derive(Debug, Clone)]
pub struct Config {
    pub kind: String,
    pub mode: Mode,
    pub system: GibbsMarkovSystem,
    pub cocycle: Cocycle,
    pub involution: Option<SymmetryInvolution>,
    pub experiment: Experiment,
    /// Base symbol of periodic sums and walk measures.
    pub a: usize,
    pub max_cells: usize,
    pub max_cylinders: usize,
    pub out_dir: PathBuf,
    /// `(dotted key, TOML value)` for every setting in effect.
    pub echo: Vec<(String, String)>,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub kind: Option<String>,
    pub mode: Option<Mode>,
    pub out_dir: Option<PathBuf>,
}

struct Ctx {
    errors: Vec<String>,
    echo: Vec<(String, String)>,
}

impl Ctx {
    fn err(&mut self, msg: impl Into<String>) {
        self.errors.push(msg.into());
    }
}

/// One section being read; unknown keys are reported on `finish`.
struct Section<'a> {
    name: String,
    table: Option<&'a Table>,
    used: BTreeSet<String>,
}

impl<'a> Section<'a> {
    fn new(name: &str, table: Option<&'a Table>) -> Self {
        Section {
            name: name.to_string(),
            table,
            used: BTreeSet::new(),
        }
    }

    fn raw(&mut self, key: &str) -> Option<&'a Value> {
        self.used.insert(key.to_string());
        self.table.and_then(|t| t.get(key))
    }

    fn path(&self, key: &str) -> String {
        format!("{}.{key}", self.name)
    }

    fn read<T>(&mut self, ctx: &mut Ctx, key: &str, default: Option<T>, conv: impl Fn(&Value) -> Result<T, String>) -> Option<T>
    where
        T: Clone,
    {
        let path = self.path(key);
        match self.raw(key) {
            Some(v) => match conv(v) {
                Ok(x) => {
                    ctx.echo.push((path, v.to_string()));
                    Some(x)
                }
                Err(e) => {
                    ctx.err(format!("{path}: {e}"));
                    None
                }
            },
            None => {
                if default.is_none() {
                    ctx.err(format!("{path}: missing required key"));
                }
                default
            }
        }
    }

    /// Like `read` with a default, echoing the default when absent.
    fn read_or<T: Clone>(
        &mut self,
        ctx: &mut Ctx,
        key: &str,
        default: T,
        conv: impl Fn(&Value) -> Result<T, String>,
        show: impl Fn(&T) -> Value,
    ) -> Option<T> {
        if self.table.is_some_and(|t| t.contains_key(key)) {
            self.read(ctx, key, None, conv)
        } else {
            self.used.insert(key.to_string());
            ctx.echo.push((self.path(key), show(&default).to_string()));
            Some(default)
        }
    }

    fn finish(self, ctx: &mut Ctx) {
        if let Some(t) = self.table {
            for k in t.keys() {
                if !self.used.contains(k) {
                    ctx.err(format!("{}: unknown key '{k}'", self.name));
                }
            }
        }
    }
}

fn as_usize(v: &Value) -> Result<usize, String> {
    match v {
        Value::Integer(i) if *i >= 0 => Ok(*i as usize),
        Value::Integer(i) => Err(format!("expected a nonnegative integer, got {i}")),
        other => Err(format!("expected an integer, got {}", other.type_str())),
    }
}

fn as_f64(v: &Value) -> Result<f64, String> {
    match v {
        Value::Float(x) => Ok(*x),
        Value::Integer(i) => Ok(*i as f64),
        other => Err(format!("expected a number, got {}", other.type_str())),
    }
}

fn as_bool(v: &Value) -> Result<bool, String> {
    v.as_bool().ok_or_else(|| format!("expected a boolean, got {}", v.type_str()))
}

fn as_str(v: &Value) -> Result<String, String> {
    v.as_str()
        .map(str::to_string)
        .ok_or_else(|| format!("expected a string, got {}", v.type_str()))
}

fn as_array(v: &Value) -> Result<&Vec<Value>, String> {
    v.as_array().ok_or_else(|| format!("expected an array, got {}", v.type_str()))
}

fn as_ints(v: &Value) -> Result<Vec<i64>, String> {
    match v {
        Value::Integer(i) => Ok(vec![*i]),
        Value::Array(a) => a
            .iter()
            .map(|x| x.as_integer().ok_or_else(|| format!("expected integers, got {}", x.type_str())))
            .collect(),
        other => Err(format!("expected an integer or an array of integers, got {}", other.type_str())),
    }
}

fn as_usizes(v: &Value) -> Result<Vec<usize>, String> {
    match v {
        Value::Integer(_) => Ok(vec![as_usize(v)?]),
        Value::Array(a) => a.iter().map(as_usize).collect(),
        other => Err(format!("expected an integer or an array of integers, got {}", other.type_str())),
    }
}

fn as_floats(v: &Value) -> Result<Vec<f64>, String> {
    match v {
        Value::Array(a) => a.iter().map(as_f64).collect(),
        other => Ok(vec![as_f64(other)?]),
    }
}

fn as_rational(v: &Value) -> Result<BigRational, String> {
    match v {
        Value::String(s) => parse_rational(s),
        Value::Integer(i) => Ok(BigRational::from_integer(BigInt::from(*i))),
        // shortest round-trip decimal, read exactly
        Value::Float(x) => parse_rational(&format!("{x:e}")),
        other => Err(format!("expected a rational, got {}", other.type_str())),
    }
}

fn as_window(v: &Value) -> Result<Window, String> {
    let t = v
        .as_table()
        .ok_or_else(|| format!("expected a table {{ lo = [...], hi = [...] }}, got {}", v.type_str()))?;
    for k in t.keys() {
        if k != "lo" && k != "hi" {
            return Err(format!("unknown window key '{k}'"));
        }
    }
    let lo = as_floats(t.get("lo").ok_or("window needs 'lo'")?)?;
    let hi = as_floats(t.get("hi").ok_or("window needs 'hi'")?)?;
    Window::new(lo, hi).map_err(|e| e.to_string())
}

fn ints_value(v: &[i64]) -> Value {
    Value::Array(v.iter().map(|&x| Value::Integer(x)).collect())
}

fn parse_group(v: &Value) -> Result<GroupSpec, String> {
    let (kind, t) = match v {
        Value::String(s) => (s.clone(), None),
        Value::Table(t) => (
            t.get("kind").and_then(Value::as_str).ok_or("group table needs a string 'kind'")?.to_string(),
            Some(t),
        ),
        other => return Err(format!("expected a group name or table, got {}", other.type_str())),
    };
    let allowed: &[&str] = match kind.as_str() {
        "lattice" => &["kind", "dim"],
        "cyclic" => &["kind", "order"],
        "finite" => &["kind", "table", "identity"],
        "heisenberg" => &["kind"],
        "real" => &["kind", "basis"],
        "product" => &["kind", "left", "right"],
        other => {
            return Err(format!(
                "unknown group kind '{other}' (expected lattice, cyclic, finite, heisenberg, real or product)"
            ))
        }
    };
    if let Some(t) = t {
        if let Some(k) = t.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(format!("unknown key '{k}' for a {kind} group"));
        }
    }
    let field = |name: &str| -> Result<&Value, String> {
        t.and_then(|t| t.get(name))
            .ok_or_else(|| format!("a {kind} group needs '{name}'"))
    };
    Ok(match kind.as_str() {
        "lattice" => GroupSpec::lattice(as_usize(field("dim")?)?),
        "cyclic" => {
            let n = as_usize(field("order")?)?;
            if n == 0 {
                return Err("cyclic order must be at least 1".into());
            }
            GroupSpec::cyclic(n)
        }
        "finite" => {
            let rows = as_array(field("table")?)?
                .iter()
                .map(as_usizes)
                .collect::<Result<Vec<_>, _>>()?;
            let id = t.and_then(|t| t.get("identity")).map_or(Ok(0), as_usize)?;
            GroupSpec::Finite(FiniteGroup::new(rows, id).map_err(|e| e.to_string())?)
        }
        "heisenberg" => GroupSpec::HeisenbergZ,
        "real" => {
            let vectors = as_array(field("basis")?)?
                .iter()
                .map(as_floats)
                .collect::<Result<Vec<_>, _>>()?;
            let d = vectors.first().map_or(0, Vec::len);
            GroupSpec::EmbeddedRealLattice(RealBasis::new(d, vectors).map_err(|e| e.to_string())?)
        }
        _ => GroupSpec::product(parse_group(field("left")?)?, parse_group(field("right")?)?),
    })
}

fn element(group: Option<&GroupSpec>, key: Vec<i64>) -> Result<GroupElement, String> {
    if let Some(g) = group {
        g.validate_key(&key).map_err(|e| e.to_string())?;
    }
    Ok(GroupElement::from_slice(&key))
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    match s {
        "rational" => Ok(Mode::Rational),
        "float" => Ok(Mode::Float),
        other => Err(format!("unknown mode '{other}' (expected rational or float)")),
    }
}

pub fn mode_name(m: Mode) -> &'static str {
    match m {
        Mode::Rational => "rational",
        Mode::Float => "float",
    }
}

struct Base {
    system: Option<GibbsMarkovSystem>,
    cocycle: Option<Cocycle>,
    involution: Option<SymmetryInvolution>,
}

fn read_base(doc: &Table, ctx: &mut Ctx) -> Base {
    if let Some(v) = doc.get("example") {
        if doc.contains_key("cocycle") {
            ctx.err("'example' and a [cocycle] section are mutually exclusive");
        }
        if let Some(t) = doc.get("system").and_then(Value::as_table) {
            // only the arithmetic mode may accompany a catalogue example
            for k in t.keys().filter(|k| k.as_str() != "mode") {
                ctx.err(format!("system: key '{k}' conflicts with 'example'"));
            }
        }
        let name = match as_str(v) {
            Ok(n) => n,
            Err(e) => {
                ctx.err(format!("example: {e}"));
                return Base { system: None, cocycle: None, involution: None };
            }
        };
        ctx.echo.push(("example".into(), v.to_string()));
        return match catalog::example(&name) {
            Ok(ex) => Base {
                system: Some(ex.system),
                cocycle: Some(ex.cocycle),
                involution: ex.involution,
            },
            Err(e) => {
                ctx.err(format!("example: {e}"));
                Base { system: None, cocycle: None, involution: None }
            }
        };
    }
    let sys_table = section_table(doc, "system", ctx);
    let mut s = Section::new("system", sys_table);
    if sys_table.is_none() {
        ctx.err("missing [system] section (or an 'example' key)");
    }
    let m = s.read(ctx, "alphabet", None, as_usize);
    let k = s.read_or(ctx, "order", 0, as_usize, |&k| Value::Integer(k as i64));
    let tol = s.read_or(ctx, "row_tolerance", 0.0, as_f64, |&x| Value::Float(x));
    let weights = s.read(ctx, "weights", None, |v| {
        let rows = as_array(v)?;
        // a flat array is the single row of a Bernoulli system
        if rows.iter().all(|r| !r.is_array()) {
            return Ok(vec![rows.iter().map(as_rational).collect::<Result<Vec<_>, _>>()?]);
        }
        rows.iter()
            .map(|r| as_array(r)?.iter().map(as_rational).collect::<Result<Vec<_>, _>>())
            .collect::<Result<Vec<_>, _>>()
    });
    s.read_or(ctx, "mode", "rational".to_string(), |v| as_str(v).and_then(|x| parse_mode(&x).map(|_| x)), |x| {
        Value::String(x.clone())
    });
    s.finish(ctx);
    let system = match (m, k, tol, weights) {
        (Some(m), Some(k), Some(tol), Some(w)) => match GibbsMarkovSystem::new(m, k, w, tol) {
            Ok(sys) => Some(sys),
            Err(e) => {
                ctx.err(format!("system: {e}"));
                None
            }
        },
        _ => None,
    };

    let coc_table = section_table(doc, "cocycle", ctx);
    if coc_table.is_none() {
        ctx.err("missing [cocycle] section (or an 'example' key)");
    }
    let mut c = Section::new("cocycle", coc_table);
    let group = c.read(ctx, "group", None, parse_group);
    let values = c.read(ctx, "values", None, |v| {
        as_array(v)?.iter().map(as_ints).collect::<Result<Vec<_>, _>>()
    });
    let involution = c.read(ctx, "involution", Some(None), |v| as_usizes(v).map(Some));
    c.finish(ctx);
    let mut cocycle = None;
    if let (Some(group), Some(values)) = (&group, values) {
        if let Some(m) = m {
            if values.len() != m {
                ctx.err(format!(
                    "cocycle not total: {} values for an alphabet of {m} symbols",
                    values.len()
                ));
            }
        }
        let elems: Vec<_> = values
            .into_iter()
            .enumerate()
            .filter_map(|(i, v)| match element(Some(group), v) {
                Ok(e) => Some(e),
                Err(e) => {
                    ctx.err(format!("cocycle.values[{i}]: {e}"));
                    None
                }
            })
            .collect();
        match Cocycle::new(group.clone(), elems) {
            Ok(c) => cocycle = Some(c),
            Err(e) => ctx.err(format!("cocycle: {e}")),
        }
    }
    let involution = involution.flatten().and_then(|p| {
        if let Some(m) = m {
            if p.len() != m {
                ctx.err(format!(
                    "cocycle.involution has length {}, alphabet size is {m}",
                    p.len()
                ));
                return None;
            }
        }
        SymmetryInvolution::new(p).map_err(|e| ctx.err(format!("cocycle.involution: {e}"))).ok()
    });
    Base {
        system,
        cocycle,
        involution,
    }
}

fn section_table<'a>(doc: &'a Table, name: &str, ctx: &mut Ctx) -> Option<&'a Table> {
    match doc.get(name) {
        None => None,
        Some(Value::Table(t)) => Some(t),
        Some(other) => {
            ctx.err(format!("'{name}' must be a section, got {}", other.type_str()));
            None
        }
    }
}

fn require_real(group: Option<&GroupSpec>, ctx: &mut Ctx, kind: &str) {
    if let Some(g) = group {
        if g.real_basis().is_none() {
            ctx.err(format!(
                "window experiments require an embedded real lattice (kind '{kind}', group has no real basis)"
            ));
        }
    }
}

fn read_experiment(e: &mut Section<'_>, ctx: &mut Ctx, kind: &str, group: Option<&GroupSpec>, m: Option<usize>) -> Option<Experiment> {
    let id = group.map(|g| g.identity().key().to_vec()).unwrap_or_default();
    let elem = |v: &Value| element(group, as_ints(v)?);
    let show_el = |g: &GroupElement| ints_value(g.key());
    let show_n = |n: &usize| Value::Integer(*n as i64);
    let show_f = |x: &f64| Value::Float(*x);
    let default_g = GroupElement::from_slice(&id);
    let window = |e: &mut Section<'_>, ctx: &mut Ctx, key: &str| e.read(ctx, key, None, as_window);
    let exp = match kind {
        "ratio" => {
            let g = e.read_or(ctx, "g", default_g, elem, show_el);
            let n_start = e.read_or(ctx, "n_start", 1, as_usize, show_n);
            let n_end = e.read(ctx, "n_end", None, as_usize);
            let stride = e.read_or(ctx, "stride", 1, as_usize, show_n);
            Experiment::Ratio {
                g: g?,
                n_start: n_start?,
                n_end: n_end?,
                stride: stride?,
            }
        }
        "cross-ratio" => {
            let g = e.read(ctx, "g", None, elem);
            let ns = e.read(ctx, "n", None, as_usizes);
            Experiment::CrossRatio { g: g?, ns: ns? }
        }
        "stone" => {
            require_real(group, ctx, kind);
            let ew = window(e, ctx, "window_e");
            let aw = window(e, ctx, "window_a");
            let ns = e.read(ctx, "n", None, as_usizes);
            Experiment::Stone { e: ew?, a: aw?, ns: ns? }
        }
        "window" => {
            require_real(group, ctx, kind);
            let ew = window(e, ctx, "window_e");
            let g = e.read_or(ctx, "g", default_g, elem, show_el);
            let ns = e.read(ctx, "n", None, as_usizes);
            let strict = e.read_or(ctx, "strict", false, as_bool, |&b| Value::Boolean(b));
            Experiment::Window {
                e: ew?,
                g: g?,
                ns: ns?,
                strict: strict?,
            }
        }
        "conditions" => {
            let which = e.read_or(ctx, "condition", "D".to_string(), as_str, |s| Value::String(s.clone()))?;
            let g = e.read_or(ctx, "g", default_g, elem, show_el);
            e.read_or(ctx, "max_cylinders", DEFAULT_MAX_CYLINDERS, as_usize, show_n);
            match which.as_str() {
                "D" => {
                    let n0 = e.read_or(ctx, "n0", 1, as_usize, show_n);
                    let n1 = e.read_or(ctx, "n1", 3, as_usize, show_n);
                    let n = e.read(ctx, "n", None, as_usize);
                    Experiment::Conditions(ConditionSpec::D { g: g?, n0: n0?, n1: n1?, n: n? })
                }
                "C" => {
                    require_real(group, ctx, kind);
                    let ew = window(e, ctx, "window_e");
                    let n0 = e.read_or(ctx, "n0", 1, as_usize, show_n);
                    let n1 = e.read_or(ctx, "n1", 3, as_usize, show_n);
                    let n = e.read(ctx, "n", None, as_usize);
                    Experiment::Conditions(ConditionSpec::C { e: ew?, g: g?, n0: n0?, n1: n1?, n: n? })
                }
                "CM" => {
                    require_real(group, ctx, kind);
                    let cyl = e.read(ctx, "cylinder", None, as_usizes);
                    if let (Some(c), Some(m)) = (&cyl, m) {
                        if c.iter().any(|&s| s >= m) {
                            ctx.err(format!("experiment.cylinder: symbols must lie below {m}"));
                        }
                    }
                    let f = window(e, ctx, "window_f");
                    let aw = window(e, ctx, "window_a");
                    let ew = window(e, ctx, "window_e");
                    let n = e.read(ctx, "n", None, as_usize);
                    Experiment::Conditions(ConditionSpec::Cm {
                        cylinder: cyl?,
                        f: f?,
                        a: aw?,
                        e: ew?,
                        g: g?,
                        n: n?,
                    })
                }
                other => {
                    ctx.err(format!("experiment.condition: unknown condition '{other}' (expected D, C or CM)"));
                    return None;
                }
            }
        }
        "spectral-scan" => {
            let resolution = e.read_or(ctx, "resolution", 64, as_usize, show_n);
            let epsilon = e.read_or(ctx, "epsilon", 0.1, as_f64, show_f);
            let reality = e.read_or(ctx, "reality", true, as_bool, |&b| Value::Boolean(b));
            Experiment::SpectralScan {
                resolution: resolution?,
                epsilon: epsilon?,
                reality: reality?,
            }
        }
        "fourier-invert" => {
            let g = e.read_or(ctx, "g", default_g, elem, show_el);
            let n = e.read(ctx, "n", None, as_usize);
            let grid = e.read_or(ctx, "grid", 128, as_usize, show_n);
            Experiment::FourierInvert { g: g?, n: n?, grid: grid? }
        }
        "local-limit" => {
            let has_window = e.table.is_some_and(|t| t.contains_key("window_e"));
            let g = e.read_or(ctx, "g", default_g, elem, show_el);
            let target = if has_window {
                require_real(group, ctx, kind);
                window(e, ctx, "window_e").map(|w| LocalSpec::Window(w, g.clone().unwrap_or_default()))
            } else {
                g.clone().map(LocalSpec::Point)
            };
            let ns = e.read(ctx, "n", None, as_usizes);
            let eta = e.read_or(ctx, "eta", std::f64::consts::PI, as_f64, show_f);
            g?;
            Experiment::LocalLimit {
                target: target?,
                ns: ns?,
                eta: eta?,
            }
        }
        "mixing" => Experiment::Mixing {
            n_max: e.read_or(ctx, "n_max", 50, as_usize, show_n)?,
        },
        "pressure" => {
            let pk = e.read_or(
                ctx,
                "pressure",
                gmlab::pressure::PressureKind::Extension,
                |v| as_str(v)?.parse().map_err(|e: gmlab::Error| e.to_string()),
                |k| Value::String(pressure_kind_name(*k).into()),
            );
            let n_max = e.read(ctx, "n_max", None, as_usize);
            Experiment::Pressure { kind: pk?, n_max: n_max? }
        }
        "kesten" => {
            let k_max = e.read(ctx, "k_max", None, as_usize);
            let stride = e.read_or(ctx, "stride", 2, as_usize, show_n);
            Experiment::Kesten {
                k_max: k_max?,
                stride: stride?,
            }
        }
        "fekete" => {
            let n_max = e.read(ctx, "n_max", None, as_usize);
            // 0 selects the smallest generating period
            let ps = e.read_or(ctx, "phi_stride", 0, as_usize, show_n);
            let pi = e.read_or(ctx, "phi_steps", 0, as_usize, show_n);
            Experiment::Fekete {
                n_max: n_max?,
                phi_stride: ps?,
                phi_steps: pi?,
            }
        }
        "oracle-compare" => {
            let n_max = e.read_or(ctx, "n_max", 6, as_usize, show_n)?;
            if n_max == 0 || n_max > 10 {
                ctx.err("experiment.n_max: oracle comparisons run for 1 <= n_max <= 10");
            }
            Experiment::OracleCompare { n_max }
        }
        _ => unreachable!("kind checked by caller"),
    };
    Some(exp)
}

pub fn pressure_kind_name(k: gmlab::pressure::PressureKind) -> &'static str {
    match k {
        gmlab::pressure::PressureKind::Base => "base",
        gmlab::pressure::PressureKind::Extension => "extension",
        gmlab::pressure::PressureKind::Abelianized => "abelianized",
    }
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str, overrides: &Overrides) -> Result<Config, ConfigErrors> {
    let doc: Table = text.parse().map_err(|e: toml::de::Error| ConfigErrors(vec![format!("syntax: {e}")]))?;
    let mut ctx = Ctx {
        errors: Vec::new(),
        echo: Vec::new(),
    };
    for k in doc.keys() {
        // `run` and `check` hold run metadata when a manifest is fed back
        if !["example", "system", "cocycle", "experiment", "output", "run", "check"].contains(&k.as_str()) {
            ctx.err(format!("unknown top-level key '{k}'"));
        }
    }
    let base = read_base(&doc, &mut ctx);
    let file_mode = doc
        .get("system")
        .and_then(|s| s.get("mode"))
        .and_then(Value::as_str)
        .and_then(|s| parse_mode(s).ok());
    let mode = overrides.mode.or(file_mode).unwrap_or(Mode::Rational);
    // the echo carries the effective mode
    ctx.echo.retain(|(k, _)| k != "system.mode");
    ctx.echo.push(("system.mode".into(), format!("\"{}\"", mode_name(mode))));

    let exp_table = section_table(&doc, "experiment", &mut ctx);
    let mut e = Section::new("experiment", exp_table);
    let file_kind = e.read(&mut ctx, "kind", Some(String::new()), as_str).unwrap_or_default();
    ctx.echo.retain(|(k, _)| k != "experiment.kind");
    let kind = match (&overrides.kind, file_kind.as_str()) {
        (Some(k), "") => k.clone(),
        (Some(k), f) if k != f => {
            ctx.err(format!("experiment.kind is '{f}' but the subcommand asks for '{k}'"));
            k.clone()
        }
        (_, f) => f.to_string(),
    };
    if kind.is_empty() {
        ctx.err("experiment.kind: missing (give it in the file or as a subcommand)");
    } else if !KINDS.contains(&kind.as_str()) {
        ctx.err(format!("experiment.kind: unknown kind '{kind}' (expected one of {})", KINDS.join(", ")));
    }
    ctx.echo.push(("experiment.kind".into(), format!("\"{kind}\"")));
    let group = base.cocycle.as_ref().map(|c| c.group().clone());
    let m = base.system.as_ref().map(|s| s.alphabet());
    let a = e.read_or(&mut ctx, "a", 0, as_usize, |&a| Value::Integer(a as i64));
    if let (Some(a), Some(m)) = (a, m) {
        if a >= m {
            ctx.err(format!("experiment.a: base symbol {a} outside the alphabet of {m} symbols"));
        }
    }
    let max_cells = e.read_or(&mut ctx, "max_cells", DEFAULT_MAX_CELLS, as_usize, |&x| Value::Integer(x as i64));
    let experiment = if KINDS.contains(&kind.as_str()) {
        read_experiment(&mut e, &mut ctx, &kind, group.as_ref(), m)
    } else {
        None
    };
    let max_cylinders = e
        .table
        .and_then(|t| t.get("max_cylinders"))
        .and_then(|v| as_usize(v).ok())
        .unwrap_or(DEFAULT_MAX_CYLINDERS);
    // a failed read may leave valid keys unvisited
    if experiment.is_some() {
        e.finish(&mut ctx);
    }

    let out_table = section_table(&doc, "output", &mut ctx);
    let mut o = Section::new("output", out_table);
    let dir = o.read_or(&mut ctx, "dir", "gmlab-out".to_string(), as_str, |s| Value::String(s.clone()));
    o.read_or(
        &mut ctx,
        "formats",
        vec!["csv".to_string()],
        |v| {
            let f = as_array(v)?.iter().map(as_str).collect::<Result<Vec<_>, _>>()?;
            match f.iter().find(|x| x.as_str() != "csv") {
                Some(bad) => Err(format!("unsupported format '{bad}' (only csv is written)")),
                None => Ok(f),
            }
        },
        |f| Value::Array(f.iter().map(|s| Value::String(s.clone())).collect()),
    );
    o.finish(&mut ctx);
    let out_dir = overrides
        .out_dir
        .clone()
        .or_else(|| dir.map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("gmlab-out"));
    ctx.echo.retain(|(k, _)| k != "output.dir");
    ctx.echo.push((
        "output.dir".into(),
        Value::String(out_dir.display().to_string()).to_string(),
    ));

    if let (Some(sys), Some(c)) = (&base.system, &base.cocycle) {
        if let Err(err) = c.check_alphabet(sys.alphabet()) {
            if !ctx.errors.iter().any(|e| e.starts_with("cocycle not total")) {
                ctx.err(format!("cocycle not total: {err}"));
            }
        }
    }
    if !ctx.errors.is_empty() {
        return Err(ConfigErrors(ctx.errors));
    }
    Ok(Config {
        kind,
        mode,
        system: base.system.expect("no errors"),
        cocycle: base.cocycle.expect("no errors"),
        involution: base.involution,
        experiment: experiment.expect("no errors"),
        a: a.expect("no errors"),
        max_cells: max_cells.expect("no errors"),
        max_cylinders,
        out_dir,
        echo: ctx.echo,
    })
}

/// A probability vector as the one-step law of a Bernoulli system.
pub fn bernoulli_law(system: &GibbsMarkovSystem, cocycle: &Cocycle) -> Option<Vec<(GroupElement, BigRational)>> {
    if !system.is_bernoulli() {
        return None;
    }
    Some(
        (0..system.alphabet())
            .map(|s| (cocycle.value(s).clone(), system.transition(0, s).clone()))
            .collect(),
    )
}
