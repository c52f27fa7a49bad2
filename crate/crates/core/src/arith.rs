//! Arithmetic backends for mass tables.
//!
//! Tables are propagated with one of two numeric types:
//!
//! * `f64` for production runs;
//! * [`Exact`], a nonnegative big integer numerator. An exact table carries a
//!   single common denominator (its *scale*), so a step multiplies numerators
//!   by integer kernel weights and the scale by the kernel's common
//!   denominator. No gcd normalisation happens inside the hot loop.
//!
//! Reported values are `f64` or [`BigRational`] respectively, see
//! [`Arith::Value`].

use std::fmt::{self, Debug, Display};

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Arithmetic mode selected for a computation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    Rational,
    Float,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Rational => "rational",
            Mode::Float => "float",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "rational" | "exact" => Ok(Mode::Rational),
            "float" => Ok(Mode::Float),
            other => Err(format!(
                "unknown arithmetic mode `{other}` (expected rational or float)"
            )),
        }
    }
}

/// Exact nonnegative numerator; the meaning depends on the owning table's scale.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct Exact(pub BigUint);

impl Debug for Exact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Reported value type: ordered, divisible, convertible to `f64`.
pub trait Value: Clone + Debug + Display + PartialEq + PartialOrd + Send + Sync + 'static {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    /// Division; callers guarantee a nonzero divisor.
    fn div(&self, other: &Self) -> Self;
    fn to_f64(&self) -> f64;
    fn from_rational(r: &BigRational) -> Self;
    /// Natural logarithm as `f64`, exact inputs are converted with care for
    /// very small magnitudes. Returns `-inf` for zero.
    fn ln(&self) -> f64;
}

impl Value for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn div(&self, other: &Self) -> Self {
        self / other
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn from_rational(r: &BigRational) -> Self {
        rational_to_f64(r)
    }
    fn ln(&self) -> f64 {
        f64::ln(*self)
    }
}

impl Value for BigRational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn div(&self, other: &Self) -> Self {
        self / other
    }
    fn to_f64(&self) -> f64 {
        rational_to_f64(self)
    }
    fn from_rational(r: &BigRational) -> Self {
        r.clone()
    }
    fn ln(&self) -> f64 {
        rational_ln(self)
    }
}

/// Numeric type stored in mass tables and kernels.
pub trait Arith: Clone + Debug + PartialEq + Send + Sync + 'static {
    type Value: Value;
    const MODE: Mode;

    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn add_assign(&mut self, other: &Self);
    /// `self += a * b`.
    fn add_product(&mut self, a: &Self, b: &Self);

    /// Encodes exact weights as kernel entries plus a common denominator.
    /// For floats the denominator is always 1.
    fn encode(weights: &[BigRational]) -> (Vec<Self>, BigUint);

    /// Reads a stored numerator under the given table scale.
    fn value(&self, scale: &BigUint) -> Self::Value;

    /// Numerator representing `v` under `scale`; `None` when not representable
    /// (exact mode requires `v * scale` to be an integer).
    fn from_value(v: &Self::Value, scale: &BigUint) -> Option<Self>;

    fn approx(&self, scale: &BigUint) -> f64 {
        self.value(scale).to_f64()
    }
}

impl Arith for f64 {
    type Value = f64;
    const MODE: Mode = Mode::Float;

    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    #[inline]
    fn add_assign(&mut self, other: &Self) {
        *self += *other;
    }
    #[inline]
    fn add_product(&mut self, a: &Self, b: &Self) {
        *self += a * b;
    }
    fn encode(weights: &[BigRational]) -> (Vec<Self>, BigUint) {
        (
            weights.iter().map(rational_to_f64).collect(),
            BigUint::one(),
        )
    }
    fn value(&self, _scale: &BigUint) -> f64 {
        *self
    }
    fn from_value(v: &f64, _scale: &BigUint) -> Option<Self> {
        Some(*v)
    }
}

impl Arith for Exact {
    type Value = BigRational;
    const MODE: Mode = Mode::Rational;

    fn zero() -> Self {
        Exact(BigUint::zero())
    }
    fn one() -> Self {
        Exact(BigUint::one())
    }
    fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
    #[inline]
    fn add_assign(&mut self, other: &Self) {
        self.0 += &other.0;
    }
    #[inline]
    fn add_product(&mut self, a: &Self, b: &Self) {
        if b.0.is_one() {
            self.0 += &a.0;
        } else if a.0.is_one() {
            self.0 += &b.0;
        } else if !a.0.is_zero() && !b.0.is_zero() {
            self.0 += &a.0 * &b.0;
        }
    }
    fn encode(weights: &[BigRational]) -> (Vec<Self>, BigUint) {
        let mut denom = BigInt::one();
        for w in weights {
            assert!(!w.is_negative(), "kernel weights are nonnegative");
            denom = denom.lcm(w.denom());
        }
        let nums = weights
            .iter()
            .map(|w| {
                let n = w.numer() * (&denom / w.denom());
                Exact(n.to_biguint().expect("nonnegative numerator"))
            })
            .collect();
        (nums, denom.to_biguint().expect("positive denominator"))
    }
    fn value(&self, scale: &BigUint) -> BigRational {
        BigRational::new(BigInt::from(self.0.clone()), BigInt::from(scale.clone()))
    }
    fn from_value(v: &BigRational, scale: &BigUint) -> Option<Self> {
        if v.is_negative() {
            return None;
        }
        let scaled = v * BigRational::from_integer(BigInt::from(scale.clone()));
        if !scaled.is_integer() {
            return None;
        }
        scaled.to_integer().to_biguint().map(Exact)
    }
}

/// Converts a rational to the nearest-ish `f64`, robust for huge numerators
/// and denominators (shifts both to 64 significant bits first).
pub fn rational_to_f64(r: &BigRational) -> f64 {
    if Zero::is_zero(r) {
        return 0.0;
    }
    if let (Some(n), Some(d)) = (r.numer().to_f64(), r.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && n.abs() < 1e300 && d < 1e300 {
            return n / d;
        }
    }
    let sign = if r.is_negative() { -1.0 } else { 1.0 };
    let n = r.numer().abs();
    let d = r.denom().clone();
    let nb = n.bits() as i64;
    let db = d.bits() as i64;
    let ns = shift_to_bits(&n, 64);
    let ds = shift_to_bits(&d, 64);
    let exp = (nb - 64) - (db - 64);
    sign * (ns / ds) * 2f64.powi(exp as i32)
}

fn shift_to_bits(x: &BigInt, bits: u64) -> f64 {
    let b = x.bits();
    let shifted = if b > bits {
        x >> (b - bits)
    } else {
        x << (bits - b)
    };
    shifted.to_f64().unwrap_or(f64::NAN)
}

/// ln of a positive rational, exact enough for huge numerators/denominators.
pub fn rational_ln(r: &BigRational) -> f64 {
    if Zero::is_zero(r) {
        return f64::NEG_INFINITY;
    }
    if r.is_negative() {
        return f64::NAN;
    }
    let n = r.numer();
    let d = r.denom();
    ln_bigint(n) - ln_bigint(d)
}

fn ln_bigint(x: &BigInt) -> f64 {
    let b = x.bits();
    if b <= 1000 {
        if let Some(v) = x.to_f64() {
            if v.is_finite() {
                return v.ln();
            }
        }
    }
    let shift = b.saturating_sub(64);
    let top = (x >> shift).to_f64().unwrap_or(f64::NAN);
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// Parses `"1/3"`, `"0.25"`, `"3"`, or `"-2/7"` into an exact rational.
pub fn parse_rational(text: &str) -> Result<BigRational, String> {
    let t = text.trim();
    if t.is_empty() {
        return Err("empty number".into());
    }
    if let Some((n, d)) = t.split_once('/') {
        let n: BigInt = n
            .trim()
            .parse()
            .map_err(|_| format!("bad numerator in `{t}`"))?;
        let d: BigInt = d
            .trim()
            .parse()
            .map_err(|_| format!("bad denominator in `{t}`"))?;
        if d.is_zero() {
            return Err(format!("zero denominator in `{t}`"));
        }
        return Ok(BigRational::new(n, d));
    }
    let (mantissa, exponent) = match t.find(['e', 'E']) {
        Some(pos) => {
            let e: i32 = t[pos + 1..]
                .parse()
                .map_err(|_| format!("bad exponent in `{t}`"))?;
            (&t[..pos], e)
        }
        None => (t, 0),
    };
    let negative = mantissa.starts_with('-');
    let body = mantissa.trim_start_matches(['-', '+']);
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(format!("bad number `{t}`"));
    }
    if !int_part
        .chars()
        .chain(frac_part.chars())
        .all(|c| c.is_ascii_digit())
    {
        return Err(format!("bad number `{t}`"));
    }
    let digits = format!("{int_part}{frac_part}");
    let mut numer: BigInt = if digits.is_empty() {
        BigInt::zero()
    } else {
        digits.parse().unwrap()
    };
    if negative {
        numer = -numer;
    }
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10u32);
    Ok(if scale >= 0 {
        BigRational::from_integer(numer * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(numer, num_traits::pow(ten, (-scale) as usize))
    })
}

pub fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}
