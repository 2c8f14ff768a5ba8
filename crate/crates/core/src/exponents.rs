//! Critical exponents and regime classification.
//!
//! All derived constants are computed from the reciprocals `1/p`, `1/q`,
//! `1/s` so that the `+∞` sentinel enters as an exact zero. When every
//! exponent is rational (or infinite) the table is computed in exact rational
//! arithmetic; otherwise in `f64` with a relative comparison tolerance of
//! [`FLOAT_COMPARE_RTOL`].

use std::fmt;
use std::ops::{Add, Div, Mul, Sub};
use std::str::FromStr;

use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{domain, Error, Result};

/// Exact rationals used on the rational path.
pub type Rational = Ratio<i128>;

/// Relative tolerance for flag comparisons on the floating path.
pub const FLOAT_COMPARE_RTOL: f64 = 1e-12;

/// An integrability exponent: exact rational, real, or the `+∞` sentinel.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Exponent {
    Rational(Rational),
    Real(f64),
    Infinite,
}

impl Exponent {
    pub fn rational(num: i128, den: i128) -> Self {
        Exponent::Rational(Rational::new(num, den))
    }

    pub fn int(v: i128) -> Self {
        Exponent::Rational(Rational::from_integer(v))
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Exponent::Infinite)
    }

    /// `f64` value, with `+∞` for the sentinel.
    pub fn to_f64(&self) -> f64 {
        match self {
            Exponent::Rational(r) => ratio_to_f64(r),
            Exponent::Real(x) => *x,
            Exponent::Infinite => f64::INFINITY,
        }
    }

    /// `1/e` as `f64`; exactly zero for the sentinel.
    pub fn recip_f64(&self) -> f64 {
        match self {
            Exponent::Rational(r) => ratio_to_f64(&r.recip()),
            Exponent::Real(x) => 1.0 / x,
            Exponent::Infinite => 0.0,
        }
    }

    fn recip_exact(&self) -> Option<Rational> {
        match self {
            Exponent::Rational(r) => Some(r.recip()),
            Exponent::Infinite => Some(Rational::zero()),
            Exponent::Real(_) => None,
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Rational(r) if r.is_integer() => write!(f, "{}", r.numer()),
            Exponent::Rational(r) => write!(f, "{}/{}", r.numer(), r.denom()),
            Exponent::Real(x) => write!(f, "{x}"),
            Exponent::Infinite => write!(f, "inf"),
        }
    }
}

impl FromStr for Exponent {
    type Err = Error;

    /// Accepts `inf`/`infinity`, integers, `a/b` fractions and decimals.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let lower = t.to_ascii_lowercase();
        if matches!(lower.as_str(), "inf" | "+inf" | "infinity" | "+infinity") {
            return Ok(Exponent::Infinite);
        }
        if let Some((a, b)) = t.split_once('/') {
            let num: i128 = a
                .trim()
                .parse()
                .map_err(|_| Error::Parameter(format!("bad fraction numerator in {s:?}")))?;
            let den: i128 = b
                .trim()
                .parse()
                .map_err(|_| Error::Parameter(format!("bad fraction denominator in {s:?}")))?;
            if den == 0 {
                return Err(Error::Parameter(format!("zero denominator in {s:?}")));
            }
            return Ok(Exponent::Rational(Rational::new(num, den)));
        }
        if let Ok(i) = t.parse::<i128>() {
            return Ok(Exponent::int(i));
        }
        t.parse::<f64>()
            .map(|x| {
                if x.is_infinite() && x > 0.0 {
                    Exponent::Infinite
                } else {
                    Exponent::Real(x)
                }
            })
            .map_err(|_| Error::Parameter(format!("cannot parse exponent {s:?}")))
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Exponent::Rational(r) if r.is_integer() => {
                ser.serialize_i64(r.numer().to_i64().unwrap_or(i64::MAX))
            }
            Exponent::Rational(_) | Exponent::Infinite => ser.serialize_str(&self.to_string()),
            Exponent::Real(x) => ser.serialize_f64(*x),
        }
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Float(f64),
            Text(String),
        }
        match Raw::deserialize(de)? {
            Raw::Int(i) => Ok(Exponent::int(i as i128)),
            Raw::Float(x) => Ok(Exponent::Real(x)),
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

fn ratio_to_f64(r: &Rational) -> f64 {
    // i128 -> f64 division loses nothing that matters at these magnitudes.
    *r.numer() as f64 / *r.denom() as f64
}

/// The tuple `(n, p, q, s, γ)` defining a regularity regime.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemParams {
    pub n: u32,
    pub p: Exponent,
    pub q: Exponent,
    pub s: Exponent,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
}

fn default_gamma() -> f64 {
    2.0
}

impl ProblemParams {
    pub fn new(n: u32, p: Exponent, q: Exponent, s: Exponent) -> Self {
        ProblemParams { n, p, q, s, gamma: default_gamma() }
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(domain(format!("dimension n = {} must be at least 2", self.n)));
        }
        let check = |name: &str, e: &Exponent, lower: f64, strict: bool| -> Result<()> {
            let v = e.to_f64();
            let bad = v.is_nan() || if strict { v <= lower } else { v < lower };
            if bad {
                let op = if strict { ">" } else { ">=" };
                return Err(domain(format!("{name} = {e} must be {op} {lower}")));
            }
            Ok(())
        };
        check("p", &self.p, 1.0, true)?;
        check("q", &self.q, 1.0, true)?;
        check("s", &self.s, 1.0, false)?;
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(domain(format!("gamma = {} must be a positive real", self.gamma)));
        }
        Ok(())
    }

    fn exact_recips(&self) -> Option<(Rational, Rational, Rational)> {
        Some((self.p.recip_exact()?, self.q.recip_exact()?, self.s.recip_exact()?))
    }
}

/// A derived quantity. `Undefined` marks a nonpositive denominator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Quantity {
    Exact(Rational),
    Approx(f64),
    Infinite,
    Undefined,
}

impl Quantity {
    /// Finite value, if any.
    pub fn value(&self) -> Option<f64> {
        match self {
            Quantity::Exact(r) => Some(ratio_to_f64(r)),
            Quantity::Approx(x) => Some(*x),
            Quantity::Infinite | Quantity::Undefined => None,
        }
    }

    /// Value as `f64` with `+∞` for `Infinite` and NaN for `Undefined`.
    pub fn as_f64(&self) -> f64 {
        match self {
            Quantity::Infinite => f64::INFINITY,
            Quantity::Undefined => f64::NAN,
            _ => self.value().unwrap_or(f64::NAN),
        }
    }

    pub fn exact(&self) -> Option<Rational> {
        match self {
            Quantity::Exact(r) => Some(*r),
            _ => None,
        }
    }

    pub fn is_defined(&self) -> bool {
        !matches!(self, Quantity::Undefined)
    }
}

impl Serialize for Quantity {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Quantity::Exact(r) if r.is_integer() => match r.numer().to_i64() {
                Some(i) => ser.serialize_i64(i),
                None => ser.serialize_f64(self.as_f64()),
            },
            Quantity::Exact(_) | Quantity::Approx(_) => ser.serialize_f64(self.as_f64()),
            Quantity::Infinite => ser.serialize_str("inf"),
            Quantity::Undefined => ser.serialize_str("undefined"),
        }
    }
}

/// Structural-condition flags.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ExponentFlags {
    /// `1/p + 1/q < 2/(n-1)`.
    pub cond_structure: bool,
    /// `q > n/2`.
    pub cond_q_supercritical: bool,
    /// `s > s0` (false when `s0` is undefined).
    pub cond_s_admissible: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Arithmetic {
    ExactRational,
    Floating,
}

/// Sharpness status of `s0` as the threshold for boundedness.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Sharpness {
    /// Counterexamples exist at `s = s0` (n ≥ 3).
    Sharp,
    /// Planar case: `s > q/(q-1)` suffices, optimality at `q/(q-1)` is open.
    AlmostSharpConjectural,
    /// `s0` is undefined.
    NotApplicable,
}

/// All derived constants plus admissibility flags.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExponentTable {
    pub p_star: Quantity,
    pub p_prime: Quantity,
    pub s_prime: Quantity,
    pub chi: Quantity,
    pub delta: Quantity,
    pub m_star: Quantity,
    pub s0: Quantity,
    pub q_star: Quantity,
    pub flags: ExponentFlags,
    pub arithmetic: Arithmetic,
    pub s0_sharpness: Sharpness,
}

impl ExponentTable {
    /// Exact rational strings of every exact entry, keyed by field name.
    pub fn exact_strings(&self) -> Vec<(&'static str, String)> {
        self.named()
            .into_iter()
            .filter_map(|(k, q)| q.exact().map(|r| (k, Exponent::Rational(r).to_string())))
            .collect()
    }

    pub fn named(&self) -> [(&'static str, Quantity); 8] {
        [
            ("p_star", self.p_star),
            ("p_prime", self.p_prime),
            ("s_prime", self.s_prime),
            ("chi", self.chi),
            ("delta", self.delta),
            ("m_star", self.m_star),
            ("s0", self.s0),
            ("q_star", self.q_star),
        ]
    }
}

/// Arithmetic used by the shared formula code.
trait Scalar:
    Copy + PartialOrd + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Div<Output = Self>
{
    fn from_i(v: i64) -> Self;
    fn nil() -> Self {
        Self::from_i(0)
    }
    fn unit() -> Self {
        Self::from_i(1)
    }
    /// `a < b` strictly, with the path's tolerance.
    fn less(a: Self, b: Self) -> bool;
    fn same(a: Self, b: Self) -> bool;
    fn into_quantity(self) -> Quantity;
}

impl Scalar for Rational {
    fn from_i(v: i64) -> Self {
        Rational::from_integer(v as i128)
    }
    fn less(a: Self, b: Self) -> bool {
        a < b
    }
    fn same(a: Self, b: Self) -> bool {
        a == b
    }
    fn into_quantity(self) -> Quantity {
        Quantity::Exact(self)
    }
}

impl Scalar for f64 {
    fn from_i(v: i64) -> Self {
        v as f64
    }
    fn less(a: Self, b: Self) -> bool {
        a < b && !<f64 as Scalar>::same(a, b)
    }
    fn same(a: Self, b: Self) -> bool {
        (a - b).abs() <= FLOAT_COMPARE_RTOL * a.abs().max(b.abs())
    }
    fn into_quantity(self) -> Quantity {
        Quantity::Approx(self)
    }
}

fn min<T: Scalar>(a: T, b: T) -> T {
    if a < b {
        a
    } else {
        b
    }
}

fn max<T: Scalar>(a: T, b: T) -> T {
    if a < b {
        b
    } else {
        a
    }
}

/// `1/d` if `d > 0`, else `Infinite` when `d == 0`, else `Undefined`.
fn recip_or_marker<T: Scalar>(num: T, den: T) -> Quantity {
    if T::same(den, T::nil()) {
        Quantity::Infinite
    } else if den < T::nil() {
        Quantity::Undefined
    } else {
        (num / den).into_quantity()
    }
}

fn table_from_recips<T: Scalar>(n: u32, ip: T, iq: T, is: T) -> (ExponentTable, bool) {
    let n_t = T::from_i(n as i64);
    let one = T::unit();
    let two = T::from_i(2);
    let half = one / two;

    let inv_p_star = min(half + one / (n_t - one) - ip / two, one);
    let p_star = one / inv_p_star;
    let p_prime = one / (one - ip);
    let s_prime = recip_or_marker(one, one - is);
    let chi = two * inv_p_star / (one + iq);
    let delta = two - one / chi;
    let m_star = if T::less(one, delta) {
        (p_prime * delta / (delta - one) * max(ip + iq, two * iq)).into_quantity()
    } else {
        Quantity::Undefined
    };

    // s0 = n q / (2q - n) = n / (2 - n/q); undefined for q <= n/2.
    let s0_den = two - n_t * iq;
    let q_super = T::less(T::nil(), s0_den);
    let s0 = if q_super { (n_t / s0_den).into_quantity() } else { Quantity::Undefined };

    // q* = 2nq / (n(q+1) - 2q) = 2n / (n - 2 + n/q).
    let q_star = recip_or_marker(two * n_t, n_t - two + n_t * iq);

    // s > s0  <=>  1/s < (2 - n/q)/n.
    let s_adm = q_super && T::less(is, s0_den / n_t);
    let structure = T::less(ip + iq, two / (n_t - one));
    let s_equals_s0 = q_super && T::same(is, s0_den / n_t);

    let table = ExponentTable {
        p_star: p_star.into_quantity(),
        p_prime: p_prime.into_quantity(),
        s_prime,
        chi: chi.into_quantity(),
        delta: delta.into_quantity(),
        m_star,
        s0,
        q_star,
        flags: ExponentFlags {
            cond_structure: structure,
            cond_q_supercritical: q_super,
            cond_s_admissible: s_adm,
        },
        arithmetic: Arithmetic::Floating,
        s0_sharpness: if !q_super {
            Sharpness::NotApplicable
        } else if n == 2 {
            Sharpness::AlmostSharpConjectural
        } else {
            Sharpness::Sharp
        },
    };
    (table, s_equals_s0)
}

fn q_equals_half_n<T: Scalar>(n: u32, iq: T) -> bool {
    T::same(T::from_i(n as i64) * iq, T::from_i(2))
}

/// Evaluation on both paths, used by the classifier.
struct Derived {
    table: ExponentTable,
    s_equals_s0: bool,
    q_equals_half_n: bool,
}

fn derive(params: &ProblemParams) -> Result<Derived> {
    params.validate()?;
    if let Some((ip, iq, is)) = params.exact_recips() {
        let (mut table, s_eq) = table_from_recips::<Rational>(params.n, ip, iq, is);
        table.arithmetic = Arithmetic::ExactRational;
        return Ok(Derived { table, s_equals_s0: s_eq, q_equals_half_n: q_equals_half_n(params.n, iq) });
    }
    let (ip, iq, is) = (params.p.recip_f64(), params.q.recip_f64(), params.s.recip_f64());
    let (table, s_eq) = table_from_recips::<f64>(params.n, ip, iq, is);
    Ok(Derived { table, s_equals_s0: s_eq, q_equals_half_n: q_equals_half_n(params.n, iq) })
}

/// Computes every derived exponent for `params`.
pub fn derive_exponents(params: &ProblemParams) -> Result<ExponentTable> {
    derive(params).map(|d| d.table)
}

/// Same formulas on the floating path regardless of the input kind.
pub fn derive_exponents_float(params: &ProblemParams) -> Result<ExponentTable> {
    params.validate()?;
    let (ip, iq, is) = (params.p.recip_f64(), params.q.recip_f64(), params.s.recip_f64());
    Ok(table_from_recips::<f64>(params.n, ip, iq, is).0)
}

/// Critical source exponent `nq/(2q-n)` as `f64`, `None` when `q <= n/2`.
pub fn critical_source_exponent(n: u32, q: f64) -> Option<f64> {
    let den = 2.0 - n as f64 / q;
    (den > 0.0).then(|| n as f64 / den)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Regime {
    /// `q > n/2` and `s > s0`: the sup, logarithmic and Harnack bounds apply.
    Bounded,
    /// `q > n/2` and `s <= s0`: the unbounded example with `f ∈ L^{s0}` applies.
    CriticalSource,
    /// `q = n/2`.
    CriticalEigen,
    /// `(n-1)/2 < q < n/2`, `n >= 3`.
    SubcriticalEigen,
    /// `1/p + 1/q >= 2/(n-1)`.
    StructuralFail,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GoverningResult {
    SupBoundLogBoundHarnack,
    UnboundedCriticalSource,
    UnboundedCriticalEigen,
    UnboundedSubcriticalEigen,
    ExternalStructuralCounterexample,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct RegimeClassification {
    pub regime: Regime,
    pub applicable_result: GoverningResult,
    /// Set for `CriticalSource` when `s` equals `s0` (as opposed to `s < s0`).
    pub at_threshold: bool,
}

/// Assigns exactly one regime to `params`.
pub fn classify_regime(params: &ProblemParams) -> Result<RegimeClassification> {
    let d = derive(params)?;
    let f = d.table.flags;
    let (regime, at_threshold) = if !f.cond_structure {
        (Regime::StructuralFail, false)
    } else if f.cond_q_supercritical {
        if f.cond_s_admissible {
            (Regime::Bounded, false)
        } else {
            (Regime::CriticalSource, d.s_equals_s0)
        }
    } else if d.q_equals_half_n {
        (Regime::CriticalEigen, false)
    } else {
        (Regime::SubcriticalEigen, false)
    };
    let applicable_result = match regime {
        Regime::Bounded => GoverningResult::SupBoundLogBoundHarnack,
        Regime::CriticalSource => GoverningResult::UnboundedCriticalSource,
        Regime::CriticalEigen => GoverningResult::UnboundedCriticalEigen,
        Regime::SubcriticalEigen => GoverningResult::UnboundedSubcriticalEigen,
        Regime::StructuralFail => GoverningResult::ExternalStructuralCounterexample,
    };
    Ok(RegimeClassification { regime, applicable_result, at_threshold })
}
