//! Exact rationals and the two-mode scalar used for set-function values.
//!
//! Rationals always travel as `"p/q"` strings (lowest terms, positive
//! denominator, `"/1"` kept for integers) so files diff bit-exactly.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Pow, Signed, ToPrimitive, Zero};
use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};

/// Arbitrary-precision rational, always kept in lowest terms.
pub type Rat = BigRational;

/// Absolute tolerance for float-mode comparisons (ties, monotonicity, bounds).
pub const FLOAT_TOL: f64 = 1e-12;

/// Builds `num/den` in lowest terms. Panics on a zero denominator.
pub fn rat(num: i64, den: i64) -> Rat {
    Rat::new(BigInt::from(num), BigInt::from(den))
}

pub fn rat_int(v: i64) -> Rat {
    Rat::from_integer(BigInt::from(v))
}

/// Canonical `"p/q"` rendering.
pub fn format_rat(r: &Rat) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parses `"p/q"`, `"p"`, or a plain decimal such as `"0.75"` or `"1e-2"`,
/// all exactly.
pub fn parse_rat(s: &str) -> Result<Rat> {
    let s = s.trim();
    if s.is_empty() {
        return Err(Error::Parse("empty rational".into()));
    }
    if s.contains('/') {
        return Rat::from_str(s).map_err(|e| Error::Parse(format!("{s:?}: {e}")));
    }
    parse_decimal(s).ok_or_else(|| Error::Parse(format!("{s:?} is not a rational")))
}

fn parse_decimal(s: &str) -> Option<Rat> {
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (negative, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part
        .chars()
        .chain(frac_part.chars())
        .all(|c| c.is_ascii_digit())
    {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let mut value = Rat::from_integer(BigInt::from_str(&digits).ok()?);
    let shift = exponent - frac_part.len() as i32;
    let ten = Rat::from_integer(BigInt::from(10));
    if shift >= 0 {
        value *= Pow::pow(&ten, shift as u32);
    } else {
        value /= Pow::pow(&ten, shift.unsigned_abs());
    }
    Some(if negative { -value } else { value })
}

/// Serde adapter for fields of type [`Rat`].
pub mod serde_rat {
    use super::*;

    pub fn serialize<S: Serializer>(r: &Rat, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format_rat(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rat, D::Error> {
        let s = String::deserialize(d)?;
        parse_rat(&s).map_err(de::Error::custom)
    }
}

/// Serde adapter for `Vec<Rat>`.
pub mod serde_rat_vec {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[Rat], s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(format_rat))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Rat>, D::Error> {
        let v = Vec::<String>::deserialize(d)?;
        v.iter()
            .map(|s| parse_rat(s).map_err(de::Error::custom))
            .collect()
    }
}

/// Which scalar representation an instance uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Float,
}

/// A set-function value: exact rational or `f64`.
///
/// Arithmetic between values of different modes is a programming error and
/// panics; instance constructors reject mixed-mode inputs up front.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Exact(Rat),
    Float(f64),
}

impl Value {
    pub fn mode(&self) -> Mode {
        match self {
            Value::Exact(_) => Mode::Exact,
            Value::Float(_) => Mode::Float,
        }
    }

    pub fn zero(mode: Mode) -> Self {
        Self::from_int(mode, 0)
    }

    pub fn one(mode: Mode) -> Self {
        Self::from_int(mode, 1)
    }

    pub fn from_int(mode: Mode, v: i64) -> Self {
        match mode {
            Mode::Exact => Value::Exact(rat_int(v)),
            Mode::Float => Value::Float(v as f64),
        }
    }

    pub fn from_ratio(mode: Mode, num: i64, den: i64) -> Self {
        match mode {
            Mode::Exact => Value::Exact(rat(num, den)),
            Mode::Float => Value::Float(num as f64 / den as f64),
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Value::Exact(r) => r.to_f64().unwrap_or(f64::NAN),
            Value::Float(x) => *x,
        }
    }

    pub fn as_rat(&self) -> Option<&Rat> {
        match self {
            Value::Exact(r) => Some(r),
            Value::Float(_) => None,
        }
    }

    /// Converts to `mode`. Float to exact is the exact binary expansion.
    pub fn to_mode(&self, mode: Mode) -> Result<Value> {
        match (self, mode) {
            (Value::Exact(_), Mode::Exact) | (Value::Float(_), Mode::Float) => Ok(self.clone()),
            (Value::Exact(r), Mode::Float) => Ok(Value::Float(r.to_f64().unwrap_or(f64::NAN))),
            (Value::Float(x), Mode::Exact) => Rat::from_float(*x)
                .map(Value::Exact)
                .ok_or_else(|| Error::ModeMismatch(format!("{x} has no exact value"))),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Value::Exact(r) => r.is_zero(),
            Value::Float(x) => *x == 0.0,
        }
    }

    pub fn is_negative(&self) -> bool {
        match self {
            Value::Exact(r) => r.is_negative(),
            Value::Float(x) => *x < 0.0,
        }
    }

    pub fn powi(&self, exp: u32) -> Value {
        match self {
            Value::Exact(r) => Value::Exact(Pow::pow(r, exp)),
            Value::Float(x) => Value::Float(x.powi(exp as i32)),
        }
    }

    pub fn recip(&self) -> Value {
        match self {
            Value::Exact(r) => Value::Exact(r.recip()),
            Value::Float(x) => Value::Float(x.recip()),
        }
    }

    /// Total order between same-mode values. Panics on mixed modes.
    pub fn cmp_same(&self, other: &Value) -> Ordering {
        match (self, other) {
            (Value::Exact(a), Value::Exact(b)) => a.cmp(b),
            (Value::Float(a), Value::Float(b)) => a.total_cmp(b),
            _ => mode_panic(),
        }
    }

    /// `self ≥ other`, exact in exact mode and with [`FLOAT_TOL`] slack in
    /// float mode.
    pub fn ge_tol(&self, other: &Value) -> bool {
        match (self, other) {
            (Value::Exact(a), Value::Exact(b)) => a >= b,
            (Value::Float(a), Value::Float(b)) => *a >= *b - FLOAT_TOL,
            _ => mode_panic(),
        }
    }

    /// Equality up to [`FLOAT_TOL`] in float mode; exact otherwise.
    pub fn approx_eq(&self, other: &Value) -> bool {
        match (self, other) {
            (Value::Exact(a), Value::Exact(b)) => a == b,
            (Value::Float(a), Value::Float(b)) => (a - b).abs() <= FLOAT_TOL,
            _ => mode_panic(),
        }
    }

    /// Strictly negative beyond tolerance.
    pub fn below_zero_tol(&self) -> bool {
        match self {
            Value::Exact(r) => r.is_negative(),
            Value::Float(x) => *x < -FLOAT_TOL,
        }
    }
}

fn mode_panic() -> ! {
    panic!("scalar mode mismatch: cannot combine exact and float values")
}

impl PartialOrd for Value {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (Value::Exact(a), Value::Exact(b)) => Some(a.cmp(b)),
            (Value::Float(a), Value::Float(b)) => a.partial_cmp(b),
            _ => None,
        }
    }
}

impl From<Rat> for Value {
    fn from(r: Rat) -> Self {
        Value::Exact(r)
    }
}

impl From<f64> for Value {
    fn from(x: f64) -> Self {
        Value::Float(x)
    }
}

macro_rules! value_binop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl $trait<&Value> for &Value {
            type Output = Value;
            fn $method(self, rhs: &Value) -> Value {
                match (self, rhs) {
                    (Value::Exact(a), Value::Exact(b)) => Value::Exact(a $op b),
                    (Value::Float(a), Value::Float(b)) => Value::Float(a $op b),
                    _ => mode_panic(),
                }
            }
        }
        impl $trait<Value> for Value {
            type Output = Value;
            fn $method(self, rhs: Value) -> Value {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&Value> for Value {
            type Output = Value;
            fn $method(self, rhs: &Value) -> Value {
                (&self).$method(rhs)
            }
        }
    };
}

value_binop!(Add, add, +);
value_binop!(Sub, sub, -);
value_binop!(Mul, mul, *);
value_binop!(Div, div, /);

impl Neg for Value {
    type Output = Value;
    fn neg(self) -> Value {
        match self {
            Value::Exact(r) => Value::Exact(-r),
            Value::Float(x) => Value::Float(-x),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Exact(r) => f.write_str(&format_rat(r)),
            Value::Float(x) => write!(f, "{x}"),
        }
    }
}

impl Serialize for Value {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Value::Exact(r) => s.serialize_str(&format_rat(r)),
            Value::Float(x) => s.serialize_f64(*x),
        }
    }
}

impl<'de> Deserialize<'de> for Value {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct ValueVisitor;

        impl Visitor<'_> for ValueVisitor {
            type Value = Value;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a \"p/q\" string or a number")
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Value, E> {
                parse_rat(v).map(Value::Exact).map_err(E::custom)
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Value, E> {
                Ok(Value::Float(v))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Value, E> {
                Ok(Value::Float(v as f64))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Value, E> {
                Ok(Value::Float(v as f64))
            }
        }

        d.deserialize_any(ValueVisitor)
    }
}

/// Shared mode of a slice of values, or an error if they disagree.
pub fn common_mode(values: &[Value]) -> Result<Option<Mode>> {
    let mut mode = None;
    for v in values {
        match mode {
            None => mode = Some(v.mode()),
            Some(m) if m != v.mode() => {
                return Err(Error::ModeMismatch(
                    "instance mixes exact and float values".into(),
                ))
            }
            _ => {}
        }
    }
    Ok(mode)
}

/// `x` rendered with 12 significant digits.
pub fn format_sig12(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (11 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}
