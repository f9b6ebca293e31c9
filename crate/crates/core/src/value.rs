//! Measure values with an exact/approximate arithmetic discipline.
//!
//! Rational-valued measures stay exact. The Matthews coefficient and the
//! quadratic generalized means are ratios with a square-root denominator; they
//! are kept as `coeff * sqrt(radicand)` so that ordering and equality remain
//! exact. Everything transcendental is an `f64`, compared with a tolerance.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

/// Tolerance for ties between approximate values.
pub const EPSILON: f64 = 1e-12;

/// Shorthand for an integer-valued rational.
pub fn int(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

/// Exact rational `num / den`.
pub fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Square root of a nonnegative rational when it is itself rational.
pub fn rational_sqrt(q: &BigRational) -> Option<BigRational> {
    if q.is_negative() {
        return None;
    }
    let n = q.numer();
    let d = q.denom();
    let rn = n.sqrt();
    let rd = d.sqrt();
    if &(&rn * &rn) == n && &(&rd * &rd) == d {
        Some(BigRational::new(rn, rd))
    } else {
        None
    }
}

/// Arithmetic class of a value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ValueKind {
    Rational,
    Surd,
    Float,
}

/// A measure value.
#[derive(Debug, Clone)]
pub enum Value {
    Rational(BigRational),
    /// `coeff * sqrt(radicand)` with `radicand > 0` not a rational square and `coeff != 0`.
    Surd {
        coeff: BigRational,
        radicand: BigRational,
    },
    Float(f64),
}

impl Value {
    pub fn zero() -> Self {
        Value::Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Value::Rational(BigRational::one())
    }

    pub fn from_int(v: i64) -> Self {
        Value::Rational(int(v))
    }

    /// `coeff * sqrt(radicand)`, collapsed to a rational when possible.
    pub fn surd(coeff: BigRational, radicand: BigRational) -> Self {
        assert!(!radicand.is_negative(), "negative radicand");
        if coeff.is_zero() || radicand.is_zero() {
            return Value::zero();
        }
        match rational_sqrt(&radicand) {
            Some(root) => Value::Rational(coeff * root),
            None => {
                let (k, r) = reduce_radicand(&radicand);
                Value::Surd {
                    coeff: coeff * k,
                    radicand: BigRational::from_integer(r),
                }
            }
        }
    }

    /// `num / sqrt(den_sq)` for `den_sq > 0`.
    pub fn over_sqrt(num: BigRational, den_sq: BigRational) -> Self {
        assert!(den_sq.is_positive(), "nonpositive radicand in denominator");
        let coeff = num / &den_sq;
        Value::surd(coeff, den_sq)
    }

    pub fn kind(&self) -> ValueKind {
        match self {
            Value::Rational(_) => ValueKind::Rational,
            Value::Surd { .. } => ValueKind::Surd,
            Value::Float(_) => ValueKind::Float,
        }
    }

    pub fn is_exact(&self) -> bool {
        !matches!(self, Value::Float(_))
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        match self {
            Value::Rational(r) => Some(r),
            _ => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Value::Rational(r) => r.to_f64().unwrap_or(f64::NAN),
            Value::Surd { coeff, radicand } => {
                coeff.to_f64().unwrap_or(f64::NAN) * radicand.to_f64().unwrap_or(f64::NAN).sqrt()
            }
            Value::Float(x) => *x,
        }
    }

    /// Sign and square of an exact value; `None` for floats.
    fn signed_square(&self) -> Option<(Sign, BigRational)> {
        match self {
            Value::Rational(r) => Some((sign_of(r), r * r)),
            Value::Surd { coeff, radicand } => Some((sign_of(coeff), coeff * coeff * radicand)),
            Value::Float(_) => None,
        }
    }

    pub fn neg(&self) -> Value {
        match self {
            Value::Rational(r) => Value::Rational(-r),
            Value::Surd { coeff, radicand } => Value::Surd {
                coeff: -coeff,
                radicand: radicand.clone(),
            },
            Value::Float(x) => Value::Float(-x),
        }
    }

    /// Multiply by an exact rational.
    pub fn scale(&self, k: &BigRational) -> Value {
        match self {
            Value::Rational(r) => Value::Rational(r * k),
            Value::Surd { coeff, radicand } => Value::surd(coeff * k, radicand.clone()),
            Value::Float(x) => Value::Float(x * k.to_f64().unwrap_or(f64::NAN)),
        }
    }

    /// Sum, exact whenever both terms share a radicand up to a rational square.
    pub fn add(&self, other: &Value) -> Value {
        use Value::*;
        match (self, other) {
            (Rational(a), Rational(b)) => Rational(a + b),
            (Rational(a), x) | (x, Rational(a)) if a.is_zero() => x.clone(),
            (
                Surd {
                    coeff: c1,
                    radicand: q1,
                },
                Surd {
                    coeff: c2,
                    radicand: q2,
                },
            ) => {
                if q1 == q2 {
                    Value::surd(c1 + c2, q1.clone())
                } else if let Some(k) = rational_sqrt(&(q2 / q1)) {
                    // c2*sqrt(q2) = (c2*k)*sqrt(q1)
                    Value::surd(c1 + c2 * k, q1.clone())
                } else {
                    Float(self.to_f64() + other.to_f64())
                }
            }
            _ => Float(self.to_f64() + other.to_f64()),
        }
    }

    /// Total order: exact for exact pairs, tolerance `eps` once a float is involved.
    pub fn compare(&self, other: &Value, eps: f64) -> Ordering {
        match (self.signed_square(), other.signed_square()) {
            (Some((s1, q1)), Some((s2, q2))) => {
                let r1 = sign_rank(s1);
                let r2 = sign_rank(s2);
                if r1 != r2 {
                    return r1.cmp(&r2);
                }
                match s1 {
                    Sign::NoSign => Ordering::Equal,
                    Sign::Plus => q1.cmp(&q2),
                    Sign::Minus => q2.cmp(&q1),
                }
            }
            _ => {
                let (a, b) = (self.to_f64(), other.to_f64());
                if (a - b).abs() <= eps {
                    Ordering::Equal
                } else {
                    a.partial_cmp(&b).unwrap_or(Ordering::Equal)
                }
            }
        }
    }

    /// Exact equality for exact values, `EPSILON` otherwise.
    pub fn approx_eq(&self, other: &Value) -> bool {
        self.compare(other, EPSILON) == Ordering::Equal
    }
}

/// Write `q` as `k^2 r` with `r` an integer free of small square factors.
fn reduce_radicand(q: &BigRational) -> (BigRational, BigInt) {
    let den = q.denom().clone();
    let mut r = q.numer() * &den;
    let mut k = BigRational::new(BigInt::one(), den);
    let mut d = 2u32;
    while d <= 1000 && BigInt::from(d * d) <= r {
        let dd = BigInt::from(d * d);
        while (&r % &dd).is_zero() {
            r /= &dd;
            k *= BigRational::from_integer(BigInt::from(d));
        }
        d += 1;
    }
    (k, r)
}

fn sign_of(r: &BigRational) -> Sign {
    if r.is_zero() {
        Sign::NoSign
    } else if r.is_negative() {
        Sign::Minus
    } else {
        Sign::Plus
    }
}

fn sign_rank(s: Sign) -> i8 {
    match s {
        Sign::Minus => -1,
        Sign::NoSign => 0,
        Sign::Plus => 1,
    }
}

impl PartialEq for Value {
    fn eq(&self, other: &Self) -> bool {
        self.approx_eq(other)
    }
}

impl From<BigRational> for Value {
    fn from(r: BigRational) -> Self {
        Value::Rational(r)
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Rational(r) => write!(f, "{r}"),
            Value::Surd { coeff, radicand } => write!(f, "{coeff}*sqrt({radicand})"),
            Value::Float(x) => write!(f, "{x}"),
        }
    }
}

impl Serialize for Value {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("Value", 3)?;
        s.serialize_field("kind", &self.kind())?;
        let exact = match self {
            Value::Float(_) => None,
            other => Some(other.to_string()),
        };
        s.serialize_field("exact", &exact)?;
        s.serialize_field("approx", &self.to_f64())?;
        s.end()
    }
}
