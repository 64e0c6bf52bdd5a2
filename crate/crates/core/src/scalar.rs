//! Scalars that are either exact rationals or doubles.
//!
//! Arithmetic between an exact and a float value is an error. Conversion is
//! always explicit (`Scalar::to_float`).

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::FormError;

pub type Q = BigRational;

/// Scalar mode flag carried by forms and endomorphisms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Float,
}

#[derive(Clone, PartialEq)]
pub enum Scalar {
    Exact(Q),
    Float(f64),
}

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn q_frac(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

impl Scalar {
    pub fn zero(mode: Mode) -> Scalar {
        match mode {
            Mode::Exact => Scalar::Exact(Q::zero()),
            Mode::Float => Scalar::Float(0.0),
        }
    }

    pub fn one(mode: Mode) -> Scalar {
        Scalar::int(1, mode)
    }

    pub fn int(n: i64, mode: Mode) -> Scalar {
        match mode {
            Mode::Exact => Scalar::Exact(q(n)),
            Mode::Float => Scalar::Float(n as f64),
        }
    }

    pub fn mode(&self) -> Mode {
        match self {
            Scalar::Exact(_) => Mode::Exact,
            Scalar::Float(_) => Mode::Float,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Exact(x) => x.is_zero(),
            Scalar::Float(x) => *x == 0.0,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Scalar::Exact(x) => x.to_f64().unwrap_or(f64::NAN),
            Scalar::Float(x) => *x,
        }
    }

    /// Explicit exact-to-float conversion; float values pass through.
    pub fn to_float(&self) -> Scalar {
        Scalar::Float(self.to_f64())
    }

    pub fn as_exact(&self) -> Option<&Q> {
        match self {
            Scalar::Exact(x) => Some(x),
            Scalar::Float(_) => None,
        }
    }

    pub fn abs_f64(&self) -> f64 {
        match self {
            Scalar::Exact(x) => x.abs().to_f64().unwrap_or(f64::NAN),
            Scalar::Float(x) => x.abs(),
        }
    }

    fn pair<'a>(&'a self, other: &'a Scalar) -> Result<Pair<'a>, FormError> {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Ok(Pair::Exact(a, b)),
            (Scalar::Float(a), Scalar::Float(b)) => Ok(Pair::Float(*a, *b)),
            _ => Err(FormError::ModeMismatch),
        }
    }

    pub fn add(&self, other: &Scalar) -> Result<Scalar, FormError> {
        Ok(match self.pair(other)? {
            Pair::Exact(a, b) => Scalar::Exact(a + b),
            Pair::Float(a, b) => Scalar::Float(a + b),
        })
    }

    pub fn sub(&self, other: &Scalar) -> Result<Scalar, FormError> {
        Ok(match self.pair(other)? {
            Pair::Exact(a, b) => Scalar::Exact(a - b),
            Pair::Float(a, b) => Scalar::Float(a - b),
        })
    }

    pub fn mul(&self, other: &Scalar) -> Result<Scalar, FormError> {
        Ok(match self.pair(other)? {
            Pair::Exact(a, b) => Scalar::Exact(a * b),
            Pair::Float(a, b) => Scalar::Float(a * b),
        })
    }

    pub fn div(&self, other: &Scalar) -> Result<Scalar, FormError> {
        if other.is_zero() {
            return Err(FormError::DivisionByZero);
        }
        Ok(match self.pair(other)? {
            Pair::Exact(a, b) => Scalar::Exact(a / b),
            Pair::Float(a, b) => Scalar::Float(a / b),
        })
    }

    pub fn neg(&self) -> Scalar {
        match self {
            Scalar::Exact(x) => Scalar::Exact(-x),
            Scalar::Float(x) => Scalar::Float(-x),
        }
    }

    /// Multiply by a small signed integer (used for permutation signs).
    pub fn scale_int(&self, k: i64) -> Scalar {
        match self {
            Scalar::Exact(x) => Scalar::Exact(x * q(k)),
            Scalar::Float(x) => Scalar::Float(x * k as f64),
        }
    }
}

enum Pair<'a> {
    Exact(&'a Q, &'a Q),
    Float(f64, f64),
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Exact(x) => write!(f, "{x}"),
            Scalar::Float(x) => write!(f, "{x:e}"),
        }
    }
}

impl From<f64> for Scalar {
    fn from(x: f64) -> Self {
        Scalar::Float(x)
    }
}

impl From<Q> for Scalar {
    fn from(x: Q) -> Self {
        Scalar::Exact(x)
    }
}

/// A complex number whose parts share one scalar mode.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexScalar {
    pub re: Scalar,
    pub im: Scalar,
}

impl ComplexScalar {
    pub fn new(re: Scalar, im: Scalar) -> Result<Self, FormError> {
        if re.mode() != im.mode() {
            return Err(FormError::ModeMismatch);
        }
        Ok(ComplexScalar { re, im })
    }

    pub fn mode(&self) -> Mode {
        self.re.mode()
    }

    pub fn add(&self, o: &ComplexScalar) -> Result<ComplexScalar, FormError> {
        Ok(ComplexScalar {
            re: self.re.add(&o.re)?,
            im: self.im.add(&o.im)?,
        })
    }

    pub fn mul(&self, o: &ComplexScalar) -> Result<ComplexScalar, FormError> {
        let re = self.re.mul(&o.re)?.sub(&self.im.mul(&o.im)?)?;
        let im = self.re.mul(&o.im)?.add(&self.im.mul(&o.re)?)?;
        Ok(ComplexScalar { re, im })
    }

    pub fn conj(&self) -> ComplexScalar {
        ComplexScalar {
            re: self.re.clone(),
            im: self.im.neg(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
}
