//! Points of the expansion maps, either exact rationals or [`Real`]s.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::real::{format_decimal, Real, DEFAULT_PRECISION};

/// Domain a point is expected to live in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    /// `[-1, 1]`, the domain of the random map `K`.
    Signed,
    /// `[0, 1]`, the domain of the skew product `R`.
    Unit,
}

impl Domain {
    fn label(self) -> &'static str {
        match self {
            Domain::Signed => "[-1, 1]",
            Domain::Unit => "[0, 1]",
        }
    }
}

#[derive(Clone, PartialEq, Eq)]
pub enum ExactPoint {
    /// Lowest terms with positive denominator (maintained by `BigRational`).
    Rational(BigRational),
    Real(Real),
}

impl ExactPoint {
    pub fn rational(p: i64, q: i64) -> Self {
        ExactPoint::Rational(BigRational::new(p.into(), q.into()))
    }

    pub fn real_f64(v: f64) -> Self {
        ExactPoint::Real(Real::from_f64(v, DEFAULT_PRECISION))
    }

    pub fn zero_like(&self) -> Self {
        match self {
            ExactPoint::Rational(_) => ExactPoint::Rational(BigRational::zero()),
            ExactPoint::Real(r) => ExactPoint::Real(Real::zero(r.precision())),
        }
    }

    pub fn is_rational(&self) -> bool {
        matches!(self, ExactPoint::Rational(_))
    }

    pub fn is_zero(&self) -> bool {
        match self {
            ExactPoint::Rational(r) => r.is_zero(),
            ExactPoint::Real(r) => r.is_zero(),
        }
    }

    pub fn signum(&self) -> i8 {
        match self {
            ExactPoint::Rational(r) => {
                if r.is_zero() {
                    0
                } else if r.is_negative() {
                    -1
                } else {
                    1
                }
            }
            ExactPoint::Real(r) => r.signum(),
        }
    }

    /// Exact comparison with a rational.
    pub fn cmp_rational(&self, other: &BigRational) -> Ordering {
        match self {
            ExactPoint::Rational(r) => r.cmp(other),
            ExactPoint::Real(r) => r.cmp_rational(other),
        }
    }

    /// Exact value as a rational (reals are dyadic rationals).
    pub fn to_rational(&self) -> BigRational {
        match self {
            ExactPoint::Rational(r) => r.clone(),
            ExactPoint::Real(r) => r.to_rational(),
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            ExactPoint::Rational(r) => rational_to_f64(r),
            ExactPoint::Real(r) => r.to_f64(),
        }
    }

    pub fn abs(&self) -> Self {
        match self {
            ExactPoint::Rational(r) => ExactPoint::Rational(r.abs()),
            ExactPoint::Real(r) => ExactPoint::Real(r.abs()),
        }
    }

    pub fn neg(&self) -> Self {
        match self {
            ExactPoint::Rational(r) => ExactPoint::Rational(-r),
            ExactPoint::Real(r) => ExactPoint::Real(r.neg()),
        }
    }

    /// `self + k` for an integer `k`, exact for rationals.
    pub fn add_int(&self, k: i64) -> Self {
        match self {
            ExactPoint::Rational(r) => ExactPoint::Rational(r + BigInt::from(k)),
            ExactPoint::Real(r) => ExactPoint::Real(r.add_int(k)),
        }
    }

    /// `1 - self`.
    pub fn one_minus(&self) -> Self {
        self.neg().add_int(1)
    }

    /// Integer and fractional parts of `1/|self|`.
    pub fn reciprocal_split(&self) -> Result<(BigInt, ExactPoint)> {
        if self.is_zero() {
            return Err(Error::ZeroInput);
        }
        Ok(match self {
            ExactPoint::Rational(r) => {
                let inv = r.abs().recip();
                let k = inv.floor().to_integer();
                let frac = inv - BigRational::from_integer(k.clone());
                (k, ExactPoint::Rational(frac))
            }
            ExactPoint::Real(r) => {
                let (k, frac) = r.reciprocal_split();
                (k, ExactPoint::Real(frac))
            }
        })
    }

    pub fn check_domain(&self, domain: Domain) -> Result<()> {
        let one = BigRational::one();
        let ok = match domain {
            Domain::Signed => self.abs().cmp_rational(&one) != Ordering::Greater,
            Domain::Unit => {
                self.signum() >= 0 && self.cmp_rational(&one) != Ordering::Greater
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Domain {
                value: self.to_string(),
                domain: domain.label(),
            })
        }
    }

    pub fn precision(&self) -> Option<u32> {
        match self {
            ExactPoint::Rational(_) => None,
            ExactPoint::Real(r) => Some(r.precision()),
        }
    }
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    Real::from_rational(r, 64).to_f64()
}

impl fmt::Debug for ExactPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for ExactPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExactPoint::Rational(r) => write!(f, "{}/{}", r.numer(), r.denom()),
            ExactPoint::Real(r) => fmt::Display::fmt(r, f),
        }
    }
}

/// Parses `"a/b"` or an integer as a rational, and a decimal literal
/// (`-0.125`, `3e-4`) as a [`Real`] of the given precision.
pub fn parse_point(s: &str, precision: u32) -> Result<ExactPoint> {
    let s = s.trim();
    if s.contains('/') || is_integer_literal(s) {
        return parse_rational(s).map(ExactPoint::Rational);
    }
    let exact = parse_decimal(s)?;
    Ok(ExactPoint::Real(Real::from_rational(&exact, precision)))
}

fn is_integer_literal(s: &str) -> bool {
    let t = s.strip_prefix(['-', '+']).unwrap_or(s);
    !t.is_empty() && t.bytes().all(|b| b.is_ascii_digit())
}

pub fn parse_rational(s: &str) -> Result<BigRational> {
    let bad = || Error::Parse(format!("invalid rational literal {s:?}"));
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s.trim(), "1"),
    };
    let n = BigInt::from_str(n).map_err(|_| bad())?;
    let d = BigInt::from_str(d).map_err(|_| bad())?;
    if d.is_zero() {
        return Err(Error::Parse(format!("zero denominator in {s:?}")));
    }
    Ok(BigRational::new(n, d))
}

/// Exact rational value of a decimal literal.
pub fn parse_decimal(s: &str) -> Result<BigRational> {
    let bad = || Error::Parse(format!("invalid decimal literal {s:?}"));
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i64>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (negative, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let n = BigInt::from_str(&digits).map_err(|_| bad())?;
    let scale = exp - frac_part.len() as i64;
    let ten = BigInt::from(10);
    let mut value = if scale >= 0 {
        BigRational::from_integer(n * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(n, num_traits::pow(ten, (-scale) as usize))
    };
    if negative {
        value = -value;
    }
    Ok(value)
}

pub fn format_rational(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Decimal string of a point with `significant` digits.
pub fn format_point_decimal(p: &ExactPoint, significant: usize) -> String {
    format_decimal(&p.to_rational(), significant)
}
