//! Binary floating point numbers of configurable precision.
//!
//! A [`Real`] is the dyadic rational `mantissa * 2^exponent`, kept with an odd
//! mantissa (or zero) and a working precision in bits. Because every value is
//! an exact dyadic rational, comparisons against rationals such as `1/k` are
//! exact; only the operations that produce new values (division, products,
//! square roots) round, and they round once.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;

pub const DEFAULT_PRECISION: u32 = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rounding {
    Nearest,
    TowardZero,
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Real {
    mantissa: BigInt,
    exponent: i64,
    precision: u32,
}

impl Real {
    pub fn zero(precision: u32) -> Self {
        Real {
            mantissa: BigInt::zero(),
            exponent: 0,
            precision,
        }
    }

    pub fn from_int(value: impl Into<BigInt>, precision: u32) -> Self {
        Self::round(value.into(), 0, precision, Rounding::Nearest)
    }

    /// Exact conversion (rounded only if `precision < 53`).
    pub fn from_f64(value: f64, precision: u32) -> Self {
        assert!(value.is_finite(), "cannot convert {value} to Real");
        if value == 0.0 {
            return Self::zero(precision);
        }
        let bits = value.to_bits();
        let negative = bits >> 63 == 1;
        let biased = ((bits >> 52) & 0x7ff) as i64;
        let fraction = bits & ((1u64 << 52) - 1);
        let (m, e) = if biased == 0 {
            (fraction, -1074)
        } else {
            (fraction | (1u64 << 52), biased - 1075)
        };
        let mut mantissa = BigInt::from(m);
        if negative {
            mantissa = -mantissa;
        }
        Self::round(mantissa, e, precision, Rounding::Nearest)
    }

    /// `num / den` rounded to `precision` significant bits.
    pub fn from_ratio(num: &BigInt, den: &BigInt, precision: u32, mode: Rounding) -> Self {
        assert!(!den.is_zero(), "division by zero");
        if num.is_zero() {
            return Self::zero(precision);
        }
        let negative = (num.sign() == Sign::Minus) != (den.sign() == Sign::Minus);
        let n = num.abs();
        let d = den.abs();
        // Shift so the quotient carries precision + 2 guard bits.
        let shift = precision as i64 + 2 + d.bits() as i64 - n.bits() as i64;
        let (scaled_n, scaled_d) = if shift >= 0 {
            (n << shift as usize, d)
        } else {
            (n, d << (-shift) as usize)
        };
        let (q, r) = scaled_n.div_rem(&scaled_d);
        // Sticky bit records a non-zero remainder below the guard bits.
        let mut q = q << 1usize;
        if !r.is_zero() {
            q += 1;
        }
        let q = if negative { -q } else { q };
        Self::round(q, -shift - 1, precision, mode)
    }

    pub fn from_rational(value: &BigRational, precision: u32) -> Self {
        Self::from_ratio(value.numer(), value.denom(), precision, Rounding::Nearest)
    }

    /// `sqrt(value)` for a non-negative rational.
    pub fn sqrt_rational(value: &BigRational, precision: u32) -> Self {
        assert!(!value.is_negative(), "square root of a negative number");
        if value.is_zero() {
            return Self::zero(precision);
        }
        // sqrt(p/q) = sqrt(p*q) / q
        let q = value.denom();
        let t = precision as usize + q.bits() as usize + 8;
        let radicand = (value.numer() * q) << (2 * t);
        let s = radicand.sqrt();
        Self::from_ratio(&s, &(q << t), precision, Rounding::Nearest)
    }

    /// Uniform sample from `[0, 1)` on the grid `2^-precision`.
    pub fn random_unit<R: Rng + ?Sized>(rng: &mut R, precision: u32) -> Self {
        let words = (precision as usize).div_ceil(64);
        let mut m = BigInt::zero();
        for _ in 0..words {
            m = (m << 64usize) + BigInt::from(rng.gen::<u64>());
        }
        let excess = words * 64 - precision as usize;
        m >>= excess;
        Self::round(m, -(precision as i64), precision, Rounding::Nearest)
    }

    fn round(mantissa: BigInt, exponent: i64, precision: u32, mode: Rounding) -> Self {
        if mantissa.is_zero() {
            return Self::zero(precision);
        }
        let bits = mantissa.bits();
        let (mut m, mut e) = if bits > precision as u64 {
            let drop = (bits - precision as u64) as usize;
            let negative = mantissa.is_negative();
            let mag = mantissa.abs();
            let kept = &mag >> drop;
            let mut kept = kept;
            if mode == Rounding::Nearest {
                let half = BigInt::one() << (drop - 1);
                let rest = &mag - (&kept << drop);
                match rest.cmp(&half) {
                    Ordering::Greater => kept += 1,
                    Ordering::Equal if kept.is_odd() => kept += 1,
                    _ => {}
                }
            }
            (if negative { -kept } else { kept }, exponent + drop as i64)
        } else {
            (mantissa, exponent)
        };
        let tz = m.trailing_zeros().unwrap_or(0);
        if tz > 0 {
            m >>= tz as usize;
            e += tz as i64;
        }
        Real {
            mantissa: m,
            exponent: e,
            precision,
        }
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn with_precision(&self, precision: u32) -> Self {
        Self::round(
            self.mantissa.clone(),
            self.exponent,
            precision,
            Rounding::Nearest,
        )
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.mantissa.is_negative()
    }

    pub fn signum(&self) -> i8 {
        match self.mantissa.sign() {
            Sign::Minus => -1,
            Sign::NoSign => 0,
            Sign::Plus => 1,
        }
    }

    pub fn abs(&self) -> Self {
        Real {
            mantissa: self.mantissa.abs(),
            ..self.clone()
        }
    }

    pub fn neg(&self) -> Self {
        Real {
            mantissa: -&self.mantissa,
            ..self.clone()
        }
    }

    pub fn to_rational(&self) -> BigRational {
        if self.exponent >= 0 {
            BigRational::from_integer(&self.mantissa << self.exponent as usize)
        } else {
            BigRational::new(
                self.mantissa.clone(),
                BigInt::one() << (-self.exponent) as usize,
            )
        }
    }

    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let bits = self.mantissa.bits() as i64;
        let (m, e) = if bits > 62 {
            let drop = bits - 62;
            (&self.mantissa >> drop as usize, self.exponent + drop)
        } else {
            (self.mantissa.clone(), self.exponent)
        };
        let m = m.to_i64().expect("mantissa fits after shift") as f64;
        scale_by_pow2(m, e)
    }

    /// Exact sum, rounded to the larger working precision.
    pub fn add(&self, other: &Real) -> Real {
        let precision = self.precision.max(other.precision);
        let (a, b, e) = align(self, other);
        Self::round(a + b, e, precision, Rounding::Nearest)
    }

    pub fn sub(&self, other: &Real) -> Real {
        self.add(&other.neg())
    }

    pub fn add_int(&self, k: i64) -> Real {
        self.add(&Real::from_int(k, self.precision))
    }

    pub fn mul(&self, other: &Real) -> Real {
        let precision = self.precision.max(other.precision);
        Self::round(
            &self.mantissa * &other.mantissa,
            self.exponent + other.exponent,
            precision,
            Rounding::Nearest,
        )
    }

    pub fn div(&self, other: &Real) -> Real {
        assert!(!other.is_zero(), "division by zero");
        let precision = self.precision.max(other.precision);
        let shift = self.exponent - other.exponent;
        let (n, d) = if shift >= 0 {
            (&self.mantissa << shift as usize, other.mantissa.clone())
        } else {
            (self.mantissa.clone(), &other.mantissa << (-shift) as usize)
        };
        Self::from_ratio(&n, &d, precision, Rounding::Nearest)
    }

    /// Largest integer `<= self`.
    pub fn floor(&self) -> BigInt {
        if self.exponent >= 0 {
            &self.mantissa << self.exponent as usize
        } else {
            self.mantissa
                .div_floor(&(BigInt::one() << (-self.exponent) as usize))
        }
    }

    /// Splits `1/|self|` into its integer part and fractional part.
    ///
    /// The integer part is exact. The fractional part comes from the exact
    /// remainder and is truncated once, so it always lies in `[0, 1)` and is
    /// zero only when `1/|self|` is an integer.
    pub fn reciprocal_split(&self) -> (BigInt, Real) {
        assert!(!self.is_zero(), "reciprocal of zero");
        let m = self.mantissa.abs();
        if self.exponent > 0 {
            let den = m << self.exponent as usize;
            let frac = Self::from_ratio(&BigInt::one(), &den, self.precision, Rounding::TowardZero);
            return (BigInt::zero(), frac);
        }
        let num = BigInt::one() << (-self.exponent) as usize;
        let (k, r) = num.div_rem(&m);
        let frac = Self::from_ratio(&r, &m, self.precision, Rounding::TowardZero);
        (k, frac)
    }

    pub fn cmp_rational(&self, other: &BigRational) -> Ordering {
        let q = other.denom();
        let p = other.numer();
        if self.exponent >= 0 {
            ((&self.mantissa << self.exponent as usize) * q).cmp(p)
        } else {
            (&self.mantissa * q).cmp(&(p << (-self.exponent) as usize))
        }
    }

    pub fn to_decimal_string(&self, significant: usize) -> String {
        format_decimal(&self.to_rational(), significant)
    }

    /// Number of significant decimal digits the working precision supports.
    pub fn decimal_digits(&self) -> usize {
        ((self.precision as f64) * std::f64::consts::LOG10_2).floor() as usize
    }
}

fn align(a: &Real, b: &Real) -> (BigInt, BigInt, i64) {
    let e = a.exponent.min(b.exponent);
    (
        &a.mantissa << (a.exponent - e) as usize,
        &b.mantissa << (b.exponent - e) as usize,
        e,
    )
}

fn scale_by_pow2(mut m: f64, mut e: i64) -> f64 {
    while e > 1000 {
        m *= 2f64.powi(1000);
        e -= 1000;
        if m.is_infinite() {
            return m;
        }
    }
    while e < -1000 {
        m *= 2f64.powi(-1000);
        e += 1000;
        if m == 0.0 {
            return m;
        }
    }
    m * 2f64.powi(e as i32)
}

impl PartialOrd for Real {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Real {
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b, _) = align(self, other);
        a.cmp(&b)
    }
}

impl fmt::Debug for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Real({}, prec={})", self.to_decimal_string(25), self.precision)
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = f.precision().unwrap_or_else(|| self.decimal_digits());
        f.write_str(&self.to_decimal_string(digits))
    }
}

/// Decimal rendering of a rational with `significant` digits, rounded to
/// nearest. Plain positional notation for moderate exponents, otherwise
/// scientific.
pub fn format_decimal(value: &BigRational, significant: usize) -> String {
    let significant = significant.max(1);
    if value.is_zero() {
        return "0".to_string();
    }
    let negative = value.is_negative();
    let v = value.abs();
    // Estimate floor(log10 v), then correct by one if needed.
    let bits = v.numer().bits() as f64 - v.denom().bits() as f64;
    let mut e10 = (bits * std::f64::consts::LOG10_2).floor() as i64;
    let ten = BigInt::from(10);
    let pow10 = |k: i64| -> BigRational {
        if k >= 0 {
            BigRational::from_integer(num_traits::pow(ten.clone(), k as usize))
        } else {
            BigRational::new(BigInt::one(), num_traits::pow(ten.clone(), (-k) as usize))
        }
    };
    loop {
        if v < pow10(e10) {
            e10 -= 1;
        } else if v >= pow10(e10 + 1) {
            e10 += 1;
        } else {
            break;
        }
    }
    let scale = significant as i64 - 1 - e10;
    let scaled = &v * pow10(scale);
    let mut digits = (scaled + BigRational::new(BigInt::one(), BigInt::from(2))).floor();
    let mut digits_int = digits.to_integer();
    if digits_int.to_string().len() > significant {
        e10 += 1;
        digits = BigRational::from_integer(digits_int) / BigRational::from_integer(ten.clone());
        digits_int = digits.round().to_integer();
    }
    let s = digits_int.to_string();
    let body = if (-6..21).contains(&e10) {
        positional(&s, e10)
    } else {
        let (head, tail) = s.split_at(1);
        let tail = tail.trim_end_matches('0');
        if tail.is_empty() {
            format!("{head}e{e10}")
        } else {
            format!("{head}.{tail}e{e10}")
        }
    };
    if negative {
        format!("-{body}")
    } else {
        body
    }
}

fn positional(digits: &str, e10: i64) -> String {
    // digits represents d.ddd * 10^e10
    let n = digits.len() as i64;
    let out = if e10 < 0 {
        format!("0.{}{}", "0".repeat((-e10 - 1) as usize), digits)
    } else if e10 + 1 >= n {
        format!("{}{}", digits, "0".repeat((e10 + 1 - n) as usize))
    } else {
        let (a, b) = digits.split_at((e10 + 1) as usize);
        format!("{a}.{b}")
    };
    if out.contains('.') {
        out.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rat(p: i64, q: i64) -> BigRational {
        BigRational::new(p.into(), q.into())
    }

    #[test]
    fn f64_roundtrip_is_exact() {
        for v in [0.5, -0.75, 1.0 / 3.0, 1e-300, 123456.789] {
            assert_eq!(Real::from_f64(v, 256).to_f64(), v);
        }
    }

    #[test]
    fn ratio_rounds_to_precision() {
        let third = Real::from_ratio(&1.into(), &3.into(), 64, Rounding::Nearest);
        let err = (third.to_rational() - rat(1, 3)).abs();
        assert!(err < BigRational::new(1.into(), BigInt::one() << 65usize));
    }

    #[test]
    fn reciprocal_split_exact_integer() {
        let half = Real::from_f64(0.5, 256);
        let (k, frac) = half.reciprocal_split();
        assert_eq!(k, 2.into());
        assert!(frac.is_zero());
    }

    #[test]
    fn reciprocal_split_of_silver_ratio_is_fixed() {
        let two = BigRational::from_integer(2.into());
        let x = Real::sqrt_rational(&two, 256).add_int(-1);
        let (k, frac) = x.reciprocal_split();
        assert_eq!(k, 2.into());
        let diff = frac.sub(&x).abs();
        assert!(diff.to_f64() < 1e-70);
    }

    #[test]
    fn sqrt_is_accurate() {
        let s = Real::sqrt_rational(&rat(2, 1), 256);
        let sq = s.mul(&s).sub(&Real::from_int(2, 256));
        assert!(sq.abs().to_f64() < 1e-74);
    }

    #[test]
    fn rational_comparison_hits_boundaries() {
        let third = Real::from_ratio(&1.into(), &3.into(), 256, Rounding::Nearest);
        assert_ne!(third.cmp_rational(&rat(1, 3)), Ordering::Equal);
        assert_eq!(Real::from_f64(0.25, 64).cmp_rational(&rat(1, 4)), Ordering::Equal);
    }

    #[test]
    fn random_unit_in_range() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let r = Real::random_unit(&mut rng, 256);
            assert!(!r.is_negative());
            assert_eq!(r.cmp_rational(&rat(1, 1)), Ordering::Less);
        }
    }

    #[test]
    fn decimal_formatting() {
        assert_eq!(format_decimal(&rat(1, 2), 17), "0.5");
        assert_eq!(format_decimal(&rat(-2, 3), 5), "-0.66667");
        assert_eq!(format_decimal(&rat(1, 1000000000), 3), "1e-9");
        assert_eq!(format_decimal(&rat(999, 1000), 2), "1");
        assert_eq!(format_decimal(&rat(1234, 1), 3), "1230");
    }
}
