//! Random test instances: rational and high precision starting points and
//! ω-words.

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::Rng;

use crate::point::ExactPoint;
use crate::real::Real;

/// `a/q` with `1 <= q <= max_den` and `|a| <= q` uniform, reduced.
pub fn random_rational<R: Rng + ?Sized>(rng: &mut R, max_den: i64) -> ExactPoint {
    let q = rng.gen_range(1..=max_den);
    let a = rng.gen_range(-q..=q);
    ExactPoint::Rational(BigRational::new(BigInt::from(a), BigInt::from(q)))
}

/// A uniform bit string of length `1..=max_len`.
pub fn random_block<R: Rng + ?Sized>(rng: &mut R, max_len: usize) -> Vec<u8> {
    let len = rng.gen_range(1..=max_len);
    (0..len).map(|_| rng.gen_range(0..=1u8)).collect()
}

/// A random signed point in `[-1, 1)` on the grid `2^-precision`.
pub fn random_real<R: Rng + ?Sized>(rng: &mut R, precision: u32) -> ExactPoint {
    let u = Real::random_unit(rng, precision);
    ExactPoint::Real(if rng.gen::<bool>() { u.neg() } else { u })
}

/// `±(√c - ⌊√c⌋)` for a random non-square `c < 10⁴`, rounded to `precision`
/// bits.
pub fn random_quadratic_surd<R: Rng + ?Sized>(rng: &mut R, precision: u32) -> ExactPoint {
    let c = loop {
        let c: u64 = rng.gen_range(2..10_000);
        let r = (c as f64).sqrt() as u64;
        if r * r != c && (r + 1) * (r + 1) != c {
            break c;
        }
    };
    let root = Real::sqrt_rational(&BigRational::from_integer(BigInt::from(c)), precision);
    let frac = root.sub(&Real::from_int(root.floor(), precision));
    ExactPoint::Real(if rng.gen::<bool>() { frac.neg() } else { frac })
}
