//! The skew product `R(ω, x) = (σω, T_{ω₁} x)` on `[0, 1]` with the Gauss map
//! `T₀` and the Rényi map `T₁`, and the digit function `b` that recovers the
//! digits of `K` from `R`-orbits.

use super::ExpansionTrace;
use crate::digit::Digit;
use crate::error::{Error, Result};
use crate::point::{Domain, ExactPoint};

/// `T₀x = 1/x mod 1` (`T₀0 = 0`) for bit 0, `T₁x = 1/(1-x) mod 1`
/// (`T₁1 = 0`) for bit 1.
pub fn step_r(bit: u8, x: &ExactPoint) -> Result<ExactPoint> {
    x.check_domain(Domain::Unit)?;
    let base = if bit == 0 { x.clone() } else { x.one_minus() };
    if base.is_zero() {
        return Ok(x.zero_like());
    }
    Ok(base.reciprocal_split()?.1)
}

/// `b(ω, x) = k + ω₂` where `ω₁ + (-1)^{ω₁} x ∈ (1/(k+1), 1/k]`, or the
/// infinite digit when that quantity is 0.
pub fn b_digit(bit1: u8, bit2: u8, x: &ExactPoint) -> Result<Digit> {
    x.check_domain(Domain::Unit)?;
    let v = if bit1 == 0 { x.clone() } else { x.one_minus() };
    if v.is_zero() {
        return Ok(Digit::Infinity);
    }
    let (k, _) = super::branch(&v)?;
    k.checked_add(u64::from(bit2))
        .map(Digit::Finite)
        .ok_or(Error::DigitOverflow)
}

/// Recomputes every digit of `trace` as `b(R^{n-1}(ω₀ω, x + ω₀))` and
/// returns the indices `n` where it disagrees with `d_n`.
///
/// For `x >= 0` this is the relation `d_n(ω, x) = b(R^{n-1}(0ω, x))`; for
/// negative starts the prefix bit is 1 and the point is shifted to `x + 1`.
pub fn b_digit_cross_check(trace: &ExpansionTrace) -> Result<Vec<usize>> {
    let mut z = trace.start.add_int(i64::from(trace.omega0));
    let mut mismatches = Vec::new();
    for n in 1..=trace.len() {
        let (w1, w2) = (trace.omega(n - 1), trace.omega(n));
        let b = b_digit(w1, w2, &z)?;
        if b != trace.steps[n - 1].digit.d {
            mismatches.push(n);
        }
        z = step_r(w1, &z)?;
    }
    Ok(mismatches)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expansion::expand;
    use crate::omega::OmegaWord;

    #[test]
    fn step_r_examples() {
        let zero = ExactPoint::rational(0, 1);
        assert_eq!(step_r(0, &zero).unwrap(), zero);
        assert_eq!(step_r(1, &zero).unwrap(), zero);
        assert_eq!(step_r(1, &ExactPoint::rational(1, 1)).unwrap(), zero);
        assert_eq!(
            step_r(0, &ExactPoint::rational(2, 5)).unwrap(),
            ExactPoint::rational(1, 2)
        );
        assert_eq!(
            step_r(1, &ExactPoint::rational(2, 5)).unwrap(),
            ExactPoint::rational(2, 3)
        );
        assert!(step_r(0, &ExactPoint::rational(-1, 5)).is_err());
    }

    #[test]
    fn b_digit_examples() {
        let half = ExactPoint::rational(1, 2);
        assert_eq!(b_digit(0, 0, &half).unwrap(), Digit::Finite(2));
        assert_eq!(b_digit(1, 0, &half).unwrap(), Digit::Finite(2));
        assert_eq!(b_digit(1, 1, &ExactPoint::rational(3, 4)).unwrap(), Digit::Finite(5));
        assert_eq!(b_digit(0, 1, &ExactPoint::rational(0, 1)).unwrap(), Digit::Infinity);
        assert_eq!(b_digit(1, 0, &ExactPoint::rational(1, 1)).unwrap(), Digit::Infinity);
    }

    #[test]
    fn cross_check_agrees_on_signed_starts() {
        for (p, q) in [(5, 8), (-5, 8), (-1, 1), (1, 1), (-123, 457)] {
            let mut w = OmegaWord::periodic(vec![0, 1, 1]).unwrap();
            let t = expand(&ExactPoint::rational(p, q), &mut w, 50).unwrap();
            assert_eq!(b_digit_cross_check(&t).unwrap(), Vec::<usize>::new());
        }
    }
}
