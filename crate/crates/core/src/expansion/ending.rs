//! Endings of rational expansions. Once the orbit of a rational reaches a
//! point `±1/k`, the remaining digits are `k` (then stop), or `k+1` followed
//! by 2s and a final 1, or `k+1` followed by 2s forever.

use num_bigint::BigInt;
use num_traits::{One, Signed};

use super::ExpansionTrace;
use crate::point::ExactPoint;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Ending {
    /// `(…, k)` and stop.
    Direct { k: u64 },
    /// `(…, k+1, 2, …, 2, 1)` with `twos` 2s, then stop.
    Chain { k: u64, twos: usize },
    /// `(…, k+1, 2, 2, …)` through the end of the trace.
    OpenTwos { k: u64, twos: usize },
}

fn is_unit_fraction_or_zero(p: &ExactPoint) -> bool {
    match p {
        ExactPoint::Rational(r) => r.numer().abs() <= BigInt::one(),
        ExactPoint::Real(_) => {
            let r = p.to_rational();
            r.numer().abs() <= BigInt::one()
        }
    }
}

/// First `m` such that `π(K^m(ω, x))` is 0 or `±1/k`.
pub fn first_unit_fraction_index(trace: &ExpansionTrace) -> Option<usize> {
    (0..=trace.len()).find(|&m| is_unit_fraction_or_zero(trace.point(m)))
}

/// Classifies the digits after the first unit fraction. `None` if the trace
/// never reaches one or the digits do not follow any admissible ending.
pub fn classify_ending(trace: &ExpansionTrace) -> Option<(usize, Ending)> {
    let m = first_unit_fraction_index(trace)?;
    let point = trace.point(m);
    if point.is_zero() {
        return None;
    }
    let k = point.to_rational().denom().to_string().parse::<u64>().ok()?;
    let digits = trace.digits();
    let tail = &digits[m..];
    let bits = &trace.omega_bits()[m..];
    let Some((&first, rest)) = tail.split_first() else {
        return Some((m, Ending::OpenTwos { k, twos: 0 }));
    };
    if bits[0] == 0 {
        return (first == k && rest.is_empty() && trace.terminated)
            .then_some((m, Ending::Direct { k }));
    }
    if first != k + 1 {
        return None;
    }
    let twos = rest.iter().take_while(|&&d| d == 2).count();
    match &rest[twos..] {
        [] if !trace.terminated => Some((m, Ending::OpenTwos { k, twos })),
        [1] if trace.terminated => Some((m, Ending::Chain { k, twos })),
        _ => None,
    }
}
