//! Choosing the bits `ω_n` on purpose: expansions with restricted digits and
//! Nakada's α-continued fractions realised as orbits of `K`.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use num_rational::BigRational;
use num_traits::{One, Signed};

use super::{branch, step_k, ExpansionTrace, TraceBuilder};
use crate::error::{Error, Result};
use crate::point::{rational_to_f64, Domain, ExactPoint};
use crate::real::Real;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DigitSet {
    Odd,
    Even,
    Set(BTreeSet<u64>),
}

impl DigitSet {
    pub fn contains(&self, d: u64) -> bool {
        match self {
            DigitSet::Odd => d % 2 == 1,
            DigitSet::Even => d.is_multiple_of(2),
            DigitSet::Set(s) => s.contains(&d),
        }
    }

    pub fn of(digits: &[u64]) -> Self {
        DigitSet::Set(digits.iter().copied().collect())
    }
}

impl FromStr for DigitSet {
    type Err = Error;

    /// `odd`, `even` or `set:a,b,...`
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "odd" => Ok(DigitSet::Odd),
            "even" => Ok(DigitSet::Even),
            other => {
                let list = other
                    .strip_prefix("set:")
                    .ok_or_else(|| Error::Parse(format!("expected odd, even or set:..., got {s:?}")))?;
                let set = list
                    .split(',')
                    .map(|d| {
                        d.trim()
                            .parse::<u64>()
                            .ok()
                            .filter(|&d| d >= 1)
                            .ok_or_else(|| Error::Parse(format!("invalid digit {d:?}")))
                    })
                    .collect::<Result<BTreeSet<u64>>>()?;
                Ok(DigitSet::Set(set))
            }
        }
    }
}

impl fmt::Display for DigitSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DigitSet::Odd => f.write_str("odd"),
            DigitSet::Even => f.write_str("even"),
            DigitSet::Set(s) => {
                let list: Vec<String> = s.iter().map(u64::to_string).collect();
                write!(f, "set:{}", list.join(","))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SteerOptions {
    /// Steps searched ahead before committing to a bit when both candidate
    /// digits are allowed. 1 only asks that the successor still has an
    /// allowed digit.
    pub lookahead: usize,
}

impl Default for SteerOptions {
    fn default() -> Self {
        SteerOptions { lookahead: 16 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SteerFailure {
    /// 1-based index of the digit that could not be chosen.
    pub step: usize,
    pub point: ExactPoint,
    /// Digits emitted before the failure.
    pub partial: ExpansionTrace,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SteerOutcome {
    Complete(ExpansionTrace),
    Failed(SteerFailure),
}

impl SteerOutcome {
    pub fn is_complete(&self) -> bool {
        matches!(self, SteerOutcome::Complete(_))
    }

    pub fn failure_step(&self) -> Option<usize> {
        match self {
            SteerOutcome::Complete(_) => None,
            SteerOutcome::Failed(f) => Some(f.step),
        }
    }
}

/// Is there a continuation of `depth` digits from `x` using only `allowed`?
fn viable(x: &ExactPoint, allowed: &DigitSet, depth: usize) -> Result<bool> {
    if depth == 0 || x.is_zero() {
        return Ok(true);
    }
    let k = match branch(x) {
        Ok((k, _)) => k,
        Err(Error::DigitOverflow) => return Ok(false),
        Err(e) => return Err(e),
    };
    for bit in 0..=1u8 {
        if allowed.contains(k + u64::from(bit)) {
            let (_, next) = step_k(x, bit)?;
            if viable(&next, allowed, depth - 1)? {
                return Ok(true);
            }
        }
    }
    Ok(false)
}

/// Builds an expansion of `x` with every digit in `allowed`, choosing each
/// bit greedily. When both candidates `k` and `k+1` are allowed, bit 0 is
/// preferred unless its continuation dies within the lookahead window.
pub fn steer_digits(
    x: &ExactPoint,
    allowed: &DigitSet,
    n_max: usize,
    options: SteerOptions,
) -> Result<SteerOutcome> {
    x.check_domain(Domain::Signed)?;
    if x.is_zero() {
        return Err(Error::ZeroInput);
    }
    let mut builder = TraceBuilder::new(x)?;
    while builder.len() < n_max && !builder.is_terminated() {
        let current = builder.current().clone();
        let candidates: Vec<u8> = match branch(&current) {
            Ok((k, _)) => (0..=1u8)
                .filter(|&b| k.checked_add(u64::from(b)).is_some_and(|d| allowed.contains(d)))
                .collect(),
            Err(Error::DigitOverflow) => Vec::new(),
            Err(e) => return Err(e),
        };
        if candidates.is_empty() {
            return Ok(SteerOutcome::Failed(SteerFailure {
                step: builder.len() + 1,
                point: current,
                partial: builder.finish(),
            }));
        }
        let mut chosen = None;
        if candidates.len() == 2 && options.lookahead > 0 {
            for &bit in &candidates {
                let (digit, next) = step_k(&current, bit)?;
                if viable(&next, allowed, options.lookahead)? {
                    chosen = Some((bit, digit, next));
                    break;
                }
            }
        }
        let (bit, digit, next) = match chosen {
            Some(c) => c,
            None => {
                let bit = candidates[0];
                let (digit, next) = step_k(&current, bit)?;
                (bit, digit, next)
            }
        };
        builder.commit(bit, digit, next)?;
    }
    Ok(SteerOutcome::Complete(builder.finish()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlphaSteering {
    pub alpha: ExactPoint,
    /// `ω₁ … ω_n`
    pub omega: Vec<u8>,
    /// `π(K^m(ω, x))` for `m = 0..=n`.
    pub orbit: Vec<ExactPoint>,
    /// `T_α^m x` for `m = 0..=n`, iterated directly.
    pub direct: Vec<ExactPoint>,
    pub max_discrepancy: f64,
}

fn check_alpha_domain(x: &ExactPoint, alpha: &BigRational) -> Result<()> {
    let lower = alpha - BigRational::one();
    if x.cmp_rational(&lower) == Ordering::Less || x.cmp_rational(alpha) != Ordering::Less {
        return Err(Error::Domain {
            value: x.to_string(),
            domain: "[alpha - 1, alpha)",
        });
    }
    Ok(())
}

/// Nakada's map `T_α x = |1/x| - ⌊|1/x| - (α - 1)⌋`, `T_α 0 = 0`, computed from
/// a rounded reciprocal and an exact floor.
pub fn alpha_map(x: &ExactPoint, alpha: &BigRational) -> ExactPoint {
    if x.is_zero() {
        return x.clone();
    }
    match x {
        ExactPoint::Rational(r) => {
            let inv = r.abs().recip();
            let shift = (&inv - alpha + BigRational::one()).floor();
            ExactPoint::Rational(inv - shift)
        }
        ExactPoint::Real(r) => {
            let precision = r.precision();
            let inv = Real::from_int(1, precision).div(&r.abs());
            let shift = (inv.to_rational() - alpha + BigRational::one())
                .floor()
                .to_integer();
            ExactPoint::Real(inv.sub(&Real::from_int(shift, precision)))
        }
    }
}

/// Chooses `ω` so that the `K`-orbit of `x` follows `T_α`: at each step keep
/// the Gauss/Rényi image if it lies in `[α-1, α)`, otherwise subtract 1.
pub fn steer_alpha(x: &ExactPoint, alpha: &ExactPoint, n_max: usize) -> Result<AlphaSteering> {
    let a = alpha.to_rational();
    if !a.is_positive() || a > BigRational::one() {
        return Err(Error::Domain {
            value: alpha.to_string(),
            domain: "(0, 1]",
        });
    }
    check_alpha_domain(x, &a)?;
    let mut omega = Vec::with_capacity(n_max);
    let mut orbit = vec![x.clone()];
    let mut direct = vec![x.clone()];
    let mut max_discrepancy = 0.0f64;
    for _ in 0..n_max {
        let y = orbit.last().expect("non-empty orbit");
        let (bit, next) = if y.is_zero() {
            (0, y.clone())
        } else {
            let (_, image) = branch(y)?;
            let bit = u8::from(image.cmp_rational(&a) != Ordering::Less);
            let (_, next) = step_k(y, bit)?;
            (bit, next)
        };
        let d = alpha_map(direct.last().expect("non-empty orbit"), &a);
        let gap = rational_to_f64(&(next.to_rational() - d.to_rational()).abs());
        max_discrepancy = max_discrepancy.max(gap);
        omega.push(bit);
        orbit.push(next);
        direct.push(d);
    }
    Ok(AlphaSteering {
        alpha: alpha.clone(),
        omega,
        orbit,
        direct,
        max_discrepancy,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expansion::expand;
    use crate::omega::OmegaWord;
    use crate::real::DEFAULT_PRECISION;

    fn complete(o: SteerOutcome) -> ExpansionTrace {
        match o {
            SteerOutcome::Complete(t) => t,
            SteerOutcome::Failed(f) => panic!("steering failed at step {}", f.step),
        }
    }

    #[test]
    fn digit_set_parsing() {
        assert_eq!("odd".parse::<DigitSet>().unwrap(), DigitSet::Odd);
        let s: DigitSet = "set:2,1".parse().unwrap();
        assert_eq!(s, DigitSet::of(&[1, 2]));
        assert_eq!(s.to_string(), "set:1,2");
        assert!("set:0".parse::<DigitSet>().is_err());
        assert!("prime".parse::<DigitSet>().is_err());
    }

    #[test]
    fn one_and_two_fail_just_below_a_fifth() {
        let x = ExactPoint::Real(
            Real::from_int(1, DEFAULT_PRECISION)
                .div(&Real::from_int(5, DEFAULT_PRECISION))
                .sub(&Real::from_f64(1e-9, DEFAULT_PRECISION)),
        );
        let o = steer_digits(&x, &DigitSet::of(&[1, 2]), 10, SteerOptions::default()).unwrap();
        assert_eq!(o.failure_step(), Some(1));
    }

    #[test]
    fn half_with_odd_digits() {
        let o = steer_digits(&ExactPoint::rational(1, 2), &DigitSet::Odd, 10, SteerOptions::default())
            .unwrap();
        let t = complete(o);
        assert_eq!(t.digits(), vec![3, 1]);
        assert!(t.terminated);
        assert_eq!(super::super::reconstruct(&t, 2).unwrap(), BigRational::new(1.into(), 2.into()));
    }

    #[test]
    fn point_eight_with_one_and_two() {
        let x = ExactPoint::real_f64(0.8);
        let t = complete(steer_digits(&x, &DigitSet::of(&[1, 2]), 100, SteerOptions::default()).unwrap());
        assert_eq!(t.len(), 100);
        assert!(t.digits().iter().all(|&d| d == 1 || d == 2));
    }

    #[test]
    fn shallow_lookahead_dead_ends_in_the_forced_band() {
        // x = 0.69: bit 0 gives 1/x - 1 ≈ 0.449, which still has digit 2
        // available but is then sent into (0, 1/3).
        let x = ExactPoint::real_f64(0.69);
        let shallow = steer_digits(&x, &DigitSet::of(&[1, 2]), 10, SteerOptions { lookahead: 1 }).unwrap();
        assert_eq!(shallow.failure_step(), Some(3));
        let deep = steer_digits(&x, &DigitSet::of(&[1, 2]), 10, SteerOptions::default()).unwrap();
        assert!(deep.is_complete());
    }

    #[test]
    fn lookahead_survives_near_unit_fractions() {
        // 0.8 → -0.75 → ≈1/3 → ≈0 along one branch of the search.
        let x = ExactPoint::real_f64(0.8);
        let o = steer_digits(&x, &DigitSet::of(&[1, 2]), 4, SteerOptions::default()).unwrap();
        assert!(o.is_complete());
        let tiny = ExactPoint::real_f64(1e-30);
        let o = steer_digits(&tiny, &DigitSet::Odd, 4, SteerOptions::default()).unwrap();
        assert_eq!(o.failure_step(), Some(1));
    }

    #[test]
    fn steered_trace_matches_plain_expansion() {
        let x = ExactPoint::real_f64(-0.3141592653589793);
        let t = complete(steer_digits(&x, &DigitSet::Even, 40, SteerOptions::default()).unwrap());
        assert!(t.digits().iter().all(|d| d % 2 == 0));
        let mut w = OmegaWord::explicit(t.omega_bits()).unwrap();
        assert_eq!(expand(&x, &mut w, 40).unwrap(), t);
    }

    #[test]
    fn alpha_one_is_the_gauss_orbit() {
        let x = ExactPoint::real_f64(0.3819660112501051);
        let s = steer_alpha(&x, &ExactPoint::rational(1, 1), 20).unwrap();
        assert!(s.omega.iter().all(|&b| b == 0));
        let mut y = x.clone();
        for m in 1..=20 {
            y = super::super::step_r(0, &y).unwrap();
            assert_eq!(s.orbit[m], y);
        }
    }

    #[test]
    fn alpha_half_first_step() {
        let x = ExactPoint::rational(2, 5);
        let s = steer_alpha(&x, &ExactPoint::rational(1, 2), 3).unwrap();
        assert_eq!(s.omega[0], 1);
        assert_eq!(s.orbit[1], ExactPoint::rational(-1, 2));
        assert_eq!(s.max_discrepancy, 0.0);
    }

    #[test]
    fn alpha_domain_is_enforced() {
        let alpha = ExactPoint::rational(3, 10);
        assert!(steer_alpha(&ExactPoint::rational(3, 10), &alpha, 5).is_err());
        assert!(steer_alpha(&ExactPoint::rational(-7, 10), &alpha, 5).is_ok());
        assert!(steer_alpha(&ExactPoint::rational(-8, 10), &alpha, 5).is_err());
        assert!(steer_alpha(&ExactPoint::rational(0, 1), &ExactPoint::rational(0, 1), 5).is_err());
    }

    #[test]
    fn alpha_rational_routes_agree_exactly() {
        let alpha = ExactPoint::rational(3, 10);
        let s = steer_alpha(&ExactPoint::rational(-17, 83), &alpha, 30).unwrap();
        assert_eq!(s.orbit, s.direct);
        assert_eq!(s.max_discrepancy, 0.0);
    }
}
