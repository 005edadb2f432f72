//! The random continued fraction map `K`, digit extraction and convergents.
//!
//! A point `x ∈ [-1, 1]` with `|x| ∈ (1/(k+1), 1/k]` and sign bit `ω` is sent
//! to `1/|x| - (k + ω)`, emitting the digit `k + ω` with partial numerator
//! `sign(x)`. The first sign bit `ω₀` is not read from the word: it is the sign
//! bit of the starting point.

mod audit;
mod ending;
mod skew;
mod steer;
mod trace;

pub use audit::{lemma_audit, Violation};
pub use ending::{classify_ending, first_unit_fraction_index, Ending};
pub use skew::{b_digit, b_digit_cross_check, step_r};
pub use steer::{
    alpha_map, steer_alpha, steer_digits, AlphaSteering, DigitSet, SteerFailure, SteerOptions,
    SteerOutcome,
};
pub use trace::{ExpansionTrace, Step, TraceRecord};

use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::convergent::ConvergentState;
use crate::digit::SignedDigit;
use crate::error::{Error, Result};
use crate::omega::OmegaWord;
use crate::point::{Domain, ExactPoint};

/// Sign bit of a point: 0 for `x >= 0`, 1 otherwise.
pub fn sign_bit(x: &ExactPoint) -> u8 {
    u8::from(x.signum() < 0)
}

/// The unique `k` with `|x| ∈ (1/(k+1), 1/k]`, together with the fractional
/// part of `1/|x|`.
pub fn branch(x: &ExactPoint) -> Result<(u64, ExactPoint)> {
    let (k, frac) = x.reciprocal_split()?;
    let k = k.to_u64().ok_or(Error::DigitOverflow)?;
    Ok((k, frac))
}

/// One application of `K`: returns the emitted digit and `π(K(ω, x))`.
pub fn step_k(x: &ExactPoint, omega_bit: u8) -> Result<(SignedDigit, ExactPoint)> {
    x.check_domain(Domain::Signed)?;
    if x.is_zero() {
        return Err(Error::ZeroInput);
    }
    let (k, frac) = branch(x)?;
    let d = k.checked_add(u64::from(omega_bit)).ok_or(Error::DigitOverflow)?;
    let next = frac.add_int(-i64::from(omega_bit));
    Ok((SignedDigit::new(x.signum(), d), next))
}

/// Incrementally builds a trace, keeping the convergent state in step.
#[derive(Debug, Clone)]
pub(crate) struct TraceBuilder {
    trace: ExpansionTrace,
    state: ConvergentState,
    current: ExactPoint,
    prev_omega: u8,
}

impl TraceBuilder {
    pub(crate) fn new(x: &ExactPoint) -> Result<Self> {
        x.check_domain(Domain::Signed)?;
        let omega0 = sign_bit(x);
        Ok(TraceBuilder {
            trace: ExpansionTrace {
                start: x.clone(),
                omega0,
                steps: Vec::new(),
                terminated: x.is_zero(),
                convergents: Vec::new(),
            },
            state: ConvergentState::new(),
            current: x.clone(),
            prev_omega: omega0,
        })
    }

    pub(crate) fn current(&self) -> &ExactPoint {
        &self.current
    }

    pub(crate) fn len(&self) -> usize {
        self.trace.steps.len()
    }

    pub(crate) fn is_terminated(&self) -> bool {
        self.trace.terminated
    }

    pub(crate) fn push(&mut self, omega_bit: u8) -> Result<()> {
        let (digit, next) = step_k(&self.current, omega_bit)?;
        self.commit(omega_bit, digit, next)
    }

    pub(crate) fn commit(&mut self, omega_bit: u8, digit: SignedDigit, next: ExactPoint) -> Result<()> {
        self.state = self.state.push(&digit, self.prev_omega)?;
        self.trace
            .convergents
            .push((self.state.p_cur.clone(), self.state.q_cur.clone()));
        self.trace.terminated = next.is_zero();
        self.trace.steps.push(Step {
            digit,
            omega: omega_bit,
            point: next.clone(),
        });
        self.current = next;
        self.prev_omega = omega_bit;
        Ok(())
    }

    pub(crate) fn finish(self) -> ExpansionTrace {
        self.trace
    }
}

/// Iterates `K` for at most `n_max` digits, stopping early when the orbit
/// reaches 0 (a finite expansion).
pub fn expand(x: &ExactPoint, word: &mut OmegaWord, n_max: usize) -> Result<ExpansionTrace> {
    let mut builder = TraceBuilder::new(x)?;
    while builder.len() < n_max && !builder.is_terminated() {
        let bit = word.next_bit()?;
        builder.push(bit)?;
    }
    Ok(builder.finish())
}

/// The `n`-th convergent `p_n / q_n` (with `p_0/q_0 = 0`).
pub fn reconstruct(trace: &ExpansionTrace, n: usize) -> Result<BigRational> {
    if n > trace.len() {
        return Err(Error::OutOfRange {
            index: n,
            len: trace.len(),
        });
    }
    let (p, q) = trace.pq(n as isize);
    Ok(BigRational::new(p, q))
}

/// `|x - p_n/q_n|` next to the bound `1/(q_n |q_n - q_{n-1}|)`, both exact.
#[derive(Debug, Clone, PartialEq)]
pub struct ApproximationError {
    pub actual: BigRational,
    /// `None` when `q_n = q_{n-1}` (only possible at `n = 1`), i.e. no bound.
    pub bound: Option<BigRational>,
}

impl ApproximationError {
    pub fn within_bound(&self) -> bool {
        self.bound.as_ref().is_none_or(|b| &self.actual <= b)
    }

    pub fn actual_f64(&self) -> f64 {
        crate::point::rational_to_f64(&self.actual)
    }

    pub fn bound_f64(&self) -> f64 {
        self.bound
            .as_ref()
            .map_or(f64::INFINITY, crate::point::rational_to_f64)
    }
}

pub fn approximation_error(state: &ConvergentState, x: &ExactPoint) -> ApproximationError {
    let x = x.to_rational();
    let approx = BigRational::new(state.p_cur.clone(), state.q_cur.clone());
    let actual = (x - approx).abs();
    let gap = (&state.q_cur - &state.q_prev).abs();
    let bound = if gap.is_zero() {
        None
    } else {
        Some(BigRational::new(1.into(), (&state.q_cur * gap).abs()))
    };
    ApproximationError { actual, bound }
}

/// `|x - (p_n + p_{n-1} t)/(q_n + q_{n-1} t)|` with `t = π(K^n(ω, x))`.
pub fn reconstruction_residual(trace: &ExpansionTrace, n: usize) -> Result<BigRational> {
    if n == 0 || n > trace.len() {
        return Err(Error::OutOfRange {
            index: n,
            len: trace.len(),
        });
    }
    let t = trace.steps[n - 1].point.to_rational();
    let (p, q) = trace.pq(n as isize);
    let (pp, qp) = trace.pq(n as isize - 1);
    let num = BigRational::from_integer(p) + BigRational::from_integer(pp) * &t;
    let den = BigRational::from_integer(q) + BigRational::from_integer(qp) * &t;
    if den.is_zero() {
        return Err(Error::InvariantViolation(format!(
            "reconstruction denominator vanishes at n={n}"
        )));
    }
    Ok((trace.start.to_rational() - num / den).abs())
}

#[cfg(test)]
pub(crate) fn int(v: i64) -> num_bigint::BigInt {
    num_bigint::BigInt::from(v)
}
