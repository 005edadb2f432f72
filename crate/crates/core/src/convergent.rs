//! Exact convergents `p_n / q_n` of a random continued fraction.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::digit::{sign_of_bit, Digit, SignedDigit};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConvergentState {
    pub p_prev: BigInt,
    pub p_cur: BigInt,
    pub q_prev: BigInt,
    pub q_cur: BigInt,
    pub n: usize,
    /// `(-1)^(ω₀ + … + ω_{n-1})`
    pub sign_parity: i8,
}

impl Default for ConvergentState {
    fn default() -> Self {
        Self::new()
    }
}

impl ConvergentState {
    /// `p₋₁ = 1, p₀ = 0, q₋₁ = 0, q₀ = 1`.
    pub fn new() -> Self {
        ConvergentState {
            p_prev: BigInt::one(),
            p_cur: BigInt::zero(),
            q_prev: BigInt::zero(),
            q_cur: BigInt::one(),
            n: 0,
            sign_parity: 1,
        }
    }

    /// Applies `p_n = d_n p_{n-1} + (-1)^{ω_{n-1}} p_{n-2}` (and the same for
    /// `q`), then checks the determinant identity and `q_n > 0` for `n >= 2`.
    pub fn push(&self, digit: &SignedDigit, omega_prev: u8) -> Result<ConvergentState> {
        let d = match digit.d {
            Digit::Finite(d) => BigInt::from(d),
            Digit::Infinity => {
                return Err(Error::InvariantViolation(
                    "cannot push the infinite digit".into(),
                ))
            }
        };
        let sign = sign_of_bit(omega_prev);
        if digit.epsilon != sign {
            return Err(Error::InvariantViolation(format!(
                "digit sign {} disagrees with omega bit {omega_prev}",
                digit.epsilon
            )));
        }
        let (p, q) = if sign > 0 {
            (
                &d * &self.p_cur + &self.p_prev,
                &d * &self.q_cur + &self.q_prev,
            )
        } else {
            (
                &d * &self.p_cur - &self.p_prev,
                &d * &self.q_cur - &self.q_prev,
            )
        };
        let next = ConvergentState {
            p_prev: self.p_cur.clone(),
            p_cur: p,
            q_prev: self.q_cur.clone(),
            q_cur: q,
            n: self.n + 1,
            sign_parity: self.sign_parity * sign,
        };
        next.check()?;
        Ok(next)
    }

    /// `p_{n-1} q_n - p_n q_{n-1}`
    pub fn determinant(&self) -> BigInt {
        &self.p_prev * &self.q_cur - &self.p_cur * &self.q_prev
    }

    /// `(-1)^n · sign_parity`
    pub fn expected_determinant(&self) -> i8 {
        let alt = if self.n.is_multiple_of(2) { 1 } else { -1 };
        alt * self.sign_parity
    }

    fn check(&self) -> Result<()> {
        if self.determinant() != BigInt::from(self.expected_determinant()) {
            return Err(Error::InvariantViolation(format!(
                "determinant identity fails at n={}: {} != {}",
                self.n,
                self.determinant(),
                self.expected_determinant()
            )));
        }
        if self.n >= 2 && !self.q_cur.is_positive() {
            return Err(Error::InvariantViolation(format!(
                "q_{} = {} is not positive",
                self.n, self.q_cur
            )));
        }
        Ok(())
    }

    pub fn value(&self) -> BigRational {
        BigRational::new(self.p_cur.clone(), self.q_cur.clone())
    }
}
