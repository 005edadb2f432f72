use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::convergent::ConvergentState;
use crate::digit::{sign_of_bit, SignedDigit};
use crate::error::{Error, Result};
use crate::omega::OmegaWord;
use crate::point::{format_point_decimal, parse_point, parse_rational, ExactPoint};

#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    pub digit: SignedDigit,
    /// The bit `ω_n` consumed by this step.
    pub omega: u8,
    /// `π(K^n(ω, x))`
    pub point: ExactPoint,
}

/// Full record of one run of `K`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpansionTrace {
    pub start: ExactPoint,
    pub omega0: u8,
    pub steps: Vec<Step>,
    /// The orbit reached 0: the next digit would be infinite.
    pub terminated: bool,
    /// `(p_n, q_n)` for `n = 1..=len`.
    pub convergents: Vec<(BigInt, BigInt)>,
}

impl ExpansionTrace {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn digits(&self) -> Vec<u64> {
        self.steps.iter().map(|s| s.digit.value()).collect()
    }

    pub fn signs(&self) -> Vec<i8> {
        self.steps.iter().map(|s| s.digit.epsilon).collect()
    }

    /// `ω₁ … ω_N`
    pub fn omega_bits(&self) -> Vec<u8> {
        self.steps.iter().map(|s| s.omega).collect()
    }

    /// `ω_i` for `0 <= i <= len`.
    pub fn omega(&self, i: usize) -> u8 {
        if i == 0 {
            self.omega0
        } else {
            self.steps[i - 1].omega
        }
    }

    /// `y_m = π(K^m(ω, x))`, `y_0 = x`.
    pub fn point(&self, m: usize) -> &ExactPoint {
        if m == 0 {
            &self.start
        } else {
            &self.steps[m - 1].point
        }
    }

    /// `(p_n, q_n)` for `-1 <= n <= len`.
    pub fn pq(&self, n: isize) -> (BigInt, BigInt) {
        match n {
            -1 => (BigInt::one(), BigInt::zero()),
            0 => (BigInt::zero(), BigInt::one()),
            n => self.convergents[n as usize - 1].clone(),
        }
    }

    pub fn q(&self, n: isize) -> BigInt {
        self.pq(n).1
    }

    pub fn convergent_state(&self, n: usize) -> ConvergentState {
        let (p_cur, q_cur) = self.pq(n as isize);
        let (p_prev, q_prev) = self.pq(n as isize - 1);
        let sign_parity = (0..n).map(|i| sign_of_bit(self.omega(i))).product();
        ConvergentState {
            p_prev,
            p_cur,
            q_prev,
            q_cur,
            n,
            sign_parity,
        }
    }

    pub fn record(&self) -> TraceRecord {
        let start = match &self.start {
            ExactPoint::Rational(_) => self.start.to_string(),
            ExactPoint::Real(r) => format_point_decimal(&self.start, r.decimal_digits() + 3),
        };
        TraceRecord {
            start,
            omega_bits: self
                .omega_bits()
                .iter()
                .map(|b| char::from(b'0' + b))
                .collect(),
            digits: self.digits(),
            signs: self.signs(),
            convergents: self
                .convergents
                .iter()
                .map(|(p, q)| format!("{p}/{q}"))
                .collect(),
            terminated: self.terminated,
        }
    }
}

/// JSON form of a trace.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub start: String,
    pub omega_bits: String,
    pub digits: Vec<u64>,
    pub signs: Vec<i8>,
    pub convergents: Vec<String>,
    pub terminated: bool,
}

impl TraceRecord {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("trace record serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Re-runs `K` from the recorded start and bits.
    pub fn replay(&self, precision: u32) -> Result<ExpansionTrace> {
        let x = parse_point(&self.start, precision)?;
        let mut word: OmegaWord = if self.omega_bits.is_empty() {
            OmegaWord::explicit(Vec::new())?
        } else {
            self.omega_bits.parse()?
        };
        super::expand(&x, &mut word, self.digits.len())
    }

    /// Checks the recorded convergents parse as rationals.
    pub fn parsed_convergents(&self) -> Result<Vec<num_rational::BigRational>> {
        self.convergents.iter().map(|c| parse_rational(c)).collect()
    }
}
