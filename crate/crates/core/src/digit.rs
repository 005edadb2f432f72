use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Digit {
    Finite(u64),
    /// Terminal marker: the orbit reached 0.
    Infinity,
}

impl Digit {
    pub fn finite(self) -> Option<u64> {
        match self {
            Digit::Finite(d) => Some(d),
            Digit::Infinity => None,
        }
    }
}

impl fmt::Display for Digit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Digit::Finite(d) => write!(f, "{d}"),
            Digit::Infinity => f.write_str("inf"),
        }
    }
}

/// One expansion term `(ε, d)`: the partial numerator sign and the digit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SignedDigit {
    pub epsilon: i8,
    pub d: Digit,
}

impl SignedDigit {
    pub fn new(epsilon: i8, d: u64) -> Self {
        debug_assert!(epsilon == 1 || epsilon == -1);
        debug_assert!(d >= 1);
        SignedDigit {
            epsilon,
            d: Digit::Finite(d),
        }
    }

    pub fn infinite(epsilon: i8) -> Self {
        SignedDigit {
            epsilon,
            d: Digit::Infinity,
        }
    }

    /// Finite digit value; panics on the terminal marker.
    pub fn value(&self) -> u64 {
        self.d.finite().expect("finite digit")
    }
}

/// `(-1)^bit`
pub fn sign_of_bit(bit: u8) -> i8 {
    if bit == 0 {
        1
    } else {
        -1
    }
}
