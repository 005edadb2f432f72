//! Sources of the sign bits `ω₁ω₂…` driving the random map.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum OmegaKind {
    Explicit(Vec<u8>),
    Periodic(Vec<u8>),
    /// `p0` is the probability of bit 0 (the Gauss branch).
    Bernoulli { p0: f64, seed: u64 },
}

/// A bit word read left to right. Not meant to be shared between threads
/// while reading; clone it (or use a different seed) instead.
#[derive(Debug, Clone)]
pub struct OmegaWord {
    kind: OmegaKind,
    cursor: usize,
    rng: Option<ChaCha8Rng>,
}

impl OmegaWord {
    pub fn new(kind: OmegaKind) -> Result<Self> {
        match &kind {
            OmegaKind::Explicit(bits) => check_bits(bits)?,
            OmegaKind::Periodic(bits) => {
                check_bits(bits)?;
                if bits.is_empty() {
                    return Err(Error::Config("periodic word needs a non-empty period".into()));
                }
            }
            OmegaKind::Bernoulli { p0, .. } => {
                if !(0.0..=1.0).contains(p0) {
                    return Err(Error::Config(format!("bernoulli p0={p0} not in [0,1]")));
                }
            }
        }
        let rng = match &kind {
            OmegaKind::Bernoulli { seed, .. } => Some(ChaCha8Rng::seed_from_u64(*seed)),
            _ => None,
        };
        Ok(OmegaWord {
            kind,
            cursor: 0,
            rng,
        })
    }

    pub fn explicit(bits: impl Into<Vec<u8>>) -> Result<Self> {
        Self::new(OmegaKind::Explicit(bits.into()))
    }

    pub fn periodic(bits: impl Into<Vec<u8>>) -> Result<Self> {
        Self::new(OmegaKind::Periodic(bits.into()))
    }

    pub fn bernoulli(p0: f64, seed: u64) -> Result<Self> {
        Self::new(OmegaKind::Bernoulli { p0, seed })
    }

    pub fn kind(&self) -> &OmegaKind {
        &self.kind
    }

    pub fn cursor(&self) -> usize {
        self.cursor
    }

    pub fn next_bit(&mut self) -> Result<u8> {
        let bit = match &self.kind {
            OmegaKind::Explicit(bits) => *bits
                .get(self.cursor)
                .ok_or(Error::OmegaExhausted(bits.len()))?,
            OmegaKind::Periodic(bits) => bits[self.cursor % bits.len()],
            OmegaKind::Bernoulli { p0, .. } => {
                let rng = self.rng.as_mut().expect("bernoulli word carries an rng");
                u8::from(rng.gen::<f64>() >= *p0)
            }
        };
        self.cursor += 1;
        Ok(bit)
    }

    /// Explicit words only: bits left before exhaustion.
    pub fn remaining(&self) -> Option<usize> {
        match &self.kind {
            OmegaKind::Explicit(bits) => Some(bits.len().saturating_sub(self.cursor)),
            _ => None,
        }
    }
}

fn check_bits(bits: &[u8]) -> Result<()> {
    match bits.iter().find(|&&b| b > 1) {
        Some(b) => Err(Error::Config(format!("omega bit {b} is not 0 or 1"))),
        None => Ok(()),
    }
}

fn parse_bits(s: &str) -> Result<Vec<u8>> {
    s.chars()
        .map(|c| match c {
            '0' => Ok(0),
            '1' => Ok(1),
            _ => Err(Error::Parse(format!("invalid omega bit {c:?}"))),
        })
        .collect()
}

impl FromStr for OmegaWord {
    type Err = Error;

    /// `0110` (explicit), `01...` (periodic, the whole literal repeats) or
    /// `bernoulli:<p0>:<seed>`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(rest) = s.strip_prefix("bernoulli:") {
            let (p, seed) = rest
                .split_once(':')
                .ok_or_else(|| Error::Parse(format!("expected bernoulli:p:seed, got {s:?}")))?;
            let p0 = p
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("invalid probability {p:?}")))?;
            let seed = seed
                .parse::<u64>()
                .map_err(|_| Error::Parse(format!("invalid seed {seed:?}")))?;
            return OmegaWord::bernoulli(p0, seed);
        }
        match s.strip_suffix("...") {
            Some(period) => OmegaWord::periodic(parse_bits(period)?),
            None => OmegaWord::explicit(parse_bits(s)?),
        }
    }
}

impl fmt::Display for OmegaWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let bits = |b: &[u8]| b.iter().map(|x| char::from(b'0' + x)).collect::<String>();
        match &self.kind {
            OmegaKind::Explicit(b) => f.write_str(&bits(b)),
            OmegaKind::Periodic(b) => write!(f, "{}...", bits(b)),
            OmegaKind::Bernoulli { p0, seed } => write!(f, "bernoulli:{p0}:{seed}"),
        }
    }
}
