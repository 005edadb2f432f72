//! Random continued fraction expansions of points in `[-1, 1]`, the transfer
//! operator of the associated random dynamical system, and ergodic
//! experiments on it.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod convergent;
pub mod digit;
pub mod ergodic;
pub mod error;
pub mod expansion;
pub mod grid;
pub mod omega;
pub mod operator;
pub mod point;
pub mod real;
pub mod sample;
pub mod verify;

pub use convergent::ConvergentState;
pub use digit::{Digit, SignedDigit};
pub use error::{Error, Result};
pub use expansion::{expand, reconstruct, step_k, ExpansionTrace};
pub use grid::GridFunction;
pub use omega::{OmegaKind, OmegaWord};
pub use point::{Domain, ExactPoint};
pub use real::Real;
