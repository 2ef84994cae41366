//! Certified verification that no repdigit with two or more digits is a
//! product of consecutive shifted Tribonacci numbers `T_n + 1`, `T_n - 1`, or a
//! mixed block of both.
//!
//! The pipeline per equation: 2-adic caps on block lengths, a Matveev bound on
//! `n`, two rounds of continued-fraction reduction, and an exhaustive search
//! over the reduced range. Every stage feeds a JSON [`certificate`].

pub mod baker;
pub mod certificate;
pub mod equation;
pub mod error;
pub mod pipeline;
pub mod real;
pub mod reduction;
pub mod search;
pub mod seq;
pub mod serde_big;
pub mod two_adic;

pub use equation::{BlockOrder, Equation, Shift, ShiftPattern};
pub use error::{Error, Result};
