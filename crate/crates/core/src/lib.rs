//! Kloosterman sums, bilinear forms with Kloosterman fractions, and
//! numerical checks of the bounds they satisfy.

pub mod bilinear;
pub mod counting;
pub mod dft;
pub mod divisor;
pub mod error;
pub mod expsums;
pub mod interval;
pub mod modarith;
pub mod harness;
pub mod moments;

pub use error::{Error, Result};
pub use expsums::{Method, SumValue};
pub use interval::Interval;
pub use modarith::{factorize, FactoredModulus};
