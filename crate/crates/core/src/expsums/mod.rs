//! Complete exponential sums modulo arbitrary `q`.
//!
//! Every sum has a brute-force evaluator that follows the definition
//! directly. Kloosterman sums and the transform `T(x, y, z; q)` additionally
//! have fast evaluators that split `q` into prime powers and use closed forms
//! where they exist.

mod bounds;
mod gauss;
mod kloosterman;
mod transform;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use bounds::{lemma_a2_rhs, lemma_t_rhs, weil_bound_rhs};
pub use gauss::{gauss, gauss_star, gauss_star_mobius, salie};
pub use kloosterman::{
    kloosterman_brute, kloosterman_closed_form, kloosterman_fast, ramanujan, BruteKloosterman,
    Kloosterman,
};
pub use transform::{t_transform_brute, t_transform_fast, TTransform};

/// How a [`SumValue`] was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    /// Direct summation over the definition.
    Brute,
    /// A closed-form evaluation (Ramanujan sums, square-root formula, vanishing).
    ClosedForm,
    /// Split into coprime prime-power factors.
    Crt,
    /// A common prime-power factor was pulled out first.
    Reduced,
}

/// A complex sum together with the route used and the number of elementary
/// terms that went into it. Rounding error grows at most linearly in `terms`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SumValue {
    pub value: Complex64,
    pub method: Method,
    pub terms: u64,
}

impl SumValue {
    pub fn new(value: Complex64, method: Method, terms: u64) -> Self {
        Self { value, method, terms }
    }

    pub fn re(&self) -> f64 {
        self.value.re
    }

    pub fn norm(&self) -> f64 {
        self.value.norm()
    }

    /// Error budget `1e-6 * max(1, terms)` used for provably real sums.
    pub fn real_tolerance(&self) -> f64 {
        1e-6 * (self.terms.max(1) as f64)
    }
}
