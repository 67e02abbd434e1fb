//! Bilinear forms with Kloosterman sums and Kloosterman fractions, and the
//! right-hand sides of the bounds they satisfy.

mod bounds;
mod sums;
mod weights;

pub use crate::interval::Interval;
pub use bounds::{
    bound_rhs, check_preconditions, delta1, delta2, structured_rhs, BoundParams, BoundSpec,
    Theorem, Variant, PRE_K_AT_MOST_R, PRE_K_LONG, PRE_M_SMALL, PRE_N_SHORT, PRE_POSITIVE,
    PRE_PRIME, PRE_R_DIVIDES_Q,
};
pub use sums::{ssharp_sum, type1_sum, type2_sum, w_sum, wsharp_sum, Bilinear, Path};
pub use weights::{Support, WeightScheme, WeightVector};
