//! Scalar types usable as literal weights and probabilities.
//!
//! Counting queries are written once against [`Weight`] and instantiated with
//! `f64`, `f32` or exact [`BigRational`] weights.

use std::fmt::Debug;

use num_rational::BigRational;
use num_traits::{One, Zero};

/// A commutative semiring element with a total-enough order for max queries.
pub trait Weight: Clone + Debug + PartialOrd + Zero + One {
    /// Finite and nonnegative.
    fn is_admissible(&self) -> bool;

    /// The larger of two weights; ties keep `self`.
    fn max_of(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }
}

impl Weight for f64 {
    fn is_admissible(&self) -> bool {
        self.is_finite() && *self >= 0.0
    }
}

impl Weight for f32 {
    fn is_admissible(&self) -> bool {
        self.is_finite() && *self >= 0.0
    }
}

impl Weight for BigRational {
    fn is_admissible(&self) -> bool {
        *self >= BigRational::zero()
    }
}

/// Floating-point scalars for probabilistic circuits.
pub trait Probability: Weight + num_traits::Float + num_traits::FromPrimitive {}

impl Probability for f64 {}
impl Probability for f32 {}

impl Weight for num_bigint::BigUint {
    fn is_admissible(&self) -> bool {
        true
    }
}
