//! Scalar abstraction shared by every real-valued computation in the crate.
//!
//! The Monte Carlo drivers use `f64`; the analytic routines (correlators,
//! entropies, key rates) work for any [`Scalar`], which lets tests evaluate
//! them in `f32` as a cheap precision cross-check.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating-point scalar: `f32` or `f64`.
pub trait Scalar: Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Send + Sync + 'static {
    /// Lossy conversion from an `f64` literal.
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal representable")
    }

    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable")
    }
}

impl<T> Scalar for T where T: Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Send + Sync + 'static {}

/// Binary Shannon entropy in bits, with `h(0) = h(1) = 0`.
pub fn binary_entropy<T: Scalar>(p: T) -> T {
    if p <= T::zero() || p >= T::one() {
        return T::zero();
    }
    let q = T::one() - p;
    -(p * p.log2() + q * q.log2())
}
