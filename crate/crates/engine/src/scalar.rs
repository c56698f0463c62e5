//! Scalar abstraction for the numeric core.
//!
//! Everything in this crate that does arithmetic is generic over [`Real`],
//! so the same solvers run at `f32` or `f64` precision. Concrete aliases
//! for the common `f64` instantiations live at the crate root.

use std::fmt;
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Floating-point scalar used throughout the engine: `f32` or `f64`.
pub trait Real:
    Float
    + FloatConst
    + NumAssign
    + FromPrimitive
    + ToPrimitive
    + Sum<Self>
    + fmt::Debug
    + fmt::Display
    + Send
    + Sync
    + 'static
{
    /// Convert a literal constant. Infallible for f32/f64.
    fn c(x: f64) -> Self {
        Self::from_f64(x).expect("constant representable in scalar type")
    }

    /// Lossy conversion to f64 for reporting and serialization.
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().expect("scalar convertible to f64")
    }

    fn from_usize_c(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable in scalar type")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Tolerance for probability-row normalization checks.
///
/// Rows whose sum deviates from 1 by no more than this are renormalized;
/// larger deviations are rejected as modeling errors. The f64 value is the
/// contractual 1e-9; wider types scale with machine epsilon.
pub fn prob_tolerance<T: Real>() -> T {
    let contractual = T::c(1e-9);
    let machine = T::epsilon() * T::c(64.0);
    if machine > contractual {
        machine
    } else {
        contractual
    }
}
