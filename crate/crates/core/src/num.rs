//! Scalar abstraction for the numeric core.
//!
//! Everything in this crate is generic over a floating-point scalar so the
//! same code instantiates at `f32` and `f64`. The concrete aliases exposed at
//! the crate root use `f64`, which is what the stated tolerances assume.

use std::fmt::Debug;

use num_traits::Float;

/// Floating-point scalar used throughout the crate.
///
/// A blanket impl covers `f32` and `f64`; custom floats satisfying the same
/// bounds work too.
pub trait Scalar: Float + Debug + Send + Sync + 'static {}

impl<T> Scalar for T where T: Float + Debug + Send + Sync + 'static {}

/// Converts an `f64` literal into the working scalar type.
///
/// Panics if the value is not representable, which cannot happen for the
/// finite constants this crate feeds it.
#[inline]
pub fn lit<F: Scalar>(x: f64) -> F {
    F::from(x).expect("finite f64 literal must convert to scalar")
}

/// Converts the working scalar back to `f64` for reporting and I/O.
#[inline]
pub fn to_f64<F: Scalar>(x: F) -> f64 {
    x.to_f64().expect("scalar must convert to f64")
}

/// A nonnegative quantity extended with a point at infinity.
///
/// This is the value domain of the starred generator transforms at zero:
/// the right limit of `f(t)/t` either exists as a finite number or diverges.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExtendedNonneg<F> {
    Finite(F),
    Infinite,
}

impl<F: Scalar> ExtendedNonneg<F> {
    /// Finite value, or `None` when infinite.
    pub fn finite(self) -> Option<F> {
        match self {
            ExtendedNonneg::Finite(x) => Some(x),
            ExtendedNonneg::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, ExtendedNonneg::Infinite)
    }

    /// True when `self <= rhs` in the extended order.
    pub fn le(self, rhs: Self) -> bool {
        match (self, rhs) {
            (ExtendedNonneg::Finite(a), ExtendedNonneg::Finite(b)) => a <= b,
            (ExtendedNonneg::Finite(_), ExtendedNonneg::Infinite) => true,
            (ExtendedNonneg::Infinite, ExtendedNonneg::Infinite) => true,
            (ExtendedNonneg::Infinite, ExtendedNonneg::Finite(_)) => false,
        }
    }

    /// Product with a finite nonnegative scalar, with `0 * inf = 0`.
    pub fn mul_finite(self, k: F) -> Self {
        match self {
            ExtendedNonneg::Finite(x) => ExtendedNonneg::Finite(x * k),
            ExtendedNonneg::Infinite => {
                if k == F::zero() {
                    ExtendedNonneg::Finite(F::zero())
                } else {
                    ExtendedNonneg::Infinite
                }
            }
        }
    }
}
