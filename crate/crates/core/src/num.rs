//! Scalar abstraction used throughout the crate.

use std::fmt;
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssignOps};

/// Floating-point scalar the solvers are generic over.
///
/// Implemented for `f32` and `f64` via the blanket impl. The acceptance
/// tolerances in this crate assume f64; f32 instantiations compile and run
/// but resolve far less of the weak-coupling regime.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + NumAssignOps
    + Sum<Self>
    + fmt::Debug
    + fmt::Display
    + fmt::LowerExp
    + Default
    + Send
    + Sync
    + 'static
{
    /// Converts an f64 constant, panicking only for values outside the
    /// scalar's range (never for the literals used in this crate).
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("constant not representable in scalar type")
    }

    /// Euler-Mascheroni constant γ.
    fn euler_gamma() -> Self {
        Self::of(0.577_215_664_901_532_9)
    }
}

impl<T> Real for T where
    T: Float
        + FloatConst
        + FromPrimitive
        + NumAssignOps
        + Sum<T>
        + fmt::Debug
        + fmt::Display
        + fmt::LowerExp
        + Default
        + Send
        + Sync
        + 'static
{
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants_convert_for_both_widths() {
        assert_eq!(f64::of(0.25), 0.25);
        assert_eq!(f32::of(0.25), 0.25f32);
        assert!((f64::euler_gamma() - 0.577_215_664_901_532_9).abs() < 1e-16);
    }
}
