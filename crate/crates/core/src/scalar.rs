//! Floating-point scalar abstraction for the numerical core.
//!
//! Everything downstream is generic over [`Scalar`] so the same code runs at
//! f32 and f64. The associated tolerance constants scale with the precision of
//! the type; the documented contract values are the f64 ones.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// Real scalar type usable throughout the crate.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum<Self>
    + Debug
    + Display
    + LowerExp
    + Send
    + Sync
    + 'static
{
    /// Max tolerated Hermiticity / symmetry deviation (1e-12 at f64).
    const SYM_TOL: Self;
    /// Positive-semidefiniteness floor: eigenvalues above `-PSD_TOL` count as
    /// non-negative (1e-10 at f64).
    const PSD_TOL: Self;
    /// Magnitude below which a negative probability or Klyshko value is
    /// treated as rounding noise (1e-14 at f64).
    const NOISE_TOL: Self;
    /// Max tolerated truncation leakage of a state fed to the dynamics
    /// (1e-6 at f64).
    const LEAK_TOL: Self;
    /// Smallest meaningful probability mass (1e-15 at f64).
    const TINY: Self;

    /// Conversion from an f64 literal; panics only on values outside the
    /// type's range, which never happens for the constants used here.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("literal not representable")
    }
}

impl Scalar for f64 {
    const SYM_TOL: f64 = 1e-12;
    const PSD_TOL: f64 = 1e-10;
    const NOISE_TOL: f64 = 1e-14;
    const LEAK_TOL: f64 = 1e-6;
    const TINY: f64 = 1e-15;
}

impl Scalar for f32 {
    const SYM_TOL: f32 = 1e-5;
    const PSD_TOL: f32 = 1e-4;
    const NOISE_TOL: f32 = 1e-6;
    const LEAK_TOL: f32 = 1e-3;
    const TINY: f32 = 1e-7;
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn literal_conversion_round_trips() {
        assert_eq!(f64::of(0.25), 0.25);
        assert_eq!(f32::of(0.25), 0.25f32);
    }

    #[test]
    fn tolerances_scale_with_precision() {
        assert!(f64::SYM_TOL < f32::SYM_TOL as f64);
        assert!(f64::NOISE_TOL < f64::SYM_TOL);
        assert!(f64::TINY < f64::NOISE_TOL);
    }
}
