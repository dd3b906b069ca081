//! Scalar abstraction: the grid carrier type is generic over f32/f64.

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};
use rustfft::FftNum;

/// Floating-point scalar the field engine is generic over.
///
/// Geometry (direction angles, cone membership) is always resolved in f64 or
/// exact dyadic arithmetic; this trait only governs the sample carrier, so a
/// f32 build classifies frequencies identically to a f64 build.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + ToPrimitive + NumAssign + FftNum + Send + Sync + 'static
{
    /// Shorthand for embedding an f64 literal.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
