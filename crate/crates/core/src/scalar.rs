//! Scalar abstraction shared by the geometry, assembly and solver kernels.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::str::FromStr;

use num_traits::{Float, FromPrimitive, NumAssign};

/// Floating point scalar the numerical kernels are generic over (`f32` or `f64`).
pub trait Real:
    Float + FromPrimitive + NumAssign + Sum + Debug + Display + FromStr + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal into the scalar type.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}
