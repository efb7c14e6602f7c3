//! Real scalar abstraction shared by every numeric routine in the crate.
//!
//! All matrices carry `Complex<T>` entries where `T: Real`. The trait is a thin
//! bundle of `num-traits` bounds plus a couple of conversions used when a
//! tolerance or a literal has to be lifted into the working precision.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + NumAssign + Debug + Display + Default + Send + Sync + Sum + 'static
{
    /// Relative tolerance that is meaningful at this precision.
    fn default_tol() -> Self;

    /// Lift an `f64` literal into this precision.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f64 {
    fn default_tol() -> Self {
        1e-9
    }
}

impl Real for f32 {
    fn default_tol() -> Self {
        1e-4
    }
}
