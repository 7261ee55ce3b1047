//! Scalar abstraction shared by every module.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point type the geometry is computed in: `f32` or `f64`.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + Sum + 'static
{
    /// Converts an `f64` literal. Panics only for values the type cannot represent at all.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    /// A few ulps of relative slack, used where exact predicates meet rounding.
    #[inline]
    fn rel_eps() -> Self {
        Self::epsilon() * Self::lit(64.0)
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Absolute tolerance `abs` widened to the type's precision at magnitude `scale`.
    #[inline]
    fn tol_at(abs: f64, scale: Self) -> Self {
        Self::lit(abs).max(Self::rel_eps() * (Self::one() + scale.abs()))
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Total order on scalars for sorting and heaps; NaN sorts last.
#[inline]
pub(crate) fn cmp_scalar<T: Scalar>(a: T, b: T) -> std::cmp::Ordering {
    a.partial_cmp(&b).unwrap_or_else(|| a.is_nan().cmp(&b.is_nan()))
}
