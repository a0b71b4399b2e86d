use std::fmt::Debug;

use num_traits::{FromPrimitive, Num, ToPrimitive};

/// Numeric type usable for risk values: `f32`, `f64` or [`crate::Exact`].
pub trait Scalar:
    Num + Copy + PartialOrd + Debug + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
    /// Conversion from an input probability/impact. Rationals approximate.
    fn from_real(value: f64) -> Self {
        Self::from_f64(value).expect("finite real converts to scalar")
    }

    fn from_count(value: u64) -> Self {
        Self::from_u64(value).expect("count converts to scalar")
    }

    fn to_real(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn max_of(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }
}

impl<T> Scalar for T where
    T: Num + Copy + PartialOrd + Debug + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
}
