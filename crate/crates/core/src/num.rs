//! Scalar types usable as action costs and heuristic values.

use std::cmp::Ordering;
use std::fmt::{Debug, Display};

use num_traits::{Bounded, NumCast};

/// A cost scalar for search: action costs, g-values and heuristic estimates.
///
/// Integer instantiations use `max_value()` as the infinity sentinel and
/// saturate on addition; float instantiations use IEEE infinity.
pub trait CostScalar:
    Copy
    + Debug
    + Display
    + PartialOrd
    + num_traits::Num
    + NumCast
    + Bounded
    + Send
    + Sync
    + 'static
{
    fn infinity() -> Self;

    fn is_infinite_cost(self) -> bool;

    /// Addition that maps overflow (and anything plus infinity) to infinity.
    fn add_cost(self, other: Self) -> Self;

    /// A total order; NaN never appears in well-formed costs but sorts last.
    fn cmp_cost(&self, other: &Self) -> Ordering;

    /// Converts a non-negative, finite penalty or cost without losing
    /// precision. Returns `None` when `value` cannot be represented exactly.
    fn from_exact(value: f64) -> Option<Self> {
        if !value.is_finite() || value < 0.0 {
            return None;
        }
        let converted: Self = NumCast::from(value)?;
        let back = converted.to_f64()?;
        (back == value).then_some(converted)
    }

    fn to_f64_lossy(self) -> f64 {
        if self.is_infinite_cost() {
            f64::INFINITY
        } else {
            self.to_f64().unwrap_or(f64::INFINITY)
        }
    }
}

macro_rules! impl_int_cost {
    ($($t:ty),*) => {$(
        impl CostScalar for $t {
            fn infinity() -> Self {
                <$t>::MAX
            }

            fn is_infinite_cost(self) -> bool {
                self == <$t>::MAX
            }

            fn add_cost(self, other: Self) -> Self {
                self.saturating_add(other)
            }

            fn cmp_cost(&self, other: &Self) -> Ordering {
                self.cmp(other)
            }
        }
    )*};
}

macro_rules! impl_float_cost {
    ($($t:ty),*) => {$(
        impl CostScalar for $t {
            fn infinity() -> Self {
                <$t>::INFINITY
            }

            fn is_infinite_cost(self) -> bool {
                self.is_infinite()
            }

            fn add_cost(self, other: Self) -> Self {
                self + other
            }

            fn cmp_cost(&self, other: &Self) -> Ordering {
                self.total_cmp(other)
            }
        }
    )*};
}

impl_int_cost!(u32, u64);
impl_float_cost!(f32, f64);
