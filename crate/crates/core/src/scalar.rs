use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign};

/// Scalar type the solvers are generic over.
///
/// Implemented for every `Float` that also converts from primitives, which in
/// practice means `f32` and `f64`.
pub trait Real:
    Float + FromPrimitive + NumAssign + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal. Panics only if the target type cannot
    /// represent finite `f64` values at all, which never happens for floats.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("float literal")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize fits in float")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl<T> Real for T where
    T: Float + FromPrimitive + NumAssign + Sum + Debug + Display + Default + Send + Sync + 'static
{
}

/// `Σ ξⱼ wⱼ` with the convention `0·∞ = 0`.
///
/// Successors that carry zero probability never contribute, even when their
/// value is infinite.
pub fn weighted_sum<T: Real>(xi: &[T], w: &[T]) -> T {
    xi.iter()
        .zip(w)
        .filter(|(p, _)| **p != T::zero())
        .map(|(&p, &v)| p * v)
        .sum()
}

/// Sup-norm distance between two value vectors. Matching infinities count as
/// zero difference; an infinite entry against a finite one is infinite.
pub fn sup_distance<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| abs_diff(x, y))
        .fold(T::zero(), T::max)
}

/// `|x − y|` with `∞ − ∞ = 0`.
#[inline]
pub fn abs_diff<T: Real>(x: T, y: T) -> T {
    if x.is_infinite() && y.is_infinite() && x.signum() == y.signum() {
        T::zero()
    } else {
        (x - y).abs()
    }
}
