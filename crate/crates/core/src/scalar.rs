//! Real scalar abstraction shared by the floating-point layers.
//!
//! Everything that touches `e(z)`, characters, exponential sums or the
//! analytic predictor is written against [`Real`], so the same code runs in
//! `f32` (cheap previews) and `f64` (every tolerance in the test-suite is
//! stated for `f64`). Exact quantities (counts, lower bounds for xi) stay in
//! integers and rationals and never go through this trait.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// floating point: f32 or f64
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    /// Lossy conversion from an integer count.
    #[inline]
    fn count(n: u64) -> Self {
        Self::from_u64(n).expect("count representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// `ln(1 + w)` for complex `w`, accurate when `|w|` is small.
///
/// `num_complex` has no `ln_1p`; computing `(1 + w).ln()` directly loses all
/// relative precision once `|w| < eps`, which matters for Euler factors of
/// large primes.
pub fn complex_ln_1p<T: Real>(w: Complex<T>) -> Complex<T> {
    let two = T::lit(2.0);
    let half = T::lit(0.5);
    // |1 + w|^2 - 1 = 2 Re w + |w|^2
    let modulus_excess = two * w.re + w.norm_sqr();
    let re = half * modulus_excess.ln_1p();
    let im = w.im.atan2(T::one() + w.re);
    Complex::new(re, im)
}

/// Principal-branch `base^exponent` for a real positive base.
///
/// All complex powers in scope (`(1 - q^{-s})^{e(t/p)}`, `log^{z-1} N`) have
/// real positive bases; this is checked in debug builds.
pub fn real_pow_complex<T: Real>(log_base: T, exponent: Complex<T>) -> Complex<T> {
    debug_assert!(log_base.is_finite());
    (exponent * log_base).exp()
}
