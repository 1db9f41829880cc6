//! Scalar abstraction shared by every numeric module.
//!
//! All state, gate and rate-model code is written against [`Real`], so the
//! same code runs in `f64` (the default used by the runner and tests) and in
//! `f32` (handy for quick sweeps). Tolerances quoted for double precision are
//! widened automatically through [`Real::tol`].

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Default
    + Debug
    + Display
    + LowerExp
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal")
    }

    /// A double-precision tolerance, floored at a small multiple of this
    /// type's machine epsilon.
    #[inline]
    fn tol(x: f64) -> Self {
        Self::lit(x).max(Self::epsilon() * Self::lit(64.0))
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

pub type C<T> = Complex<T>;

#[inline]
pub(crate) fn cplx<T: Real>(re: T, im: T) -> C<T> {
    Complex::new(re, im)
}

/// `exp(-i * phase)`.
#[inline]
pub(crate) fn phase_factor<T: Real>(phase: T) -> C<T> {
    Complex::new(phase.cos(), -phase.sin())
}
