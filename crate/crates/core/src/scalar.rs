//! Floating point abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Real scalar type the library is generic over: `f32` or `f64`.
///
/// Besides the arithmetic bounds, each implementor fixes the numerical
/// tolerances used when validating states and when discarding the imaginary
/// residue of quantities that are real by construction.
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
    /// Hermiticity, trace and normalization tolerance.
    const STRUCTURE_TOL: f64;
    /// Smallest eigenvalue still accepted as positive semidefinite (negated).
    const PSD_TOL: f64;
    /// Largest imaginary residue tolerated on a real-valued sum.
    const IMAG_TOL: f64;

    /// Converts an `f64` literal. Every finite `f64` is representable (possibly rounded).
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite f64 literal")
    }

    #[inline]
    fn from_usize_lossy(x: usize) -> Self {
        Self::from_usize(x).expect("usize converts to float")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn structure_tol() -> Self {
        Self::lit(Self::STRUCTURE_TOL)
    }

    fn psd_tol() -> Self {
        Self::lit(Self::PSD_TOL)
    }

    fn imag_tol() -> Self {
        Self::lit(Self::IMAG_TOL)
    }
}

impl Real for f64 {
    const STRUCTURE_TOL: f64 = 1e-12;
    const PSD_TOL: f64 = 1e-10;
    const IMAG_TOL: f64 = 1e-10;
}

impl Real for f32 {
    const STRUCTURE_TOL: f64 = 1e-5;
    const PSD_TOL: f64 = 1e-5;
    const IMAG_TOL: f64 = 1e-4;
}

/// Complex scalar over a [`Real`].
pub type Cx<T> = Complex<T>;

/// `e^{iθ}`.
#[inline]
pub fn cis<T: Real>(theta: T) -> Cx<T> {
    let (s, c) = theta.sin_cos();
    Complex::new(c, s)
}

#[inline]
pub(crate) fn cx<T: Real>(re: T, im: T) -> Cx<T> {
    Complex::new(re, im)
}

#[inline]
pub(crate) fn czero<T: Real>() -> Cx<T> {
    Complex::new(T::zero(), T::zero())
}
