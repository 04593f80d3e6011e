//! Floating point abstraction shared by every numerical module.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real scalar the closed forms are evaluated in.
///
/// Tolerances depend on the precision of the type, so they live here rather
/// than as crate-wide constants.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Debug
    + Display
    + LowerExp
    + Default
    + Send
    + Sync
    + 'static
{
    /// Max |Q_ij - Q_ji| accepted as symmetric.
    fn tol_sym() -> Self;
    /// Eigenvalues below this magnitude are treated as zero.
    fn tol_eig() -> Self;
    /// Relative off-diagonal Frobenius norm at which Jacobi sweeps stop.
    fn jacobi_tol() -> Self;

    /// Converts an `f64` literal. Every literal in the crate is representable.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("literal representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f64 {
    fn tol_sym() -> Self {
        1e-12
    }
    fn tol_eig() -> Self {
        1e-10
    }
    fn jacobi_tol() -> Self {
        1e-14
    }
}

impl Scalar for f32 {
    fn tol_sym() -> Self {
        1e-5
    }
    fn tol_eig() -> Self {
        1e-6
    }
    fn jacobi_tol() -> Self {
        1e-6
    }
}
