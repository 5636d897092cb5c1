//! Scalar abstraction: all numerics are generic over `f32`/`f64`.

use nalgebra::{DMatrix, DVector, RealField};
use num_complex::Complex;
use num_traits::{FromPrimitive, ToPrimitive};

/// Real scalar type for the whole crate.
///
/// Tolerances in this crate are specified for `f64`; [`Real::tol`] rescales
/// them by the machine-epsilon ratio so that `f32` instantiations validate
/// against correspondingly looser thresholds. The two `*_eigen_backend`
/// methods dispatch dense eigendecompositions to the `faer` solvers of the
/// matching precision.
pub trait Real:
    RealField + FromPrimitive + ToPrimitive + Copy + Default + Send + Sync + 'static
{
    /// Machine epsilon of the concrete type.
    fn eps() -> Self;

    /// An `f64`-calibrated tolerance rescaled to this type's precision.
    fn tol(base_f64: f64) -> Self {
        Self::from_f64(base_f64).unwrap() * Self::eps()
            / Self::from_f64(f64::EPSILON).unwrap()
    }

    /// Eigendecomposition of a dense Hermitian matrix (unsorted).
    fn hermitian_eigen_backend(m: &DMatrix<Complex<Self>>) -> (DVector<Self>, DMatrix<Complex<Self>>);

    /// Eigendecomposition of a dense real symmetric matrix (unsorted).
    fn real_symmetric_eigen_backend(m: &DMatrix<Self>) -> (DVector<Self>, DMatrix<Self>);
}

macro_rules! faer_backed_real {
    ($t:ty, $eps:expr) => {
        impl Real for $t {
            fn eps() -> Self {
                $eps
            }

            fn hermitian_eigen_backend(
                m: &DMatrix<Complex<Self>>,
            ) -> (DVector<Self>, DMatrix<Complex<Self>>) {
                let n = m.nrows();
                let fm = faer::Mat::<Complex<Self>>::from_fn(n, n, |i, j| m[(i, j)]);
                let evd = fm
                    .self_adjoint_eigen(faer::Side::Lower)
                    .expect("hermitian eigendecomposition failed to converge");
                let s = evd.S();
                let u = evd.U();
                let vals = DVector::from_fn(n, |i, _| s[i].re);
                let vecs = DMatrix::from_fn(n, n, |i, j| u[(i, j)]);
                (vals, vecs)
            }

            fn real_symmetric_eigen_backend(m: &DMatrix<Self>) -> (DVector<Self>, DMatrix<Self>) {
                let n = m.nrows();
                let fm = faer::Mat::<Self>::from_fn(n, n, |i, j| m[(i, j)]);
                let evd = fm
                    .self_adjoint_eigen(faer::Side::Lower)
                    .expect("symmetric eigendecomposition failed to converge");
                let s = evd.S();
                let u = evd.U();
                let vals = DVector::from_fn(n, |i, _| s[i]);
                let vecs = DMatrix::from_fn(n, n, |i, j| u[(i, j)]);
                (vals, vecs)
            }
        }
    };
}

faer_backed_real!(f32, f32::EPSILON);
faer_backed_real!(f64, f64::EPSILON);

/// Complex number over the crate scalar.
pub type C<T> = Complex<T>;
/// Dense complex matrix.
pub type CMat<T> = DMatrix<Complex<T>>;
/// Dense complex vector.
pub type CVec<T> = DVector<Complex<T>>;

/// Shorthand conversion from an `f64` literal.
#[inline]
pub fn r<T: Real>(x: f64) -> T {
    T::from_f64(x).unwrap()
}

/// Complex number from `f64` parts.
#[inline]
pub fn c<T: Real>(re: f64, im: f64) -> C<T> {
    Complex::new(r(re), r(im))
}

/// `exp(i angle)` for a real angle.
#[inline]
pub fn cis<T: Real>(angle: T) -> C<T> {
    Complex::new(angle.cos(), angle.sin())
}
