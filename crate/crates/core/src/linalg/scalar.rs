use num_complex::Complex64;
use num_traits::{NumAssign, Zero};
use std::fmt::Debug;
use std::ops::Neg;

/// Field element used by the sparse, banded and dense kernels: `f64` or
/// `Complex64`.
pub trait Scalar: Copy + Debug + PartialEq + Send + Sync + NumAssign + Neg<Output = Self> + Zero + 'static {
    fn from_real(x: f64) -> Self;
    fn modulus(self) -> f64;
    fn conj(self) -> Self;
    fn real(self) -> f64;
    fn imag(self) -> f64;
}

impl Scalar for f64 {
    #[inline]
    fn from_real(x: f64) -> Self {
        x
    }
    #[inline]
    fn modulus(self) -> f64 {
        self.abs()
    }
    #[inline]
    fn conj(self) -> Self {
        self
    }
    #[inline]
    fn real(self) -> f64 {
        self
    }
    #[inline]
    fn imag(self) -> f64 {
        0.0
    }
}

impl Scalar for Complex64 {
    #[inline]
    fn from_real(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    #[inline]
    fn modulus(self) -> f64 {
        self.norm()
    }
    #[inline]
    fn conj(self) -> Self {
        Complex64::conj(&self)
    }
    #[inline]
    fn real(self) -> f64 {
        self.re
    }
    #[inline]
    fn imag(self) -> f64 {
        self.im
    }
}

/// Euclidean norm of a real or complex vector.
pub fn norm2<T: Scalar>(x: &[T]) -> f64 {
    // scaled accumulation keeps huge/tiny entries from overflowing
    let scale = x.iter().fold(0.0_f64, |m, v| m.max(v.modulus()));
    if scale == 0.0 || !scale.is_finite() {
        return scale;
    }
    let s: f64 = x
        .iter()
        .map(|v| {
            let t = v.modulus() / scale;
            t * t
        })
        .sum();
    scale * s.sqrt()
}
