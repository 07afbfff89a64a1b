//! Unitary discrete Fourier transform backed by `rustfft`.
//!
//! Forward: `y_j = M^{-1/2} Σ_k ω^{jk} x_k` with `ω = e^{-2πi/M}`.
//! Inverse: the conjugate transpose of the forward map.

use crate::error::{Error, Result};
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::fmt;
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DftDirection {
    Forward,
    Inverse,
}

#[derive(Clone)]
pub struct DftPlan {
    length: usize,
    direction: DftDirection,
    scale: f64,
    fft: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for DftPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DftPlan").field("length", &self.length).field("direction", &self.direction).finish()
    }
}

impl DftPlan {
    pub fn new(length: usize, direction: DftDirection) -> Self {
        assert!(length > 0, "DFT length must be positive");
        let mut planner = FftPlanner::new();
        let fft = match direction {
            DftDirection::Forward => planner.plan_fft_forward(length),
            DftDirection::Inverse => planner.plan_fft_inverse(length),
        };
        Self { length, direction, scale: 1.0 / (length as f64).sqrt(), fft }
    }

    pub fn length(&self) -> usize {
        self.length
    }

    pub fn direction(&self) -> DftDirection {
        self.direction
    }

    pub fn scratch_len(&self) -> usize {
        self.fft.get_inplace_scratch_len()
    }

    pub fn apply(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        let mut y = x.to_vec();
        self.apply_in_place(&mut y)?;
        Ok(y)
    }

    pub fn apply_in_place(&self, x: &mut [Complex64]) -> Result<()> {
        let mut scratch = vec![Complex64::new(0.0, 0.0); self.scratch_len()];
        self.apply_with_scratch(x, &mut scratch)
    }

    /// In-place transform reusing a caller-provided scratch buffer of at
    /// least [`DftPlan::scratch_len`] entries.
    pub fn apply_with_scratch(&self, x: &mut [Complex64], scratch: &mut [Complex64]) -> Result<()> {
        if x.len() != self.length {
            return Err(Error::DimensionMismatch { expected: self.length, found: x.len() });
        }
        self.fft.process_with_scratch(x, scratch);
        x.iter_mut().for_each(|v| *v *= self.scale);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn delta_maps_to_constant() {
        let f = DftPlan::new(4, DftDirection::Forward);
        let y = f.apply(&[c(1.0), c(0.0), c(0.0), c(0.0)]).unwrap();
        for v in y {
            assert!((v - c(0.5)).norm() < 1e-15);
        }
    }

    #[test]
    fn constant_maps_to_delta() {
        let f = DftPlan::new(4, DftDirection::Forward);
        let y = f.apply(&[c(1.0); 4]).unwrap();
        assert!((y[0] - c(2.0)).norm() < 1e-15);
        for v in &y[1..] {
            assert!(v.norm() < 1e-15);
        }
    }

    #[test]
    fn sign_convention() {
        // y_1 = (1/√M) Σ ω^k x_k with ω = e^{-2πi/M}; x = e_1 gives ω/√M
        let m = 5;
        let f = DftPlan::new(m, DftDirection::Forward);
        let mut x = vec![c(0.0); m];
        x[1] = c(1.0);
        let y = f.apply(&x).unwrap();
        let w = Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI / m as f64);
        assert!((y[1] - w / (m as f64).sqrt()).norm() < 1e-15);
    }

    #[test]
    fn length_mismatch() {
        let f = DftPlan::new(4, DftDirection::Inverse);
        assert!(f.apply(&[c(1.0)]).is_err());
    }
}
