use rustfft::num_complex::Complex64;

use crate::spectral::fft;
use crate::spectral::field::ComplexField;

/// Free Schroedinger flow: solves `d_t u + i d_x^2 u = 0` exactly on the
/// lattice via the unimodular multiplier `exp(i xi^2 t)`.
pub fn free_evolve(u: &ComplexField, t: f64) -> ComplexField {
    fft::apply_multiplier(u, |xi| Complex64::new(0.0, xi * xi * t).exp())
}
