use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::bump::{eta, psi};
use crate::spectral::fft;
use crate::spectral::field::ComplexField;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

/// Sharp sign projector with multiplier `1_{+- xi > 0}`. The inequality is
/// strict: the zero mode is annihilated by both signs, so `P+ + P- = Id`
/// only away from `xi = 0`.
pub fn project_sign(u: &ComplexField, sign: Sign) -> ComplexField {
    fft::apply_multiplier(u, |xi| {
        let keep = match sign {
            Sign::Plus => xi > 0.0,
            Sign::Minus => xi < 0.0,
        };
        if keep {
            Complex64::ONE
        } else {
            Complex64::ZERO
        }
    })
}

/// Littlewood-Paley piece at dyadic scale `N >= 1`: multiplier `eta(xi)` at
/// `N = 1` and `psi_N(xi) = eta(xi/N) - eta(2 xi/N)` for `N >= 2`.
pub fn project_dyadic(u: &ComplexField, n_dyadic: f64) -> Result<ComplexField> {
    if n_dyadic < 1.0 || n_dyadic.log2().fract() != 0.0 {
        return Err(Error::Config(format!(
            "dyadic scale must be a power of two >= 1, got {n_dyadic}"
        )));
    }
    Ok(if n_dyadic == 1.0 {
        fft::apply_multiplier(u, |xi| Complex64::new(eta(xi), 0.0))
    } else {
        fft::apply_multiplier(u, move |xi| Complex64::new(psi(xi, n_dyadic), 0.0))
    })
}

/// High-frequency part: the dyadic sum over `N >= 2`, multiplier `1 - eta(xi)`.
pub fn project_hi(u: &ComplexField) -> ComplexField {
    fft::apply_multiplier(u, |xi| Complex64::new(1.0 - eta(xi), 0.0))
}

/// Complement of [`project_hi`], multiplier `eta(xi)`.
pub fn project_lo(u: &ComplexField) -> ComplexField {
    fft::apply_multiplier(u, |xi| Complex64::new(eta(xi), 0.0))
}

/// The dyadic sum over `N >= 8`, multiplier `1 - eta(xi/4)` (supported on
/// `|xi| >= 4`, identically one for `|xi| >= 8`).
pub fn project_far_hi(u: &ComplexField) -> ComplexField {
    fft::apply_multiplier(u, |xi| Complex64::new(1.0 - eta(xi / 4.0), 0.0))
}

/// Complement of [`project_far_hi`], multiplier `eta(xi/4)`.
pub fn project_far_lo(u: &ComplexField) -> ComplexField {
    fft::apply_multiplier(u, |xi| Complex64::new(eta(xi / 4.0), 0.0))
}

/// `P_{+-, hi}` composition used by the gauge variables.
pub fn project_sign_hi(u: &ComplexField, sign: Sign) -> ComplexField {
    project_sign(&project_hi(u), sign)
}

/// `P_{+-, HI}` composition used by the recovery formula.
pub fn project_sign_far_hi(u: &ComplexField, sign: Sign) -> ComplexField {
    project_sign(&project_far_hi(u), sign)
}
