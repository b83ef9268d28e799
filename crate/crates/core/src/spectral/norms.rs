use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::fft;
use crate::spectral::field::ComplexField;

/// `<f, g> = integral of conj(f) g dx`, conjugate-linear in the first slot.
pub fn inner(f: &ComplexField, g: &ComplexField) -> Complex64 {
    assert_eq!(f.grid(), g.grid());
    let dx = f.grid().dx();
    f.values()
        .iter()
        .zip(g.values())
        .map(|(a, b)| a.conj() * b)
        .sum::<Complex64>()
        * dx
}

/// `integral of |u|^2 dx` by quadrature.
pub fn mass(u: &ComplexField) -> f64 {
    let dx = u.grid().dx();
    u.values().iter().map(|z| z.norm_sqr()).sum::<f64>() * dx
}

/// Quadrature `L^p` norm, `p` one of 2, 3, 4 or infinity.
pub fn lebesgue_norm(u: &ComplexField, p: f64) -> Result<f64> {
    let dx = u.grid().dx();
    if p == f64::INFINITY {
        return Ok(u.max_abs());
    }
    if p == 2.0 || p == 3.0 || p == 4.0 {
        let sum: f64 = u.values().iter().map(|z| z.norm().powf(p)).sum();
        Ok((sum * dx).powf(1.0 / p))
    } else {
        Err(Error::Config(format!("unsupported Lebesgue exponent p = {p}")))
    }
}

/// `H^s` norm via Plancherel weights `<xi>^s = (1 + xi^2)^{s/2}`. The
/// regularity exponent is capped to `[-2, 4]`: beyond that the weights
/// amplify truncation noise past any useful tolerance.
pub fn sobolev_norm(u: &ComplexField, s: f64) -> Result<f64> {
    if !(-2.0..=4.0).contains(&s) {
        return Err(Error::Config(format!("Sobolev exponent s = {s} outside [-2, 4]")));
    }
    let c = fft::forward(u);
    let w = u.grid().spectral_weight();
    let sum: f64 = c
        .iter()
        .zip(u.grid().freqs())
        .map(|(z, &xi)| (1.0 + xi * xi).powf(s) * z.norm_sqr())
        .sum();
    Ok((w * sum).sqrt())
}

/// `W^{s,4}` norm: the `L^4` norm of the Bessel potential `J^s u`.
pub fn ws4_norm(u: &ComplexField, s: f64) -> Result<f64> {
    if !(-2.0..=4.0).contains(&s) {
        return Err(Error::Config(format!("Sobolev exponent s = {s} outside [-2, 4]")));
    }
    let ju = fft::apply_multiplier(u, |xi| Complex64::new((1.0 + xi * xi).powf(s / 2.0), 0.0));
    lebesgue_norm(&ju, 4.0)
}

/// Relative boundary mass: the share of `||u||^2` sitting in the outermost
/// 2% of samples on each side. Gauge diagnostics warn when this is not tiny.
pub fn boundary_mass_fraction(u: &ComplexField) -> f64 {
    let n = u.grid().n();
    let edge = (n / 50).max(1);
    let v = u.values();
    let total: f64 = v.iter().map(|z| z.norm_sqr()).sum();
    if total == 0.0 {
        return 0.0;
    }
    let near: f64 = v[..edge].iter().chain(&v[n - edge..]).map(|z| z.norm_sqr()).sum();
    near / total
}
