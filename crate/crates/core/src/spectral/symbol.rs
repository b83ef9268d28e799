use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::fft;
use crate::spectral::field::ComplexField;

/// A Fourier multiplier: an evaluation rule away from the origin plus an
/// explicit value at `xi = 0`. Symbols with a singularity at the origin must
/// declare their zero-mode convention explicitly rather than relying on the
/// rule limiting to something sensible.
pub struct Symbol {
    rule: Box<dyn Fn(f64) -> Complex64 + Send + Sync>,
    at_zero: Complex64,
}

impl Symbol {
    pub fn new(
        rule: impl Fn(f64) -> Complex64 + Send + Sync + 'static,
        at_zero: Complex64,
    ) -> Self {
        Symbol { rule: Box::new(rule), at_zero }
    }

    /// Real-valued symbol helper.
    pub fn real(rule: impl Fn(f64) -> f64 + Send + Sync + 'static, at_zero: f64) -> Self {
        Symbol::new(move |xi| Complex64::new(rule(xi), 0.0), Complex64::new(at_zero, 0.0))
    }

    pub fn eval(&self, xi: f64) -> Complex64 {
        if xi == 0.0 {
            self.at_zero
        } else {
            (self.rule)(xi)
        }
    }
}

/// Apply a [`Symbol`] to a field, checking that it is finite on the lattice.
pub fn apply_symbol(u: &ComplexField, m: &Symbol) -> Result<ComplexField> {
    for &xi in u.grid().freqs() {
        let v = m.eval(xi);
        if !v.re.is_finite() || !v.im.is_finite() {
            return Err(Error::Operator(format!(
                "symbol is not finite at lattice point xi = {xi}"
            )));
        }
    }
    Ok(fft::apply_multiplier(u, |xi| m.eval(xi)))
}
