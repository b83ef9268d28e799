//! Discrete Fourier transform plumbing.
//!
//! Coefficient convention: `forward` returns `c_k = (1/n) sum_j u_j exp(-i xi_k x_j)`
//! in FFT layout, so a plane wave `exp(i xi_k x)` has `c_k = 1` and the
//! quadrature `L^2` norm satisfies `||u||^2 = 2L sum_k |c_k|^2`. Because the
//! grid starts at `x = -L` rather than 0, `c_k` differs from the raw FFT
//! output by a factor `(-1)^k`; the factor cancels in multiplier round trips
//! but matters whenever coefficients are compared against analytic values or
//! fields are synthesized from spectra.

use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::spectral::field::ComplexField;
use crate::spectral::grid::Grid;

thread_local! {
    static PLANS: RefCell<HashMap<(usize, bool), Arc<dyn Fft<f64>>>> =
        RefCell::new(HashMap::new());
}

fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANS.with(|cache| {
        cache
            .borrow_mut()
            .entry((n, inverse))
            .or_insert_with(|| {
                let mut planner = FftPlanner::new();
                if inverse {
                    planner.plan_fft_inverse(n)
                } else {
                    planner.plan_fft_forward(n)
                }
            })
            .clone()
    })
}

fn alternate_signs(buf: &mut [Complex64]) {
    for z in buf.iter_mut().skip(1).step_by(2) {
        *z = -*z;
    }
}

/// Raw unnormalized DFT of a sample buffer (no `x = -L` phase, no `1/n`).
fn raw_fft(buf: &mut [Complex64], inverse: bool) {
    plan(buf.len(), inverse).process(buf);
}

/// Coefficients `c_k` of the trigonometric interpolant of `u`.
pub fn forward(u: &ComplexField) -> Vec<Complex64> {
    let mut buf = u.values().to_vec();
    raw_fft(&mut buf, false);
    let scale = 1.0 / buf.len() as f64;
    for z in buf.iter_mut() {
        *z *= scale;
    }
    alternate_signs(&mut buf);
    buf
}

/// Synthesize samples `u_j = sum_k c_k exp(i xi_k x_j)` on `grid`.
pub fn inverse(grid: &Grid, coeffs: &[Complex64]) -> ComplexField {
    assert_eq!(coeffs.len(), grid.n());
    let mut buf = coeffs.to_vec();
    alternate_signs(&mut buf);
    raw_fft(&mut buf, true);
    ComplexField::from_values(grid, buf).expect("length preserved")
}

/// Apply a Fourier multiplier `m(xi)` to a field. The caller's `m` must be
/// total on the lattice (declare the `xi = 0` value explicitly).
pub fn apply_multiplier(u: &ComplexField, m: impl Fn(f64) -> Complex64) -> ComplexField {
    // The (-1)^k phases cancel between analysis and synthesis, so the raw
    // transform pair is used directly.
    let n = u.grid().n();
    let mut buf = u.values().to_vec();
    raw_fft(&mut buf, false);
    let scale = 1.0 / n as f64;
    for (z, &xi) in buf.iter_mut().zip(u.grid().freqs()) {
        *z *= m(xi) * scale;
    }
    raw_fft(&mut buf, true);
    ComplexField::from_values(u.grid(), buf).expect("length preserved")
}

/// Embed an n-point spectrum into the 2n lattice (zero padding).
pub fn pad_spectrum(c: &[Complex64]) -> Vec<Complex64> {
    let n = c.len();
    let mut out = vec![Complex64::ZERO; 2 * n];
    out[..n / 2].copy_from_slice(&c[..n / 2]);
    // negative modes, including the Nyquist mode k = -n/2
    out[2 * n - n / 2..].copy_from_slice(&c[n / 2..]);
    out
}

/// Restrict a 2n-point spectrum back to the n lattice. The Nyquist mode of
/// the coarse lattice is zeroed: nonlinear products do not get to populate
/// the one frequency with no conjugate partner.
pub fn truncate_spectrum(c2: &[Complex64]) -> Vec<Complex64> {
    let n = c2.len() / 2;
    let mut out = vec![Complex64::ZERO; n];
    out[..n / 2].copy_from_slice(&c2[..n / 2]);
    out[n / 2..].copy_from_slice(&c2[2 * n - n / 2..]);
    out[n / 2] = Complex64::ZERO;
    out
}

/// Samples of the interpolant on the doubled (2n-point) grid.
pub fn fine_samples(c: &[Complex64]) -> Vec<Complex64> {
    let mut buf = pad_spectrum(c);
    alternate_signs(&mut buf);
    raw_fft(&mut buf, true);
    buf
}

/// Coefficients on the coarse lattice of a product formed on the fine grid.
pub fn project_fine(fine: &mut Vec<Complex64>) -> Vec<Complex64> {
    let n2 = fine.len();
    raw_fft(fine, false);
    let scale = 1.0 / n2 as f64;
    for z in fine.iter_mut() {
        *z *= scale;
    }
    alternate_signs(fine);
    truncate_spectrum(fine)
}

/// Dealiased pointwise product of two fields (zero padding to 2n, so the
/// retained band is exact for quadratically nonlinear terms and safe for
/// cubic ones).
pub fn dealiased_product(a: &ComplexField, b: &ComplexField) -> ComplexField {
    assert_eq!(a.grid(), b.grid());
    let fa = fine_samples(&forward(a));
    let fb = fine_samples(&forward(b));
    let mut prod: Vec<Complex64> = fa.iter().zip(&fb).map(|(x, y)| x * y).collect();
    let c = project_fine(&mut prod);
    inverse(a.grid(), &c)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wave(grid: &Grid, k: i64, amp: Complex64) -> ComplexField {
        let xi = k as f64 * grid.fundamental();
        ComplexField::from_fn(grid, |x| amp * Complex64::new(0.0, xi * x).exp())
    }

    #[test]
    fn plane_wave_coefficient() {
        let grid = Grid::new(64, 5.0).unwrap();
        let u = wave(&grid, 3, Complex64::new(2.0, -1.0));
        let c = forward(&u);
        assert!((c[3] - Complex64::new(2.0, -1.0)).norm() < 1e-12);
        let energy: f64 = c.iter().enumerate().filter(|(j, _)| *j != 3).map(|(_, z)| z.norm()).sum();
        assert!(energy < 1e-11);
        let u2 = wave(&grid, -5, Complex64::ONE);
        let c2 = forward(&u2);
        assert!((c2[64 - 5] - Complex64::ONE).norm() < 1e-12);
    }

    #[test]
    fn round_trip() {
        let grid = Grid::new(128, 3.0).unwrap();
        let u = ComplexField::from_fn(&grid, |x| Complex64::new((-x * x).exp(), x.sin()));
        let v = inverse(&grid, &forward(&u));
        let err: f64 = u
            .values()
            .iter()
            .zip(v.values())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-13 * u.max_abs().max(1.0), "round trip error {err}");
    }

    #[test]
    fn multiplier_is_derivative_on_waves() {
        let grid = Grid::new(64, std::f64::consts::PI).unwrap();
        let u = wave(&grid, 4, Complex64::ONE);
        let du = apply_multiplier(&u, |xi| Complex64::new(0.0, xi));
        for (d, v) in du.values().iter().zip(u.values()) {
            assert!((d - Complex64::new(0.0, 4.0) * v).norm() < 1e-10);
        }
    }

    #[test]
    fn dealiased_product_matches_exact_convolution() {
        let grid = Grid::new(64, 2.0).unwrap();
        // k=10 and k=12 alias under pointwise products on the coarse grid if
        // combined to 22 > ... (still representable); push to the edge:
        let a = wave(&grid, 20, Complex64::ONE);
        let b = wave(&grid, 20, Complex64::ONE);
        let p = dealiased_product(&a, &b);
        // 40 > 32: the product must be annihilated, not wrapped to -24.
        let c = forward(&p);
        let max: f64 = c.iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(max < 1e-12, "aliasing leaked: {max}");
        // a representable product lands on the right mode
        let a = wave(&grid, 7, Complex64::new(0.5, 0.5));
        let b = wave(&grid, -3, Complex64::new(1.0, -2.0));
        let p = dealiased_product(&a, &b);
        let c = forward(&p);
        let expect = Complex64::new(0.5, 0.5) * Complex64::new(1.0, -2.0);
        assert!((c[4] - expect).norm() < 1e-12);
    }

    #[test]
    fn truncation_zeroes_nyquist() {
        let grid = Grid::new(32, 1.0).unwrap();
        let u = wave(&grid, -16, Complex64::ONE); // pure Nyquist content
        let one = ComplexField::from_fn(&grid, |_| Complex64::ONE);
        let p = dealiased_product(&u, &one);
        assert!(p.max_abs() < 1e-12);
    }
}
