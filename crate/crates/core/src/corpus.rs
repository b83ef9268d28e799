//! Shared test states: smooth decaying profiles and seeded random
//! band-limited fields. Everything here is deterministic so diagnostics are
//! reproducible run to run.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex64;

use crate::spectral::fft;
use crate::spectral::field::ComplexField;
use crate::spectral::grid::Grid;

/// A short list of smooth, boundary-decaying fields with assorted means,
/// parities and oscillation, scaled to the grid.
pub fn smooth_decaying_corpus(grid: &Grid, count: usize) -> Vec<ComplexField> {
    let l = grid.half_width();
    let w = (l / 8.0).max(1.0);
    let makers: Vec<Box<dyn Fn(f64) -> Complex64>> = vec![
        Box::new(move |x| Complex64::new((-(x / w).powi(2)).exp(), 0.0)),
        Box::new(move |x| Complex64::new(x / w * (-(x / w).powi(2) / 2.0).exp(), 0.0)),
        Box::new(move |x| {
            Complex64::new(
                (1.7 * x).cos() * (-(x / w).powi(2)).exp(),
                (0.9 * x).sin() * (-(x / w).powi(2)).exp(),
            )
        }),
        Box::new(move |x| Complex64::new(0.0, (-(x / (0.7 * w)).powi(2)).exp()) * 0.8),
        Box::new(move |x| {
            Complex64::new(0.2, 0.0) * Complex64::new(0.0, 2.4 * x).exp()
                * Complex64::new((-(x / w).powi(2) / 1.5).exp(), 0.0)
        }),
        Box::new(move |x| Complex64::new((-(x - w / 2.0).powi(2) / (w * w)).exp(), 0.0)),
        Box::new(move |x| {
            Complex64::new(
                (-(x / w).powi(2)).exp() - 0.5 * (-(x / (0.5 * w)).powi(2)).exp(),
                0.0,
            )
        }),
    ];
    makers
        .into_iter()
        .take(count)
        .map(|f| ComplexField::from_fn(grid, |x| f(x)))
        .collect()
}

/// A single real bump, for real-to-real operator checks.
pub fn real_bump(grid: &Grid) -> ComplexField {
    let w = (grid.half_width() / 8.0).max(1.0);
    ComplexField::from_fn(grid, |x| {
        Complex64::new((1.0 + 0.3 * (x / w)) * (-(x / w).powi(2)).exp(), 0.0)
    })
}

/// Seeded random field, band-limited to `|mode| <= max_mode`, with unit
/// `L^2` norm. Coefficients are drawn as complex Gaussians.
pub fn random_band_limited(grid: &Grid, max_mode: usize, seed: u64) -> ComplexField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = grid.n();
    assert!(max_mode < n / 2, "band must fit strictly inside the lattice");
    let mut c = vec![Complex64::ZERO; n];
    for k in 0..=max_mode {
        c[k] = gaussian(&mut rng);
        if k > 0 {
            c[n - k] = gaussian(&mut rng);
        }
    }
    let mut u = fft::inverse(grid, &c);
    let norm = crate::spectral::norms::mass(&u).sqrt();
    if norm > 0.0 {
        let s = Complex64::new(1.0 / norm, 0.0);
        for z in u.values_mut() {
            *z *= s;
        }
    }
    u
}

/// Seeded random band-limited field with a smooth decaying envelope, for
/// diagnostics that need negligible boundary mass.
pub fn random_decaying(grid: &Grid, max_mode: usize, seed: u64) -> ComplexField {
    let u = random_band_limited(grid, max_mode, seed);
    let w = grid.half_width() / 4.0;
    let envelope = ComplexField::from_fn(grid, |x| Complex64::new((-(x / w).powi(2)).exp(), 0.0));
    u.pointwise_mul(&envelope)
}

fn gaussian(rng: &mut ChaCha8Rng) -> Complex64 {
    // Box-Muller
    let u1: f64 = rng.random::<f64>().max(1e-300);
    let u2: f64 = rng.random();
    let r = (-2.0 * u1.ln()).sqrt();
    let th = 2.0 * std::f64::consts::PI * u2;
    Complex64::new(r * th.cos(), r * th.sin()) / std::f64::consts::SQRT_2
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::norms::mass;

    #[test]
    fn random_fields_are_deterministic_and_normalized() {
        let grid = Grid::new(256, 10.0).unwrap();
        let a = random_band_limited(&grid, 40, 7);
        let b = random_band_limited(&grid, 40, 7);
        assert_eq!(a.values(), b.values());
        assert!((mass(&a) - 1.0).abs() < 1e-12);
        let c = random_band_limited(&grid, 40, 8);
        assert!(mass(&(&a - &c)) > 1e-3);
    }

    #[test]
    fn corpus_fields_decay_at_the_boundary() {
        let grid = Grid::new(512, 30.0).unwrap();
        for u in smooth_decaying_corpus(&grid, 7) {
            assert!(crate::spectral::norms::boundary_mass_fraction(&u) < 1e-8);
        }
    }
}
