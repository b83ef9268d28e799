use std::sync::Arc;

use crate::error::{Error, Result};

#[derive(Debug)]
struct GridData {
    n: usize,
    half_width: f64,
    xs: Vec<f64>,
    freqs: Vec<f64>,
}

/// Uniform periodic discretization of `[-L, L)` with `n` points and the
/// frequency lattice `xi_k = pi k / L`, `k in {-n/2, ..., n/2 - 1}`.
///
/// Spectra are stored in FFT layout: index `j` carries `k = j` for
/// `j < n/2` and `k = j - n` for `j >= n/2`; `freqs()[j]` is the matching
/// `xi_k`. Cheap to clone (shared storage).
#[derive(Clone, Debug)]
pub struct Grid(Arc<GridData>);

impl Grid {
    pub fn new(n: usize, half_width: f64) -> Result<Self> {
        if n < 16 || !n.is_power_of_two() {
            return Err(Error::Config(format!(
                "grid point count must be a power of two >= 16, got {n}"
            )));
        }
        if !(half_width > 0.0) || !half_width.is_finite() {
            return Err(Error::Config(format!(
                "grid half-width must be positive and finite, got {half_width}"
            )));
        }
        let dx = 2.0 * half_width / n as f64;
        let xs = (0..n).map(|j| -half_width + j as f64 * dx).collect();
        let freqs = (0..n)
            .map(|j| {
                let k = if j < n / 2 { j as i64 } else { j as i64 - n as i64 };
                std::f64::consts::PI * k as f64 / half_width
            })
            .collect();
        Ok(Grid(Arc::new(GridData { n, half_width, xs, freqs })))
    }

    pub fn n(&self) -> usize {
        self.0.n
    }

    pub fn half_width(&self) -> f64 {
        self.0.half_width
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.0.half_width / self.0.n as f64
    }

    /// Sample points `x_j = -L + j dx`.
    pub fn xs(&self) -> &[f64] {
        &self.0.xs
    }

    /// Frequency lattice in FFT layout.
    pub fn freqs(&self) -> &[f64] {
        &self.0.freqs
    }

    /// Smallest positive lattice frequency `pi / L`.
    pub fn fundamental(&self) -> f64 {
        std::f64::consts::PI / self.0.half_width
    }

    /// Largest resolved frequency magnitude `pi (n/2) / L` (the Nyquist mode).
    pub fn max_freq(&self) -> f64 {
        std::f64::consts::PI * (self.0.n / 2) as f64 / self.0.half_width
    }

    /// FFT-layout index of the (single, negative) Nyquist mode.
    pub fn nyquist_index(&self) -> usize {
        self.0.n / 2
    }

    /// Integer mode number `k` for FFT-layout index `j`.
    pub fn mode(&self, j: usize) -> i64 {
        if j < self.0.n / 2 {
            j as i64
        } else {
            j as i64 - self.0.n as i64
        }
    }

    /// Plancherel weight: `||u||_{L^2}^2 = weight * sum_k |c_k|^2` for the
    /// coefficient convention used by `fft::forward`.
    pub fn spectral_weight(&self) -> f64 {
        2.0 * self.0.half_width
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.0.n == other.0.n && self.0.half_width == other.0.half_width)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integer_lattice_when_l_is_pi() {
        let g = Grid::new(16, std::f64::consts::PI).unwrap();
        let mut ks: Vec<i64> = (0..16).map(|j| g.freqs()[j].round() as i64).collect();
        ks.sort_unstable();
        assert_eq!(ks, (-8..8).collect::<Vec<_>>());
        for j in 0..16 {
            assert!((g.freqs()[j] - g.mode(j) as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn spacing() {
        let g = Grid::new(64, 10.0).unwrap();
        assert!((g.dx() - 0.3125).abs() < 1e-15);
        assert_eq!(g.xs().len(), 64);
        assert!((g.xs()[0] + 10.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(Grid::new(15, 1.0).is_err());
        assert!(Grid::new(8, 1.0).is_err());
        assert!(Grid::new(64, 0.0).is_err());
        assert!(Grid::new(64, -2.0).is_err());
    }

    #[test]
    fn lattice_symmetric_except_nyquist() {
        let g = Grid::new(32, 7.0).unwrap();
        for j in 1..16 {
            let neg = g.freqs()[32 - j];
            assert!((g.freqs()[j] + neg).abs() < 1e-13);
        }
        assert!(g.freqs()[g.nyquist_index()] < 0.0);
    }
}
