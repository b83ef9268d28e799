use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::grid::Grid;

/// One complex-valued state sampled on a [`Grid`].
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexField {
    grid: Grid,
    values: Vec<Complex64>,
}

impl ComplexField {
    pub fn zeros(grid: &Grid) -> Self {
        ComplexField { grid: grid.clone(), values: vec![Complex64::ZERO; grid.n()] }
    }

    pub fn from_values(grid: &Grid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.n() {
            return Err(Error::Config(format!(
                "field length {} does not match grid size {}",
                values.len(),
                grid.n()
            )));
        }
        Ok(ComplexField { grid: grid.clone(), values })
    }

    pub fn from_fn(grid: &Grid, mut f: impl FnMut(f64) -> Complex64) -> Self {
        let values = grid.xs().iter().map(|&x| f(x)).collect();
        ComplexField { grid: grid.clone(), values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn conj(&self) -> Self {
        ComplexField {
            grid: self.grid.clone(),
            values: self.values.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn scaled(&self, a: Complex64) -> Self {
        ComplexField {
            grid: self.grid.clone(),
            values: self.values.iter().map(|z| a * z).collect(),
        }
    }

    pub fn map(&self, mut f: impl FnMut(Complex64) -> Complex64) -> Self {
        ComplexField {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&z| f(z)).collect(),
        }
    }

    /// `self + a * other`, in place.
    pub fn axpy(&mut self, a: Complex64, other: &ComplexField) {
        assert_eq!(self.grid, other.grid, "fields live on different grids");
        for (s, o) in self.values.iter_mut().zip(&other.values) {
            *s += a * o;
        }
    }

    /// Pointwise product with another field on the same grid (no dealiasing).
    pub fn pointwise_mul(&self, other: &ComplexField) -> Self {
        assert_eq!(self.grid, other.grid, "fields live on different grids");
        ComplexField {
            grid: self.grid.clone(),
            values: self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect(),
        }
    }
}

impl std::ops::Add for &ComplexField {
    type Output = ComplexField;
    fn add(self, rhs: &ComplexField) -> ComplexField {
        let mut out = self.clone();
        out.axpy(Complex64::ONE, rhs);
        out
    }
}

impl std::ops::Sub for &ComplexField {
    type Output = ComplexField;
    fn sub(self, rhs: &ComplexField) -> ComplexField {
        let mut out = self.clone();
        out.axpy(-Complex64::ONE, rhs);
        out
    }
}
