//! Grids, transforms, multipliers, projectors and norms: the pseudospectral
//! substrate everything else is built on.

pub mod bump;
pub mod fft;
pub mod field;
pub mod grid;
pub mod norms;
pub mod projectors;
pub mod propagator;
pub mod symbol;

pub use field::ComplexField;
pub use grid::Grid;
pub use projectors::Sign;
pub use symbol::Symbol;

/// Grid construction; see [`Grid::new`] for the preconditions.
pub fn make_grid(n: usize, half_width: f64) -> crate::error::Result<Grid> {
    Grid::new(n, half_width)
}
