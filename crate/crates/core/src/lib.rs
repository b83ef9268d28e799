//! Pseudospectral simulation and verification lab for the intermediate
//! nonlinear Schroedinger equation on `[-L, L)` and its infinite-depth
//! (continuum Calogero-Moser) limit: the depth-transform operator family,
//! gauge variables, Lax pair, conserved quantities, and the parameter
//! studies tying them together.

pub mod cli;
pub mod config;
pub mod corpus;
pub mod error;
pub mod experiments;
pub mod gauge;
pub mod integrator;
pub mod invariants;
pub mod io;
pub mod model;
pub mod operators;
pub mod spectral;

pub use error::{Error, Result};
pub use model::ModelParams;
pub use operators::Depth;
pub use spectral::{ComplexField, Grid};
