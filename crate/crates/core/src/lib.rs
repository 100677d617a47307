//! Discrete fractional Sobolev–Morrey machinery on truncated lattices.

pub mod error;
pub mod grid;
pub mod quadrature;
mod energy;
pub mod seminorm;
pub mod operator;
pub mod solver;
pub mod extremal;
pub mod perron;
pub mod sampling;
pub mod io;

pub use error::{Error, Result};
pub use grid::{apply_transform, FracParams, GridFunction, Lattice, Point, RigidTransform};
pub use seminorm::{gagliardo_seminorm, holder_seminorm, mean_oscillation, verify_morrey_bound, KernelWeights};
