//! Single-magnon dynamics of spin-1/2 XY rings and chains with 1/r² long-range
//! couplings: coupling synthesis, dense and circulant propagation, two-packet
//! analytics, concurrence, and reproducible experiment runs.

pub mod analytic;
pub mod error;
pub mod experiments;
pub mod hamiltonian;
pub mod lattice;
pub mod observables;
pub mod propagator;
pub mod series;

pub use error::{Error, Result};
