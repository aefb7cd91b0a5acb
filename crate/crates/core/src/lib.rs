//! Numerical laboratory for four views of the same quantum dynamics: grid
//! propagation of the Schrödinger vector, stochastic one-world paths,
//! Hamilton-type flows in the parameter space of trial wavefunctions, and
//! branching Gaussian wavepackets.

pub mod adf;
pub mod branching;
pub mod cli;
pub mod error;
pub mod field;
pub mod one_world;
pub mod param_space;
pub mod grid;
pub mod io;
pub mod observables;
pub mod potential;
pub mod propagate;
pub mod spectral;
pub mod verify;

pub use error::{Error, Result};
pub use field::{init_coherent_state, SchrodingerField};
pub use grid::{Axis, Grid};
pub use potential::PotentialSpec;
pub use propagate::{propagate_complex, propagate_real_vector, Propagator};
