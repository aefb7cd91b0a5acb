//! One-world stochastic paths driven by the Schrödinger velocity field.
//!
//! A path obeys dX = v(X, t) dt + sqrt(hbar/m) dW with v = j/rho. The
//! Wiener increments come from per-path counter-based RNG streams, so an
//! ensemble is the same whatever the thread count.

pub mod classical;
pub mod double_slit;
pub mod feynman_kac;
pub mod paths;
pub mod sequence;
pub mod stats;
pub mod wiener;

pub use classical::classical_limit_trajectory;
pub use paths::{
    integrate_quantum_hamilton, sample_ensemble, sample_initial_positions, step_path, write_ensemble, OneWorldPath, PathState,
    PathStatus,
};
pub use sequence::{imaginary_drift, Drift, DriftField, FieldSequence};
pub use wiener::WienerConfig;
