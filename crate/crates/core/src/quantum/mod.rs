//! Grid wavefunctions and propagators for the quadratic rotating-frame
//! Hamiltonian, plus the dispersive diagnostics built on them.

pub mod fft;
pub mod grid;
pub mod metaplectic;
pub mod propagate;
pub mod wave;

pub use grid::GridSpec;
pub use metaplectic::{ScaledWave, Spectral};
pub use propagate::{
    dispersive_ratio, gamma, interval_matrix, mehler_propagate, strang_oracle, weighted_norm_ratio,
    PropagationOptions,
};
pub use wave::WaveFunction;
