//! Floquet analysis of a charged particle in a time-periodic planar
//! magnetic field: Hill's equation, classical and quantum propagation,
//! dispersive decay and scattering estimates.

pub mod classical;
pub mod error;
pub mod hill;
pub mod mat2;
pub mod models;
pub mod quad;
pub mod quantum;
pub mod scattering;

pub use error::{Error, Result};
