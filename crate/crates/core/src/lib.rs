//! Fourier-space solver and diagnostics for the spatially homogeneous Boltzmann
//! equation with Maxwellian molecules and a Debye–Yukawa angular kernel.

pub mod charfn;
pub mod collision;
pub mod diagnostics;
pub mod error;
pub mod evolve;
pub mod kernel;
pub mod quadrature;
pub mod special;
pub mod vec3;

pub use error::{Error, Result};

/// Version stamped on every persisted artifact (grid sidecars, reports).
pub const FORMAT_VERSION: u32 = 1;
