//! Few-photon propagators and scattering matrices for low-dimensional
//! quantum systems coupled to one or more waveguides.

pub mod bath;
pub mod emission;
pub mod error;
pub mod evolution;
pub mod green;
pub mod linalg;
pub mod pairing;
pub mod propagator;
pub mod scenario;
pub mod scattering;
pub mod system;
pub mod wavepacket;

pub use error::{Error, Result};
