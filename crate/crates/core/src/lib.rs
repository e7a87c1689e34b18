//! Exactly solvable pure-dephasing models and the numerical machinery around them.
//!
//! The crate is organised by physical subsystem:
//!
//! - [`formfactor`]: coupling spectral weights `J(ω) = |g(ω)|²`, their infrared
//!   classification and singularity-aware moments.
//! - [`dephasing`]: the exact spin-boson pure-dephasing solution (decoherence
//!   functional `γ_t`, global phase, reduced qubit state, overlaps, rate fits).
//! - [`mastereq`]: Caldeira-Leggett and pure-decoherence master equations.
//! - [`scattering`]: the Born/low-density scattering dephasing rate.
//! - [`chaos`]: level ensembles, random couplings and the broadened spectral
//!   function of a chaotic environment.
//!
//! Units follow `ħ = k_B = 1` throughout.

pub mod chaos;
pub mod dephasing;
mod error;
pub mod formfactor;
pub mod mastereq;
pub mod quadrature;
pub mod scattering;
pub mod stats;

pub use error::{Error, Result};
