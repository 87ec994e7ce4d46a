//! Classical emulation of two Hamiltonian-simulation algorithms for
//! multiscale linear transport equations.
//!
//! The crate assembles an asymptotic-preserving exponential-integrator
//! discretization of the parity transport system with incoming boundary
//! conditions, turns the resulting discrete dynamics into Hermitian
//! Hamiltonian systems through the warped phase transform (one extra
//! Fourier dimension), evolves them, recovers the physical solution, and
//! numerically verifies the spectral bounds that control the steady-state
//! evolution time.

pub mod ap_scheme;
pub mod bounds;
pub mod config;
pub mod dense;
pub mod error;
pub mod evolution;
pub mod iterative;
pub mod mesh;
pub mod presets;
pub mod runner;
pub mod schrodingerize;
pub mod sparse;
pub mod spectral;
pub mod steady;

pub use error::{Result, TransportError};
