//! Pseudo-spectral electron-MHD on the periodic box with Littlewood–Paley
//! diagnostics for energy, helicity, fluxes and weak-strong uniqueness.

pub mod diagnostics;
pub mod error;
mod fft;
pub mod field;
pub mod littlewood_paley;
pub mod quadrature;
pub mod solver;
pub mod table;

pub use error::{Error, Instability, Result};
pub use field::{lp_norm, Grid, Shape, Snapshot, SpectralField};
pub use littlewood_paley::{BesovSpec, DyadicDecomposition, Kernel, LpFamily, ShellAmplitudes};
pub use solver::{SolverConfig, Trajectory};
