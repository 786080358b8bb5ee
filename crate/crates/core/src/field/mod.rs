//! Periodic fields on `T³ = [0, 2π)³` and the operators acting on them.

pub mod cutoff;
mod grid;
pub mod init;
pub mod mollifier;
mod norms;
pub mod ops;
mod snapshot;
mod spectral;

pub use grid::{Grid, ModeTable};
pub use norms::{grid_max, lp_norm, magnitude, pairwise_sum, quadrature_lp};
pub use snapshot::{Snapshot, MAGIC as SNAPSHOT_MAGIC, VERSION as SNAPSHOT_VERSION};
pub use spectral::{Shape, SpectralField};

pub(crate) use norms::check_exponent;
