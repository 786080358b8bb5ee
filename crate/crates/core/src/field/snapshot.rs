//! Binary snapshot files.
//!
//! Layout, all little-endian: the 8 magic bytes `EMHDSNAP`, `u32` version,
//! `u32 n`, `u32 ncomp`, `f64` time, `f64 mu`, `f64 d_i`, then `ncomp·n³`
//! coefficient pairs `(f64 re, f64 im)`. Components are outermost and
//! coefficients follow the FFT storage order with `k₃` fastest.

use std::path::Path;

use num_complex::Complex64;

use super::grid::Grid;
use super::spectral::SpectralField;
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 8] = b"EMHDSNAP";
pub const VERSION: u32 = 1;
const HEADER_LEN: usize = 8 + 4 * 3 + 8 * 3;

/// A field together with the run parameters that produced it.
#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub field: SpectralField,
    pub mu: f64,
    pub d_i: f64,
}

impl Snapshot {
    pub fn new(field: SpectralField, mu: f64, d_i: f64) -> Self {
        Snapshot { field, mu, d_i }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let f = &self.field;
        let mut out = Vec::with_capacity(HEADER_LEN + 16 * f.ncomp() * f.grid().len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&(f.grid().n() as u32).to_le_bytes());
        out.extend_from_slice(&(f.ncomp() as u32).to_le_bytes());
        for v in [f.time(), self.mu, self.d_i] {
            out.extend_from_slice(&v.to_le_bytes());
        }
        for comp in f.comps() {
            for c in comp {
                out.extend_from_slice(&c.re.to_le_bytes());
                out.extend_from_slice(&c.im.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Snapshot> {
        if bytes.len() < 8 || &bytes[..8] != MAGIC {
            return Err(Error::BadSnapshotHeader("missing EMHDSNAP magic".into()));
        }
        if bytes.len() < HEADER_LEN {
            return Err(Error::TruncatedSnapshot {
                offset: bytes.len() as u64,
                expected: HEADER_LEN as u64,
            });
        }
        let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
        let f64_at = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
        let version = u32_at(8);
        if version != VERSION {
            return Err(Error::BadSnapshotHeader(format!("unsupported version {version}")));
        }
        let n = u32_at(12) as usize;
        let ncomp = u32_at(16) as usize;
        let grid = Grid::new(n).map_err(|_| Error::BadSnapshotHeader(format!("invalid grid size {n}")))?;
        if !matches!(ncomp, 1 | 3 | 9) {
            return Err(Error::BadSnapshotHeader(format!("invalid component count {ncomp}")));
        }
        let (time, mu, d_i) = (f64_at(20), f64_at(28), f64_at(36));
        let expected = HEADER_LEN + 16 * ncomp * grid.len();
        if bytes.len() < expected {
            return Err(Error::TruncatedSnapshot {
                offset: bytes.len() as u64,
                expected: expected as u64,
            });
        }
        if bytes.len() > expected {
            return Err(Error::BadSnapshotHeader(format!(
                "{} trailing bytes after the coefficient block",
                bytes.len() - expected
            )));
        }
        let mut comps = Vec::with_capacity(ncomp);
        let mut o = HEADER_LEN;
        for _ in 0..ncomp {
            let mut comp = Vec::with_capacity(grid.len());
            for _ in 0..grid.len() {
                comp.push(Complex64::new(f64_at(o), f64_at(o + 8)));
                o += 16;
            }
            comps.push(comp);
        }
        let field = SpectralField::from_coeffs(grid, comps)?.with_time(time);
        Ok(Snapshot { field, mu, d_i })
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Snapshot> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Snapshot::from_bytes(&bytes)
    }
}
