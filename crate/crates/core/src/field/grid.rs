use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};

/// Uniform `n³` discretization of the torus `[0, 2π)³`.
///
/// Wavenumbers along each axis live in `(-n/2, n/2]` and are stored in the
/// standard FFT order (`0, 1, …, n/2, -n/2+1, …, -1`), with the third axis
/// fastest.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Grid {
    n: usize,
}

impl Grid {
    pub fn new(n: usize) -> Result<Self> {
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::param(
                "n",
                format!("grid size must be a power of two >= 8, got {n}"),
            ));
        }
        Ok(Grid { n })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of grid points (equivalently, Fourier modes).
    #[inline]
    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Domain period along each axis.
    #[inline]
    pub fn length(&self) -> f64 {
        2.0 * PI
    }

    /// Torus volume `(2π)³`.
    #[inline]
    pub fn volume(&self) -> f64 {
        self.length().powi(3)
    }

    #[inline]
    pub fn spacing(&self) -> f64 {
        self.length() / self.n as f64
    }

    /// Largest retained `|k_i|` under the two-thirds rule.
    #[inline]
    pub fn dealias_cutoff(&self) -> i64 {
        (self.n / 3) as i64
    }

    #[inline]
    pub fn wavenumber(&self, j: usize) -> i64 {
        if j <= self.n / 2 {
            j as i64
        } else {
            j as i64 - self.n as i64
        }
    }

    #[inline]
    pub fn k_of(&self, idx: usize) -> [i64; 3] {
        let n = self.n;
        [
            self.wavenumber(idx / (n * n)),
            self.wavenumber((idx / n) % n),
            self.wavenumber(idx % n),
        ]
    }

    #[inline]
    pub fn kf_of(&self, idx: usize) -> [f64; 3] {
        let k = self.k_of(idx);
        [k[0] as f64, k[1] as f64, k[2] as f64]
    }

    #[inline]
    pub fn k_norm_sq(&self, idx: usize) -> f64 {
        let k = self.k_of(idx);
        (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64
    }

    /// Storage index of wavenumber `k`, or `None` if `k` is not representable.
    pub fn index_of(&self, k: [i64; 3]) -> Option<usize> {
        let n = self.n as i64;
        let mut idx = 0usize;
        for &ki in &k {
            if ki <= -n / 2 || ki > n / 2 {
                return None;
            }
            idx = idx * self.n + ki.rem_euclid(n) as usize;
        }
        Some(idx)
    }

    #[inline]
    pub fn mirror(&self, idx: usize) -> usize {
        crate::fft::mirror_index(self.n, idx)
    }

    /// Whether a mode survives two-thirds dealiasing.
    #[inline]
    pub fn is_retained(&self, k: [i64; 3]) -> bool {
        let c = self.dealias_cutoff();
        k.iter().all(|ki| ki.abs() <= c)
    }

    /// Whether any component of `k` sits on the Nyquist wavenumber `n/2`.
    #[inline]
    pub fn is_nyquist(&self, k: [i64; 3]) -> bool {
        let h = (self.n / 2) as i64;
        k.contains(&h)
    }

    /// Physical coordinates of grid point `idx`.
    #[inline]
    pub fn point(&self, idx: usize) -> [f64; 3] {
        let n = self.n;
        let h = self.spacing();
        [
            (idx / (n * n)) as f64 * h,
            ((idx / n) % n) as f64 * h,
            (idx % n) as f64 * h,
        ]
    }

    /// Grid with twice the points per axis, used for quadrature of
    /// non-band-limited integrands.
    pub fn oversampled(&self) -> Grid {
        Grid { n: 2 * self.n }
    }

    pub fn points(&self) -> impl Iterator<Item = [f64; 3]> + '_ {
        (0..self.len()).map(move |i| self.point(i))
    }

    /// Per-mode tables shared by every field on grids of this size.
    pub fn modes(&self) -> Arc<ModeTable> {
        static TABLES: OnceLock<Mutex<HashMap<usize, Arc<ModeTable>>>> = OnceLock::new();
        let cache = TABLES.get_or_init(|| Mutex::new(HashMap::new()));
        let mut cache = cache.lock().expect("mode table cache poisoned");
        cache
            .entry(self.n)
            .or_insert_with(|| Arc::new(ModeTable::new(*self)))
            .clone()
    }
}

/// Wavevectors, `|k|²` and the dealiasing mask in storage order.
#[derive(Debug)]
pub struct ModeTable {
    pub k: Vec<[f64; 3]>,
    pub ksq: Vec<f64>,
    pub ksq_int: Vec<i64>,
    pub retained: Vec<bool>,
}

impl ModeTable {
    fn new(grid: Grid) -> Self {
        let len = grid.len();
        let mut k = Vec::with_capacity(len);
        let mut ksq = Vec::with_capacity(len);
        let mut ksq_int = Vec::with_capacity(len);
        let mut retained = Vec::with_capacity(len);
        for idx in 0..len {
            let ki = grid.k_of(idx);
            let s = ki[0] * ki[0] + ki[1] * ki[1] + ki[2] * ki[2];
            k.push([ki[0] as f64, ki[1] as f64, ki[2] as f64]);
            ksq.push(s as f64);
            ksq_int.push(s);
            retained.push(grid.is_retained(ki));
        }
        ModeTable {
            k,
            ksq,
            ksq_int,
            retained,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_sizes() {
        assert!(Grid::new(4).is_err());
        assert!(Grid::new(12).is_err());
        assert!(Grid::new(16).is_ok());
    }

    #[test]
    fn cutoff_is_floor_n_over_3() {
        assert_eq!(Grid::new(32).unwrap().dealias_cutoff(), 10);
        assert_eq!(Grid::new(64).unwrap().dealias_cutoff(), 21);
        assert_eq!(Grid::new(8).unwrap().dealias_cutoff(), 2);
    }

    #[test]
    fn index_round_trip() {
        let g = Grid::new(16).unwrap();
        for idx in [0, 1, 7, 8, 9, 300, 4095] {
            assert_eq!(g.index_of(g.k_of(idx)), Some(idx));
        }
        assert_eq!(g.index_of([-8, 0, 0]), None);
        assert_eq!(g.k_of(g.mirror(g.index_of([3, -2, 5]).unwrap())), [-3, 2, -5]);
    }
}
