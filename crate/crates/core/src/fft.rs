//! Three-dimensional complex FFTs on `n³` periodic grids.
//!
//! Coefficients follow the convention `f(x) = Σ_k f̂(k) e^{ik·x}`, so the
//! forward transform carries the `1/n³` factor and the inverse is a plain sum.
//! Real fields are always moved two at a time by packing them into the real
//! and imaginary parts of one complex array.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

struct Fft3 {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    /// `mirror[idx]` is the storage index of `-k(idx)`.
    mirror: Vec<usize>,
}

fn plan(n: usize) -> Arc<Fft3> {
    static PLANS: OnceLock<Mutex<HashMap<usize, Arc<Fft3>>>> = OnceLock::new();
    let cache = PLANS.get_or_init(|| Mutex::new(HashMap::new()));
    let mut cache = cache.lock().expect("fft plan cache poisoned");
    cache
        .entry(n)
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            Arc::new(Fft3 {
                n,
                forward: planner.plan_fft_forward(n),
                inverse: planner.plan_fft_inverse(n),
                mirror: (0..n * n * n).map(|i| mirror_index(n, i)).collect(),
            })
        })
        .clone()
}

const BLOCK: usize = 16;

impl Fft3 {
    /// Transforms along the contiguous axis, then rotates the axes
    /// `(a, b, c) -> (c, a, b)`; three passes restore the original layout.
    fn run(&self, data: &mut Vec<Complex64>, inverse: bool) {
        let fft = if inverse { &self.inverse } else { &self.forward };
        let n = self.n;
        let nn = n * n;
        debug_assert_eq!(data.len(), nn * n);
        let zero = Complex64::new(0.0, 0.0);
        let mut scratch = vec![zero; fft.get_inplace_scratch_len()];
        let mut tmp = vec![zero; data.len()];
        for _ in 0..3 {
            if inverse {
                // Synthesis inputs are usually dealiased, which leaves whole
                // rows empty in the first two passes.
                for row in data.chunks_exact_mut(n) {
                    if row.iter().any(|v| *v != zero) {
                        fft.process_with_scratch(row, &mut scratch);
                    }
                }
            } else {
                fft.process_with_scratch(data, &mut scratch);
            }
            transpose(data, &mut tmp, nn, n);
            std::mem::swap(data, &mut tmp);
        }
    }
}

/// Writes the `rows × cols` row-major matrix `src` transposed into `dst`.
fn transpose(src: &[Complex64], dst: &mut [Complex64], rows: usize, cols: usize) {
    for r0 in (0..rows).step_by(BLOCK) {
        let r1 = (r0 + BLOCK).min(rows);
        for c0 in (0..cols).step_by(BLOCK) {
            let c1 = (c0 + BLOCK).min(cols);
            for c in c0..c1 {
                let out = &mut dst[c * rows + r0..c * rows + r1];
                for (o, r) in out.iter_mut().zip(r0..r1) {
                    *o = src[r * cols + c];
                }
            }
        }
    }
}

/// Forward transform, normalized by `1/n³`.
pub(crate) fn forward(n: usize, mut data: Vec<Complex64>) -> Vec<Complex64> {
    plan(n).run(&mut data, false);
    let scale = 1.0 / (n * n * n) as f64;
    data.iter_mut().for_each(|v| *v *= scale);
    data
}

/// Unnormalized inverse transform (synthesis).
pub(crate) fn inverse(n: usize, mut data: Vec<Complex64>) -> Vec<Complex64> {
    plan(n).run(&mut data, true);
    data
}

/// Index of `-k` in the standard FFT ordering.
#[inline]
pub(crate) fn mirror_index(n: usize, idx: usize) -> usize {
    let nn = n * n;
    let (a, b, c) = (idx / nn, (idx / n) % n, idx % n);
    let m = |j: usize| (n - j) % n;
    (m(a) * n + m(b)) * n + m(c)
}

/// Synthesizes real arrays from Hermitian coefficient arrays, two per transform.
pub(crate) fn synthesize_real(n: usize, spectra: &[&[Complex64]]) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(spectra.len());
    for pair in spectra.chunks(2) {
        let packed: Vec<Complex64> = match pair {
            [a, b] => a
                .iter()
                .zip(b.iter())
                .map(|(x, y)| x + Complex64::i() * y)
                .collect(),
            [a] => a.to_vec(),
            _ => unreachable!(),
        };
        let phys = inverse(n, packed);
        out.push(phys.iter().map(|v| v.re).collect());
        if pair.len() == 2 {
            out.push(phys.iter().map(|v| v.im).collect());
        }
    }
    out
}

/// Analyzes real arrays into Hermitian coefficient arrays, two per transform.
pub(crate) fn analyze_real(n: usize, arrays: &[&[f64]]) -> Vec<Vec<Complex64>> {
    let mut out = Vec::with_capacity(arrays.len());
    for pair in arrays.chunks(2) {
        match pair {
            [f, g] => {
                let packed: Vec<Complex64> = f
                    .iter()
                    .zip(g.iter())
                    .map(|(&x, &y)| Complex64::new(x, y))
                    .collect();
                let h = forward(n, packed);
                let mirror = &plan(n).mirror;
                let mut a = Vec::with_capacity(h.len());
                let mut b = Vec::with_capacity(h.len());
                for (hk, &mi) in h.iter().zip(mirror.iter()) {
                    let hm = h[mi].conj();
                    a.push((hk + hm) * 0.5);
                    b.push((hk - hm) * Complex64::new(0.0, -0.5));
                }
                out.push(a);
                out.push(b);
            }
            [f] => {
                let packed: Vec<Complex64> = f.iter().map(|&x| Complex64::new(x, 0.0)).collect();
                out.push(forward(n, packed));
            }
            _ => unreachable!(),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_identity() {
        let n = 8;
        let data: Vec<Complex64> = (0..n * n * n)
            .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()))
            .collect();
        let back = forward(n, inverse(n, data.clone()));
        for (a, b) in data.iter().zip(back.iter()) {
            assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn single_mode_lands_on_its_wavenumber() {
        let n = 8;
        let h = 2.0 * std::f64::consts::PI / n as f64;
        let mut f = Vec::new();
        for a in 0..n {
            for _b in 0..n {
                for c in 0..n {
                    // cos(2 x1 + 3 x3)
                    f.push((2.0 * a as f64 * h + 3.0 * c as f64 * h).cos());
                }
            }
        }
        let spec = analyze_real(n, &[&f]);
        let idx = (2 * n) * n + 3;
        assert!((spec[0][idx].re - 0.5).abs() < 1e-14);
        assert!((spec[0][mirror_index(n, idx)].re - 0.5).abs() < 1e-14);
        let total: f64 = spec[0].iter().map(|v| v.norm()).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn packed_pairs_match_separate_transforms() {
        let n = 8;
        let f: Vec<f64> = (0..n * n * n).map(|i| (i as f64 * 0.3).sin()).collect();
        let g: Vec<f64> = (0..n * n * n).map(|i| (i as f64 * 0.7).cos()).collect();
        let both = analyze_real(n, &[&f, &g]);
        let fa = analyze_real(n, &[&f]);
        let ga = analyze_real(n, &[&g]);
        for i in 0..f.len() {
            assert!((both[0][i] - fa[0][i]).norm() < 1e-14);
            assert!((both[1][i] - ga[0][i]).norm() < 1e-14);
        }
        let back = synthesize_real(n, &[&both[0], &both[1]]);
        for i in 0..f.len() {
            assert!((back[0][i] - f[i]).abs() < 1e-13);
            assert!((back[1][i] - g[i]).abs() < 1e-13);
        }
    }
}
