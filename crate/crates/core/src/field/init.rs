//! Initial conditions.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

use super::grid::Grid;
use super::ops::leray_project;
use super::spectral::{Shape, SpectralField};
use crate::error::{Error, Result};
use crate::littlewood_paley::LpFamily;

/// `B = (sin z + cos y, sin x + cos z, sin y + cos x)`, a curl eigenfield with
/// eigenvalue 1.
pub fn abc_field(grid: Grid) -> SpectralField {
    let mut b = SpectralField::vector_zeros(grid);
    let half = Complex64::new(0.5, 0.0);
    let sin_plus = Complex64::new(0.0, -0.5);
    // Component c carries sin(x_{c+2}) + cos(x_{c+1}), indices mod 3.
    for c in 0..3 {
        let mut ks = [0i64; 3];
        ks[(c + 2) % 3] = 1;
        let mut kc = [0i64; 3];
        kc[(c + 1) % 3] = 1;
        let neg = |k: [i64; 3]| [-k[0], -k[1], -k[2]];
        b.set_coeff(c, ks, sin_plus);
        b.set_coeff(c, neg(ks), sin_plus.conj());
        b.set_coeff(c, kc, half);
        b.set_coeff(c, neg(kc), half);
    }
    b
}

/// Unit polarization perpendicular to `k`: `ẑ×k` normalized, or `x̂×k` when
/// `k ∥ ẑ`.
pub fn polarization(k: [i64; 3]) -> [f64; 3] {
    let kf = [k[0] as f64, k[1] as f64, k[2] as f64];
    let axis = if k[0] == 0 && k[1] == 0 {
        [1.0, 0.0, 0.0]
    } else {
        [0.0, 0.0, 1.0]
    };
    let a = [
        axis[1] * kf[2] - axis[2] * kf[1],
        axis[2] * kf[0] - axis[0] * kf[2],
        axis[0] * kf[1] - axis[1] * kf[0],
    ];
    let norm = (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt();
    [a[0] / norm, a[1] / norm, a[2] / norm]
}

/// `B = a cos(k·x)` with `a = polarization(k)`; `k = (4,0,0)` gives
/// `(0, cos 4x₁, 0)`.
pub fn single_mode(grid: Grid, k: [i64; 3]) -> Result<SpectralField> {
    if k == [0, 0, 0] {
        return Err(Error::param("k", "single mode needs a nonzero wavenumber"));
    }
    if !grid.is_retained(k) {
        return Err(Error::param(
            "k",
            format!("mode {k:?} lies outside the dealiased band of an n={} grid", grid.n()),
        ));
    }
    let a = polarization(k);
    let mut b = SpectralField::vector_zeros(grid);
    let neg = [-k[0], -k[1], -k[2]];
    for (c, ac) in a.iter().enumerate() {
        b.set_coeff(c, k, Complex64::new(0.5 * ac, 0.0));
        b.set_coeff(c, neg, Complex64::new(0.5 * ac, 0.0));
    }
    Ok(b)
}

/// Transform of real standard-normal white noise with the mean and every
/// Nyquist mode removed, so the result is exactly Hermitian.
pub fn white_noise(grid: Grid, shape: Shape, seed: u64) -> SpectralField {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let values: Vec<Vec<f64>> = (0..shape.ncomp())
        .map(|_| {
            (0..grid.len())
                .map(|_| StandardNormal.sample(&mut rng))
                .collect()
        })
        .collect();
    let mut f = SpectralField::from_physical(grid, &values).expect("sizes match");
    for idx in 0..grid.len() {
        if grid.is_nyquist(grid.k_of(idx)) {
            for c in 0..f.ncomp() {
                f.comp_mut(c)[idx] = Complex64::new(0.0, 0.0);
            }
        }
    }
    f.zero_mean();
    f
}

/// Divergence-free isotropic Gaussian field confined to shells
/// `q_lo..=q_hi`, dealiased, mean-free and normalized to unit energy.
pub fn random_shells(grid: Grid, q_lo: i32, q_hi: i32, seed: u64) -> Result<SpectralField> {
    if q_lo < -1 || q_hi < q_lo {
        return Err(Error::param(
            "q_lo/q_hi",
            format!("need -1 <= q_lo <= q_hi, got {q_lo}..{q_hi}"),
        ));
    }
    let lp = LpFamily::new(grid);
    let noise = white_noise(grid, Shape::Vector, seed);
    let band = noise.apply_radial_multiplier(|rho| lp.band_symbol(q_lo, q_hi, rho));
    let mut b = leray_project(&band.dealiased())?;
    b.zero_mean();
    let e = b.energy();
    if e == 0.0 {
        return Err(Error::param(
            "q_lo/q_hi",
            format!("shells {q_lo}..{q_hi} hold no retained modes on an n={} grid", grid.n()),
        ));
    }
    b.scale(e.sqrt().recip());
    Ok(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn abc_energy_and_sup() {
        let g = Grid::new(16).unwrap();
        let b = abc_field(g);
        let e = 3.0 * (2.0 * std::f64::consts::PI).powi(3) / 2.0;
        assert!((b.energy() - e).abs() < 1e-12 * e);
        assert!((e - 372.08).abs() < 0.01);
        let at = b.evaluate_at([std::f64::consts::FRAC_PI_4; 3]);
        let mag = at.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!((mag - 6f64.sqrt()).abs() < 1e-13);
        let sampled = SpectralField::from_fn(g, Shape::Vector, |x, o| {
            o[0] = x[2].sin() + x[1].cos();
            o[1] = x[0].sin() + x[2].cos();
            o[2] = x[1].sin() + x[0].cos();
        });
        assert!((&sampled - &b).max_abs_coeff() < 1e-15);
    }

    #[test]
    fn single_mode_polarization() {
        assert_eq!(polarization([4, 0, 0]), [0.0, 1.0, 0.0]);
        let p = polarization([0, 0, 3]);
        assert!(p[0].abs() < 1e-15 && (p[1] + 1.0).abs() < 1e-15);
        let g = Grid::new(16).unwrap();
        let b = single_mode(g, [4, 0, 0]).unwrap();
        let v = b.evaluate_at([0.3, 1.0, 2.0]);
        assert!((v[1] - (1.2f64).cos()).abs() < 1e-14 && v[0] == 0.0 && v[2] == 0.0);
        assert!(single_mode(g, [6, 0, 0]).is_err());
        assert!(single_mode(g, [0, 0, 0]).is_err());
    }

    #[test]
    fn random_shells_is_admissible() {
        let g = Grid::new(16).unwrap();
        let b = random_shells(g, 1, 2, 7).unwrap();
        assert!((b.energy() - 1.0).abs() < 1e-12);
        assert!(b.is_divergence_free(1e-12));
        assert!(b.hermitian_defect() < 1e-15);
        assert_eq!(b.alias_content(), 0.0);
        assert!(b.mean().iter().all(|m| m.norm() == 0.0));
        assert_eq!(b, random_shells(g, 1, 2, 7).unwrap());
        assert_ne!(b, random_shells(g, 1, 2, 8).unwrap());
        assert!(random_shells(g, 3, 1, 0).is_err());
    }
}
