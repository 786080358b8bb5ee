//! `L^p` norms on the torus.
//!
//! `p = 2` is exact through Parseval. Every other exponent is a quadrature of
//! `|F|^p` on the grid refined twice per axis; `|F|^p` is not band-limited, so
//! those values carry a (small) quadrature error. `p = ∞` is the maximum over
//! the same refined grid.

use super::spectral::SpectralField;
use crate::error::{Error, Result};

/// Sum in a fixed binary-tree order, independent of how the caller chunks work.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const LEAF: usize = 64;
    if values.len() <= LEAF {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Pointwise Euclidean magnitude across components.
pub fn magnitude(values: &[Vec<f64>]) -> Vec<f64> {
    let len = values.first().map_or(0, |v| v.len());
    (0..len)
        .map(|i| values.iter().map(|c| c[i] * c[i]).sum::<f64>().sqrt())
        .collect()
}

/// `(h³ Σ |f|^p)^{1/p}` over samples with cell volume `cell`; `p = ∞` is the max.
pub fn quadrature_lp(magnitudes: &[f64], cell: f64, p: f64) -> f64 {
    if p.is_infinite() {
        return magnitudes.iter().fold(0.0, |m, &v| m.max(v));
    }
    let terms: Vec<f64> = magnitudes.iter().map(|v| v.powf(p)).collect();
    (cell * pairwise_sum(&terms)).powf(1.0 / p)
}

pub(crate) fn check_exponent(name: &'static str, p: f64) -> Result<()> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::param(name, format!("exponent must lie in [1, ∞], got {p}")));
    }
    Ok(())
}

/// `(∫_{T³} |F|^p dx)^{1/p}` with `|F|` the pointwise vector magnitude.
pub fn lp_norm(field: &SpectralField, p: f64) -> Result<f64> {
    check_exponent("p", p)?;
    if p == 2.0 {
        return Ok(field.l2_norm());
    }
    if field.is_zero() {
        return Ok(0.0);
    }
    let values = field.to_physical_oversampled(2);
    let mags = magnitude(&values);
    let h = field.grid().spacing() / 2.0;
    Ok(quadrature_lp(&mags, h * h * h, p))
}

/// Max of `|F|` over the native grid only (cheap; used for per-step logs).
pub fn grid_max(field: &SpectralField) -> f64 {
    magnitude(&field.to_physical())
        .into_iter()
        .fold(0.0, f64::max)
}
