//! Spatial mollification by the standard bump `η(y) = c·exp(-1/(1-|y|²))`.

use std::sync::OnceLock;

use super::spectral::SpectralField;
use crate::error::{Error, Result};
use crate::quadrature::CompositeRule;

/// Mollification radius `delta` and singular-curve cutoff scale `epsilon`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MollifierSpec {
    pub delta: f64,
    pub epsilon: f64,
}

impl MollifierSpec {
    pub fn new(delta: f64, epsilon: f64) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::param("delta", format!("must be positive, got {delta}")));
        }
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::param("epsilon", format!("must be positive, got {epsilon}")));
        }
        Ok(MollifierSpec { delta, epsilon })
    }
}

/// Unnormalized radial profile `exp(-1/(1-r²))` on `r < 1`.
#[inline]
pub fn bump(r: f64) -> f64 {
    if r.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - r * r)).exp()
    }
}

fn radial_rule() -> &'static CompositeRule {
    static RULE: OnceLock<CompositeRule> = OnceLock::new();
    RULE.get_or_init(|| CompositeRule::new(0.0, 1.0, 64, 10))
}

/// `c` such that `∫_{|y|<1} c·bump(|y|) dy = 1`.
pub fn profile_constant() -> f64 {
    static C: OnceLock<f64> = OnceLock::new();
    *C.get_or_init(|| {
        let m = 4.0 * std::f64::consts::PI * radial_rule().integrate(|r| bump(r) * r * r);
        1.0 / m
    })
}

/// Mass of the normalized profile under an independent, finer rule.
pub fn profile_integral() -> f64 {
    let rule = CompositeRule::new(0.0, 1.0, 200, 12);
    4.0 * std::f64::consts::PI * profile_constant() * rule.integrate(|r| bump(r) * r * r)
}

#[inline]
fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// `η̂(ρ) = ∫ η(y) e^{-iξ·y} dy` at `|ξ| = ρ`; real, radial, `η̂(0) = 1`.
pub fn eta_hat(rho: f64) -> f64 {
    let c = profile_constant();
    4.0 * std::f64::consts::PI * c * radial_rule().integrate(|r| bump(r) * r * r * sinc(rho * r))
}

/// `F_δ = η_δ * F` with `η_δ(y) = δ⁻³η(y/δ)`, applied as the multiplier `η̂(δ|k|)`.
pub fn mollify(f: &SpectralField, spec: &MollifierSpec) -> Result<SpectralField> {
    check_delta(spec.delta)?;
    let d = spec.delta;
    Ok(f.apply_radial_multiplier(|rho| eta_hat(d * rho)))
}

pub(crate) fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0) {
        return Err(Error::param("delta", format!("must be positive, got {delta}")));
    }
    if delta >= std::f64::consts::PI {
        return Err(Error::param(
            "delta",
            format!("must stay below half the period (π), got {delta}"),
        ));
    }
    Ok(())
}
