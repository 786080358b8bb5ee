//! Cutoffs around a moving singular point `s(t)`.
//!
//! `χ_ε(t, x) = χ(|x - s_ε(t)| / ε)` with `χ = 0` on `[0, 2]`, `χ = 1` on
//! `[3, ∞)` and the quintic smoothstep in between, which is `C²` at both knots.

use super::grid::Grid;
use super::mollifier::{bump, MollifierSpec};
use super::norms::{check_exponent, quadrature_lp};
use super::spectral::{Shape, SpectralField};
use crate::error::{Error, Result};

/// Time-stamped samples of a curve in `ℝ³`.
#[derive(Clone, Debug, PartialEq)]
pub struct SingularCurve {
    times: Vec<f64>,
    points: Vec<[f64; 3]>,
    hoelder_seminorm: f64,
}

fn dist(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

impl SingularCurve {
    pub fn new(times: Vec<f64>, points: Vec<[f64; 3]>) -> Result<Self> {
        if times.is_empty() || times.len() != points.len() {
            return Err(Error::param(
                "curve",
                "need at least one sample and one point per time",
            ));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::param("curve", "sample times must be strictly increasing"));
        }
        let mut h: f64 = 0.0;
        for i in 0..times.len() {
            for j in i + 1..times.len() {
                h = h.max(dist(points[i], points[j]) / (times[j] - times[i]).sqrt());
            }
        }
        Ok(SingularCurve {
            times,
            points,
            hoelder_seminorm: h,
        })
    }

    /// Samples `f` at `m` uniform times on `[0, t_end]`.
    pub fn sampled<F: Fn(f64) -> [f64; 3]>(f: F, t_end: f64, m: usize) -> Result<Self> {
        let m = m.max(1);
        let times: Vec<f64> = if m == 1 {
            vec![0.0]
        } else {
            (0..m).map(|i| t_end * i as f64 / (m - 1) as f64).collect()
        };
        let points = times.iter().map(|&t| f(t)).collect();
        Self::new(times, points)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn points(&self) -> &[[f64; 3]] {
        &self.points
    }

    /// Largest `|s(t₁) - s(t₂)| / |t₁ - t₂|^{1/2}` over sample pairs.
    pub fn hoelder_seminorm(&self) -> f64 {
        self.hoelder_seminorm
    }

    /// Piecewise-linear interpolant, extended by constants outside the samples.
    pub fn extended(&self, t: f64) -> [f64; 3] {
        let ts = &self.times;
        if t <= ts[0] {
            return self.points[0];
        }
        if t >= *ts.last().unwrap() {
            return *self.points.last().unwrap();
        }
        let j = ts.partition_point(|&s| s <= t);
        let (t0, t1) = (ts[j - 1], ts[j]);
        let w = (t - t0) / (t1 - t0);
        let (a, b) = (self.points[j - 1], self.points[j]);
        [
            a[0] + w * (b[0] - a[0]),
            a[1] + w * (b[1] - a[1]),
            a[2] + w * (b[2] - a[2]),
        ]
    }

    /// `s_ε(t) = ε⁻²∫η(ε⁻²τ) s^ext(t - τ) dτ`, trapezoid with step `ε²/8`;
    /// the discrete weights sum to 1, so constants are reproduced exactly.
    pub fn mollified_at(&self, epsilon: f64, t: f64) -> [f64; 3] {
        let e2 = epsilon * epsilon;
        let step = e2 / 8.0;
        let mut acc = [0.0; 3];
        let mut total = 0.0;
        for j in -8i32..=8 {
            let tau = j as f64 * step;
            let w = bump(tau / e2);
            if w == 0.0 {
                continue;
            }
            let p = self.extended(t - tau);
            for c in 0..3 {
                acc[c] += w * p[c];
            }
            total += w;
        }
        [acc[0] / total, acc[1] / total, acc[2] / total]
    }

    /// `s_ε` sampled at this curve's times.
    pub fn mollified(&self, epsilon: f64) -> SingularCurve {
        let points = self
            .times
            .iter()
            .map(|&t| self.mollified_at(epsilon, t))
            .collect();
        SingularCurve::new(self.times.clone(), points).expect("same admissible times")
    }

    /// `max_t |s(t) - s_ε(t)|` over the sample times.
    pub fn mollification_error(&self, epsilon: f64) -> f64 {
        self.times
            .iter()
            .zip(self.points.iter())
            .map(|(&t, &p)| dist(p, self.mollified_at(epsilon, t)))
            .fold(0.0, f64::max)
    }
}

/// Quintic profile and its first two derivatives at `r`.
pub fn cutoff_profile(r: f64) -> (f64, f64, f64) {
    if r <= 2.0 {
        return (0.0, 0.0, 0.0);
    }
    if r >= 3.0 {
        return (1.0, 0.0, 0.0);
    }
    let u = r - 2.0;
    let v = u * u * u * (10.0 - 15.0 * u + 6.0 * u * u);
    let d1 = 30.0 * u * u * (1.0 - u) * (1.0 - u);
    let d2 = 60.0 * u - 180.0 * u * u + 120.0 * u * u * u;
    (v, d1, d2)
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0) || 3.0 * epsilon >= std::f64::consts::PI {
        return Err(Error::param(
            "epsilon",
            format!("need 0 < 3ε < π so the cutoff ball fits in the torus, got ε={epsilon}"),
        ));
    }
    Ok(())
}

/// Minimum-image distance on the torus.
fn torus_dist(x: [f64; 3], c: [f64; 3]) -> f64 {
    let l = 2.0 * std::f64::consts::PI;
    let mut s = 0.0;
    for i in 0..3 {
        let d = (x[i] - c[i]).rem_euclid(l);
        let d = d.min(l - d);
        s += d * d;
    }
    s.sqrt()
}

/// `χ_ε(t, ·)` sampled on the grid.
pub fn singular_cutoff(
    grid: Grid,
    curve: &SingularCurve,
    spec: &MollifierSpec,
    t: f64,
) -> Result<SpectralField> {
    let eps = spec.epsilon;
    check_epsilon(eps)?;
    let center = curve.mollified_at(eps, t);
    Ok(SpectralField::from_fn(grid, Shape::Scalar, |x, o| {
        o[0] = cutoff_profile(torus_dist(x, center) / eps).0
    })
    .with_time(t))
}

/// `‖D^γ χ_ε(t, ·)‖_p` for `γ ∈ {0, 1, 2}` from the analytic profile
/// derivatives sampled on the grid (`|∇χ|` and the Frobenius norm of the
/// Hessian).
pub fn cutoff_derivative_norm(
    grid: Grid,
    curve: &SingularCurve,
    spec: &MollifierSpec,
    t: f64,
    gamma: u32,
    p: f64,
) -> Result<f64> {
    let eps = spec.epsilon;
    check_epsilon(eps)?;
    check_exponent("p", p)?;
    if gamma > 2 {
        return Err(Error::param("gamma", format!("derivative order must be 0, 1 or 2, got {gamma}")));
    }
    let center = curve.mollified_at(eps, t);
    let values: Vec<f64> = grid
        .points()
        .map(|x| {
            let rr = torus_dist(x, center);
            let (v, d1, d2) = cutoff_profile(rr / eps);
            match gamma {
                0 => v,
                1 => d1 / eps,
                _ => {
                    let f2 = d2 / (eps * eps);
                    let f1r = if rr > 0.0 { d1 / eps / rr } else { 0.0 };
                    (f2 * f2 + 2.0 * f1r * f1r).sqrt()
                }
            }
        })
        .collect();
    let h = grid.spacing();
    Ok(quadrature_lp(&values, h * h * h, p))
}
