//! Inhomogeneous Littlewood–Paley decomposition on the torus.
//!
//! `χ(ρ) = 1` for `ρ ≤ 3/4`, `χ(ρ) = 0` for `ρ ≥ 1`, with the quintic
//! smoothstep in between. Shells are `φ_{-1} = χ` and
//! `φ_q(ρ) = χ(ρ/2^{q+1}) - χ(ρ/2^q)` for `q ≥ 0`, so
//! `Σ_{q ≤ Q} φ_q = χ(ρ/2^{Q+1})` telescopes exactly.

use std::collections::HashMap;
use std::sync::Mutex;

use crate::error::{Error, Result};
use crate::field::ops::{gradient, gradient_tensor};
use crate::field::{check_exponent, lp_norm, Grid, SpectralField};
use crate::quadrature::trapezoid;
use crate::table::{Cell, Table};

/// Low-pass symbol `χ`.
pub fn chi(rho: f64) -> f64 {
    if rho <= 0.75 {
        1.0
    } else if rho >= 1.0 {
        0.0
    } else {
        let t = (rho - 0.75) * 4.0;
        1.0 - t * t * t * (10.0 - 15.0 * t + 6.0 * t * t)
    }
}

/// `λ_q = 2^q`, so `λ_{-1} = 1/2`.
#[inline]
pub fn lambda(q: i32) -> f64 {
    2f64.powi(q)
}

/// The dyadic partition matched to one grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LpFamily {
    q_max: i32,
}

impl LpFamily {
    /// `q_max = ceil(log₂ cutoff) + 1`, raised if needed so that
    /// `Σ_{q ≤ q_max} φ_q = 1` on every grid wavenumber (the corner of the
    /// grid cube sits at `|ξ| = √3·n/2`).
    pub fn new(grid: Grid) -> Self {
        let cutoff = grid.dealias_cutoff() as f64;
        let mut q_max = cutoff.log2().ceil() as i32 + 1;
        let corner = 3f64.sqrt() * (grid.n() / 2) as f64;
        while 0.75 * lambda(q_max + 1) < corner {
            q_max += 1;
        }
        LpFamily { q_max }
    }

    #[inline]
    pub fn q_max(&self) -> i32 {
        self.q_max
    }

    pub fn shells(&self) -> std::ops::RangeInclusive<i32> {
        -1..=self.q_max
    }

    pub fn shell_count(&self) -> usize {
        (self.q_max + 2) as usize
    }

    /// `φ_q(ρ)`; zero for `q > q_max`.
    pub fn phi(&self, q: i32, rho: f64) -> f64 {
        if q > self.q_max || q < -1 {
            0.0
        } else if q == -1 {
            chi(rho)
        } else {
            chi(rho / lambda(q + 1)) - chi(rho / lambda(q))
        }
    }

    /// `Σ_{q ≤ Q} φ_q(ρ) = χ(ρ/2^{Q+1})`.
    pub fn low_pass_symbol(&self, big_q: i32, rho: f64) -> f64 {
        if big_q < -1 {
            0.0
        } else {
            chi(rho / lambda(big_q.min(self.q_max) + 1))
        }
    }

    /// `Σ_{q_lo ≤ q ≤ q_hi} φ_q(ρ)`.
    pub fn band_symbol(&self, q_lo: i32, q_hi: i32, rho: f64) -> f64 {
        self.low_pass_symbol(q_hi, rho) - self.low_pass_symbol(q_lo - 1, rho)
    }

    /// Whether `ρ` lies in the open support of `φ_q`.
    fn in_open_support(q: i32, rho: f64) -> bool {
        if q == -1 {
            rho < 1.0
        } else {
            rho > 0.75 * lambda(q) && rho < lambda(q + 1)
        }
    }
}

fn check_shell(j: i32) -> Result<()> {
    if j < -1 {
        return Err(Error::param("j", format!("shell index must be >= -1, got {j}")));
    }
    Ok(())
}

/// `Δ_j F`.
pub fn project_shell(f: &SpectralField, j: i32) -> Result<SpectralField> {
    check_shell(j)?;
    let lp = LpFamily::new(f.grid());
    Ok(f.apply_radial_multiplier(|rho| lp.phi(j, rho)))
}

/// `F_{≤Q} = Σ_{q ≤ Q} Δ_q F`.
pub fn low_pass(f: &SpectralField, big_q: i32) -> SpectralField {
    let lp = LpFamily::new(f.grid());
    f.apply_radial_multiplier(|rho| lp.low_pass_symbol(big_q, rho))
}

/// All shells `Δ_q F` for `q = -1..=q_max`.
#[derive(Debug)]
pub struct DyadicDecomposition {
    family: LpFamily,
    shells: Vec<SpectralField>,
    norms: Mutex<HashMap<u64, Vec<f64>>>,
}

impl DyadicDecomposition {
    pub fn new(f: &SpectralField) -> Self {
        let family = LpFamily::new(f.grid());
        let shells = family
            .shells()
            .map(|q| f.apply_radial_multiplier(|rho| family.phi(q, rho)))
            .collect();
        DyadicDecomposition {
            family,
            shells,
            norms: Mutex::new(HashMap::new()),
        }
    }

    pub fn family(&self) -> LpFamily {
        self.family
    }

    /// `Δ_q F`, or `None` outside `-1..=q_max`.
    pub fn shell(&self, q: i32) -> Option<&SpectralField> {
        if q < -1 {
            return None;
        }
        self.shells.get((q + 1) as usize)
    }

    pub fn shells(&self) -> &[SpectralField] {
        &self.shells
    }

    pub fn reconstruct(&self) -> SpectralField {
        let mut out = self.shells[0].clone();
        for s in &self.shells[1..] {
            out.add_scaled(1.0, s);
        }
        out
    }

    /// `‖Δ_q F‖_p` for every shell, cached per exponent.
    pub fn shell_norms(&self, p: f64) -> Result<Vec<f64>> {
        check_exponent("p", p)?;
        let key = p.to_bits();
        if let Some(v) = self.norms.lock().expect("norm cache").get(&key) {
            return Ok(v.clone());
        }
        let v = self
            .shells
            .iter()
            .map(|s| lp_norm(s, p))
            .collect::<Result<Vec<_>>>()?;
        self.norms.lock().expect("norm cache").insert(key, v.clone());
        Ok(v)
    }
}

/// Exponents of `B^s_{p,q}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BesovSpec {
    pub s: f64,
    pub p: f64,
    pub q: f64,
}

impl BesovSpec {
    pub fn new(s: f64, p: f64, q: f64) -> Result<Self> {
        if !s.is_finite() {
            return Err(Error::param("s", format!("smoothness must be finite, got {s}")));
        }
        check_exponent("p", p)?;
        check_exponent("q", q)?;
        Ok(BesovSpec { s, p, q })
    }

    /// Parses `s:p:q` with `inf` allowed for `p` and `q`.
    pub fn parse(text: &str) -> Result<Self> {
        let parts: Vec<&str> = text.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::param("besov", format!("expected s:p:q, got `{text}`")));
        }
        let num = |s: &str| -> Result<f64> {
            match s.trim() {
                "inf" | "∞" | "infinity" => Ok(f64::INFINITY),
                t => t
                    .parse::<f64>()
                    .map_err(|_| Error::param("besov", format!("`{t}` is not a number"))),
            }
        };
        Self::new(num(parts[0])?, num(parts[1])?, num(parts[2])?)
    }

    /// `2^{sj}‖Δ_j F‖_p` per shell.
    pub fn weighted(&self, norms: &[f64]) -> Vec<f64> {
        norms
            .iter()
            .enumerate()
            .map(|(i, n)| 2f64.powf(self.s * (i as f64 - 1.0)) * n)
            .collect()
    }

    /// ℓ^q aggregation of the weighted shell norms.
    pub fn aggregate(&self, norms: &[f64]) -> f64 {
        let w = self.weighted(norms);
        if self.q.is_infinite() {
            w.into_iter().fold(0.0, f64::max)
        } else {
            w.iter().map(|v| v.powf(self.q)).sum::<f64>().powf(1.0 / self.q)
        }
    }
}

pub fn besov_norm(f: &SpectralField, spec: &BesovSpec) -> Result<f64> {
    besov_norm_of(&DyadicDecomposition::new(f), spec)
}

pub fn besov_norm_of(d: &DyadicDecomposition, spec: &BesovSpec) -> Result<f64> {
    Ok(spec.aggregate(&d.shell_norms(spec.p)?))
}

fn check_time_exponent(q_time: f64) -> Result<()> {
    check_exponent("q_time", q_time)
}

/// `(∫ v(t)^{q_time} dt)^{1/q_time}` by the trapezoid rule; `∞` gives the max.
pub fn time_norm(times: &[f64], values: &[f64], q_time: f64) -> Result<f64> {
    check_time_exponent(q_time)?;
    if times.len() < 2 || times.len() != values.len() {
        return Err(Error::param(
            "snapshots",
            format!("a time norm needs at least 2 samples, got {}", times.len()),
        ));
    }
    if q_time.is_infinite() {
        return Ok(values.iter().cloned().fold(0.0, f64::max));
    }
    let powered: Vec<f64> = values.iter().map(|v| v.powf(q_time)).collect();
    Ok(trapezoid(times, &powered).powf(1.0 / q_time))
}

/// `‖F‖_{L^{q_time}(B^s_{p,q})}` over the snapshot times.
pub fn besov_time_norm(snapshots: &[SpectralField], q_time: f64, spec: &BesovSpec) -> Result<f64> {
    check_time_exponent(q_time)?;
    if snapshots.len() < 2 {
        return Err(Error::param(
            "snapshots",
            format!("a time norm needs at least 2 snapshots, got {}", snapshots.len()),
        ));
    }
    let times: Vec<f64> = snapshots.iter().map(|s| s.time()).collect();
    let values = snapshots
        .iter()
        .map(|s| besov_norm(s, spec))
        .collect::<Result<Vec<_>>>()?;
    time_norm(&times, &values, q_time)
}

/// `F = F^ℓ + F^h` with the two diagnostics entering the low/high estimate.
#[derive(Clone, Debug)]
pub struct LowHigh {
    pub cutoff: i32,
    pub low: SpectralField,
    pub high: SpectralField,
    /// `‖∇F^ℓ‖_∞` (Frobenius norm of the gradient for vector fields).
    pub grad_low_inf: f64,
    /// `‖F^h‖_{p'}`.
    pub high_norm: f64,
}

pub fn decompose_low_high(f: &SpectralField, big_q: i32, p_prime: f64) -> Result<LowHigh> {
    check_shell(big_q)?;
    check_exponent("p_prime", p_prime)?;
    let low = low_pass(f, big_q);
    let high = f - &low;
    let grad = if f.is_scalar() {
        gradient(&low)?
    } else {
        gradient_tensor(&low)?
    };
    Ok(LowHigh {
        cutoff: big_q,
        grad_low_inf: lp_norm(&grad, f64::INFINITY)?,
        high_norm: lp_norm(&high, p_prime)?,
        low,
        high,
    })
}

/// Heuristic cutoff: the `Q` minimizing `‖∇F^ℓ‖_∞ + ‖F^h‖_{p'}^{q'}`.
pub fn auto_low_high(f: &SpectralField, p_prime: f64, q_prime: f64) -> Result<LowHigh> {
    check_exponent("q_prime", q_prime)?;
    let lp = LpFamily::new(f.grid());
    let mut best: Option<(f64, LowHigh)> = None;
    for q in lp.shells() {
        let d = decompose_low_high(f, q, p_prime)?;
        let cost = d.grad_low_inf + d.high_norm.powf(q_prime);
        if best.as_ref().is_none_or(|(c, _)| cost < *c) {
            best = Some((cost, d));
        }
    }
    Ok(best.expect("at least one shell").1)
}

/// Per-shell amplitudes `b_q = λ_q^{1/3}‖Δ_q B‖₃`, `β_q = λ_q^{2/3}‖Δ_q B‖₃`.
#[derive(Clone, Debug, PartialEq)]
pub struct ShellAmplitudes {
    /// Index 0 is shell `-1`.
    pub shell_l2: Vec<f64>,
    pub shell_l3: Vec<f64>,
    pub b: Vec<f64>,
    pub beta: Vec<f64>,
}

impl ShellAmplitudes {
    pub fn q_of(i: usize) -> i32 {
        i as i32 - 1
    }

    pub fn b_sq(&self) -> Vec<f64> {
        self.b.iter().map(|v| v * v).collect()
    }

    pub fn beta_sq(&self) -> Vec<f64> {
        self.beta.iter().map(|v| v * v).collect()
    }

    /// Columns `q, lambda_q, shell_l2, shell_l3, b_q, beta_q`.
    pub fn to_table(&self) -> Table {
        let mut t = Table::new(&["q", "lambda_q", "shell_l2", "shell_l3", "b_q", "beta_q"]);
        for i in 0..self.b.len() {
            let q = Self::q_of(i);
            t.push(vec![
                Cell::Int(q as i64),
                lambda(q).into(),
                self.shell_l2[i].into(),
                self.shell_l3[i].into(),
                self.b[i].into(),
                self.beta[i].into(),
            ]);
        }
        t
    }
}

pub fn shell_amplitudes(f: &SpectralField) -> Result<ShellAmplitudes> {
    shell_amplitudes_of(&DyadicDecomposition::new(f))
}

pub fn shell_amplitudes_of(d: &DyadicDecomposition) -> Result<ShellAmplitudes> {
    let l2 = d.shell_norms(2.0)?;
    let l3 = d.shell_norms(3.0)?;
    let mut b = Vec::with_capacity(l3.len());
    let mut beta = Vec::with_capacity(l3.len());
    for (i, n) in l3.iter().enumerate() {
        let lq = lambda(ShellAmplitudes::q_of(i));
        b.push(lq.cbrt() * n);
        beta.push(lq.cbrt() * lq.cbrt() * n);
    }
    Ok(ShellAmplitudes {
        shell_l2: l2,
        shell_l3: l3,
        b,
        beta,
    })
}

/// Localization kernels of the flux estimates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kernel {
    /// `K(m) = λ_m^{2/3}` for `m ≤ 0`, `λ_m^{-4/3}` for `m > 0`.
    K,
    /// `κ(m) = λ_m^{4/3}` for `m ≤ 0`, `λ_m^{-2/3}` for `m > 0`.
    Kappa,
}

impl Kernel {
    pub fn value(self, m: i32) -> f64 {
        let (neg, pos) = match self {
            Kernel::K => (2.0 / 3.0, -4.0 / 3.0),
            Kernel::Kappa => (4.0 / 3.0, -2.0 / 3.0),
        };
        let e = if m <= 0 { neg } else { pos };
        2f64.powf(e * m as f64)
    }
}

/// `Σ_q kernel(Q - q)·amps_sq[q]`, with `amps_sq[0]` belonging to shell `-1`.
pub fn kernel_convolve(amps_sq: &[f64], kernel: Kernel, big_q: i32) -> f64 {
    amps_sq
        .iter()
        .enumerate()
        .map(|(i, a)| kernel.value(big_q - ShellAmplitudes::q_of(i)) * a)
        .sum()
}

/// The unique shell whose open support holds every nonzero mode; ties go to
/// the lowest shell.
pub fn shell_of(f: &SpectralField) -> Option<i32> {
    let g = f.grid();
    let lp = LpFamily::new(g);
    let thresh = 1e-14 * f.max_abs_coeff();
    let mut radii = Vec::new();
    for idx in 0..g.len() {
        if f.comps().iter().any(|c| c[idx].norm() > thresh) {
            radii.push(g.k_norm_sq(idx).sqrt());
        }
    }
    if radii.is_empty() {
        return None;
    }
    lp.shells()
        .find(|&q| radii.iter().all(|&r| LpFamily::in_open_support(q, r)))
}

/// `‖F‖_r / (λ_q^{3(1/s - 1/r)}‖F‖_s)` for a field living in shell `q`.
pub fn bernstein_margin(f: &SpectralField, s: f64, r: f64) -> Result<f64> {
    check_exponent("s", s)?;
    check_exponent("r", r)?;
    if r < s {
        return Err(Error::param("r", format!("need r >= s, got s={s}, r={r}")));
    }
    let Some(q) = shell_of(f) else {
        return Err(Error::Precondition(
            "field is zero or not supported in a single dyadic shell".into(),
        ));
    };
    if r == s {
        return Ok(1.0);
    }
    let scale = lambda(q).powf(3.0 * (1.0 / s - 1.0 / r));
    Ok(lp_norm(f, r)? / (scale * lp_norm(f, s)?))
}

/// Least-squares slope of `log₂(2^{sj}‖Δ_j F‖_p)` against `j` over the last
/// `window` nonzero shells. Negative slopes indicate the vanishing tail that
/// characterizes membership in the closure `B^s_{p,c(ℕ)}`.
pub fn besov_tail_slope(f: &SpectralField, spec: &BesovSpec, window: usize) -> Result<Option<f64>> {
    let d = DyadicDecomposition::new(f);
    let w = spec.weighted(&d.shell_norms(spec.p)?);
    let scale = w.iter().cloned().fold(0.0, f64::max);
    let pts: Vec<(f64, f64)> = w
        .iter()
        .enumerate()
        .filter(|(_, v)| **v > 1e-13 * scale && **v > 0.0)
        .map(|(i, v)| (ShellAmplitudes::q_of(i) as f64, v.log2()))
        .collect();
    if pts.len() < window.max(2) {
        return Ok(None);
    }
    Ok(Some(slope(&pts[pts.len() - window.max(2)..])))
}

/// Least-squares slope through `(x, y)` pairs.
pub fn slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}
