use num_complex::Complex64;

use crate::error::Result;
use crate::field::ops::{lorentz, physical_many};
use crate::field::{magnitude, pairwise_sum, quadrature_lp, SpectralField};
use crate::littlewood_paley::{
    chi, kernel_convolve, lambda, shell_amplitudes, slope, Kernel, LpFamily, ShellAmplitudes,
};
use crate::table::{Cell, Table};

/// Truncated fluxes and their kernel bounds at one cutoff shell `Q`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FluxRow {
    pub q: i32,
    /// `H_Q = 2∫((∇×B)×B)_{≤Q}·B_{≤Q}`
    pub helicity_flux: f64,
    /// `Π_Q = ∫((∇×B)×B)_{≤Q}·(∇×B_{≤Q})`
    pub energy_flux: f64,
    /// `(K∗b²)(Q)`
    pub kernel_conv: f64,
    /// `(κ∗β²)(Q)`
    pub beta_conv: f64,
}

impl FluxRow {
    /// `(K∗b²)^{3/2}(Q)`
    pub fn kernel_bound(&self) -> f64 {
        self.kernel_conv.powf(1.5)
    }

    /// `(κ∗β²)^{3/2}(Q)`
    pub fn beta_bound(&self) -> f64 {
        self.beta_conv.powf(1.5)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FluxSpectrum {
    /// One row per `Q = -1..=Q_max`.
    pub rows: Vec<FluxRow>,
    pub amplitudes: ShellAmplitudes,
    /// `‖B‖₂³`, the natural size of a flux.
    pub scale: f64,
}

impl FluxSpectrum {
    /// Columns `Q, H_Q, Pi_Q, kernel_bound, beta_bound`.
    pub fn to_table(&self) -> Table {
        let mut t = Table::new(&["Q", "H_Q", "Pi_Q", "kernel_bound", "beta_bound"]);
        for r in &self.rows {
            t.push(vec![
                Cell::Int(r.q as i64),
                r.helicity_flux.into(),
                r.energy_flux.into(),
                r.kernel_bound().into(),
                r.beta_bound().into(),
            ]);
        }
        t
    }

    /// Smallest `C` with `|H_Q| ≤ C (K∗b²)^{3/2}(Q)` on every row; `None` when
    /// the bound vanishes on a row whose flux does not.
    pub fn c_fit(&self) -> Option<f64> {
        let mut c: f64 = 0.0;
        for r in &self.rows {
            let h = r.helicity_flux.abs();
            if h <= 1e-12 * self.scale {
                continue;
            }
            let bound = r.kernel_bound();
            if bound == 0.0 {
                return None;
            }
            c = c.max(h / bound);
        }
        Some(c)
    }

    /// Highest shell whose amplitude exceeds `1e-12` of the largest one.
    pub fn active_shell(&self) -> Option<i32> {
        let b = &self.amplitudes.b;
        let top = b.iter().cloned().fold(0.0, f64::max);
        b.iter()
            .rposition(|&v| v > 1e-12 * top && v > 0.0)
            .map(ShellAmplitudes::q_of)
    }

    /// Slope of `log₂(K∗b²)(Q)` against `Q` over the `octaves + 1` cutoffs
    /// directly above the active shell.
    pub fn kernel_tail_slope(&self, octaves: usize) -> Option<f64> {
        let qa = self.active_shell()?;
        let pts: Vec<(f64, f64)> = self
            .rows
            .iter()
            .filter(|r| r.q > qa && r.kernel_conv > 0.0)
            .take(octaves + 1)
            .map(|r| (r.q as f64, r.kernel_conv.log2()))
            .collect();
        (pts.len() == octaves + 1 && octaves > 0).then(|| slope(&pts))
    }
}

fn re_dot(a: [Complex64; 3], b: [Complex64; 3]) -> f64 {
    (a[0] * b[0].conj() + a[1] * b[1].conj() + a[2] * b[2].conj()).re
}

/// `H_Q`, `Π_Q` for `Q = -1..=q_max`, with the Lorentz force dealiased and the
/// integrals taken by Parseval against the low-pass symbol squared.
pub fn flux_spectrum(b: &SpectralField, q_max: i32) -> Result<FluxSpectrum> {
    b.check_vector("flux_spectrum")?;
    let g = b.grid();
    let lp = LpFamily::new(g);
    let l = lorentz(b)?;
    let modes = g.modes();
    // Per-mode Re(L̂·B̂*) and Re(L̂·Ĵ*) with Ĵ = i k×B̂.
    let mut rho = Vec::new();
    let mut hb = Vec::new();
    let mut pj = Vec::new();
    for idx in 0..g.len() {
        let lh = [l.comp(0)[idx], l.comp(1)[idx], l.comp(2)[idx]];
        if lh.iter().all(|c| c.norm_sqr() == 0.0) {
            continue;
        }
        let bh = [b.comp(0)[idx], b.comp(1)[idx], b.comp(2)[idx]];
        let k = modes.k[idx];
        let i = Complex64::i();
        let jh = [
            i * (bh[2] * k[1] - bh[1] * k[2]),
            i * (bh[0] * k[2] - bh[2] * k[0]),
            i * (bh[1] * k[0] - bh[0] * k[1]),
        ];
        rho.push(modes.ksq[idx].sqrt());
        hb.push(re_dot(lh, bh));
        pj.push(re_dot(lh, jh));
    }
    let amps = shell_amplitudes(b)?;
    let (b_sq, beta_sq) = (amps.b_sq(), amps.beta_sq());
    let v = g.volume();
    let mut rows = Vec::new();
    let mut wh = vec![0.0; rho.len()];
    let mut wp = vec![0.0; rho.len()];
    for q in -1..=q_max {
        for (i, &r) in rho.iter().enumerate() {
            let w = lp.low_pass_symbol(q, r).powi(2);
            wh[i] = w * hb[i];
            wp[i] = w * pj[i];
        }
        rows.push(FluxRow {
            q,
            helicity_flux: 2.0 * v * pairwise_sum(&wh),
            energy_flux: v * pairwise_sum(&wp),
            kernel_conv: kernel_convolve(&b_sq, Kernel::K, q),
            beta_conv: kernel_convolve(&beta_sq, Kernel::Kappa, q),
        });
    }
    let scale = b.l2_norm().powi(3);
    Ok(FluxSpectrum {
        rows,
        amplitudes: amps,
        scale,
    })
}

/// `∫w(y)(B(x−y)−B(x))⊗(B(x−y)−B(x))dy` for a kernel `w` of unit mass with
/// radial transform `symbol`, expanded as
/// `(B⊗B)_w − B_w⊗B − B⊗B_w + B⊗B`.
///
/// Evaluated on the twice-refined grid, where every product of the
/// dealiased input is represented exactly.
fn commutator<F: Fn(f64) -> f64>(b: &SpectralField, symbol: F) -> Result<SpectralField> {
    b.check_vector("commutator")?;
    let fine = b.grid().oversampled();
    let bf = b.padded(fine)?;
    let smooth = bf.apply_radial_multiplier(&symbol);
    let phys = physical_many(&[&bf, &smooth]);
    let (raw, low) = (&phys[0..3], &phys[3..6]);
    let len = fine.len();
    let mut bb = Vec::with_capacity(9);
    for i in 0..3 {
        for j in 0..3 {
            bb.push((0..len).map(|p| raw[i][p] * raw[j][p]).collect::<Vec<f64>>());
        }
    }
    let bb_low = SpectralField::from_physical(fine, &bb)?
        .apply_radial_multiplier(&symbol)
        .to_physical();
    let mut r = bb;
    for i in 0..3 {
        for j in 0..3 {
            let c = 3 * i + j;
            for p in 0..len {
                r[c][p] += bb_low[c][p] - low[i][p] * raw[j][p] - raw[i][p] * low[j][p];
            }
        }
    }
    Ok(SpectralField::from_physical(fine, &r)?.with_time(b.time()))
}

/// `r_Q(B,B)` with kernel `h̃_Q` whose transform is `χ(ξ/λ_{Q+1})`, the
/// low-pass symbol of [`low_pass`](crate::littlewood_paley::low_pass).
///
/// The result lives on the twice-refined grid. It vanishes identically once
/// the symbol equals one on every mode of `B⊗B`.
pub fn shell_commutator(b: &SpectralField, big_q: i32) -> Result<SpectralField> {
    if big_q < -1 {
        return Err(crate::Error::param(
            "Q",
            format!("shell index must be >= -1, got {big_q}"),
        ));
    }
    let scale = lambda(big_q + 1);
    commutator(b, |rho| chi(rho / scale))
}

/// `r_δ(B,B)` for the mollifier `η_δ`; lives on the twice-refined grid.
pub fn mollifier_commutator(b: &SpectralField, delta: f64) -> Result<SpectralField> {
    crate::field::mollifier::check_delta(delta)?;
    commutator(b, |rho| crate::field::mollifier::eta_hat(delta * rho))
}

/// `‖r‖_p` by quadrature on the grid `r` is stored on (already refined for
/// commutators).
pub fn commutator_norm(r: &SpectralField, p: f64) -> Result<f64> {
    crate::field::check_exponent("p", p)?;
    let h = r.grid().spacing();
    Ok(quadrature_lp(&magnitude(&r.to_physical()), h * h * h, p))
}
