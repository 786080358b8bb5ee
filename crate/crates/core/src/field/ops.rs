//! Differential operators, dealiased products and the Hall nonlinearity.
//!
//! Derivatives are exact Fourier multipliers. Products are formed pointwise on
//! the native grid and truncated to the two-thirds cube afterwards, which makes
//! the retained modes of any quadratic product exact.

use num_complex::Complex64;

use super::grid::Grid;
use super::norms::magnitude;
use super::spectral::{Shape, SpectralField};
use crate::error::{Error, Result};
use crate::fft;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// `∇×F`, computed mode-wise as `ik × F̂(k)`.
pub fn curl(f: &SpectralField) -> Result<SpectralField> {
    f.check_vector("curl")?;
    let g = f.grid();
    let modes = g.modes();
    let (fx, fy, fz) = (f.comp(0), f.comp(1), f.comp(2));
    let mut cx = Vec::with_capacity(g.len());
    let mut cy = Vec::with_capacity(g.len());
    let mut cz = Vec::with_capacity(g.len());
    for (idx, k) in modes.k.iter().enumerate() {
        cx.push(I * (fz[idx] * k[1] - fy[idx] * k[2]));
        cy.push(I * (fx[idx] * k[2] - fz[idx] * k[0]));
        cz.push(I * (fy[idx] * k[0] - fx[idx] * k[1]));
    }
    Ok(SpectralField::from_coeffs(g, vec![cx, cy, cz])?.with_time(f.time()))
}

/// `∇·F` as a scalar field.
pub fn divergence(f: &SpectralField) -> Result<SpectralField> {
    f.check_vector("divergence")?;
    let g = f.grid();
    let modes = g.modes();
    let mut out = SpectralField::scalar_zeros(g).with_time(f.time());
    let d = out.comp_mut(0);
    for (idx, v) in d.iter_mut().enumerate() {
        let k = modes.k[idx];
        *v = I * (f.comp(0)[idx] * k[0] + f.comp(1)[idx] * k[1] + f.comp(2)[idx] * k[2]);
    }
    Ok(out)
}

/// `∇φ` of a scalar field.
pub fn gradient(phi: &SpectralField) -> Result<SpectralField> {
    phi.check_scalar("gradient")?;
    let g = phi.grid();
    let modes = g.modes();
    let mut out = SpectralField::vector_zeros(g).with_time(phi.time());
    for idx in 0..g.len() {
        let k = modes.k[idx];
        let v = phi.comp(0)[idx];
        for (c, kc) in k.iter().enumerate() {
            out.comp_mut(c)[idx] = I * v * *kc;
        }
    }
    Ok(out)
}

/// `∇F` of a vector field as a tensor with component `3i + j = ∂_j F_i`.
pub fn gradient_tensor(f: &SpectralField) -> Result<SpectralField> {
    f.check_vector("gradient_tensor")?;
    let g = f.grid();
    let modes = g.modes();
    let mut out = SpectralField::zeros(g, Shape::Tensor).with_time(f.time());
    for idx in 0..g.len() {
        let k = modes.k[idx];
        for i in 0..3 {
            let v = f.comp(i)[idx];
            for (j, kj) in k.iter().enumerate() {
                out.comp_mut(3 * i + j)[idx] = I * v * *kj;
            }
        }
    }
    Ok(out)
}

/// Row divergence `(∇·T)_i = Σ_j ∂_j T_ij`.
pub fn tensor_divergence(t: &SpectralField) -> Result<SpectralField> {
    if t.shape() != Shape::Tensor {
        return Err(Error::Shape("tensor_divergence needs a 9-component field".into()));
    }
    let g = t.grid();
    let modes = g.modes();
    let mut out = SpectralField::vector_zeros(g).with_time(t.time());
    for idx in 0..g.len() {
        let k = modes.k[idx];
        for i in 0..3 {
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, kj) in k.iter().enumerate() {
                acc += I * t.comp(3 * i + j)[idx] * *kj;
            }
            out.comp_mut(i)[idx] = acc;
        }
    }
    Ok(out)
}

pub fn laplacian(f: &SpectralField) -> SpectralField {
    f.apply_multiplier(|k| -((k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64))
}

/// Solves `ΔU = F` for zero-mean `F`; the result has zero mean.
pub fn inverse_laplacian(f: &SpectralField) -> Result<SpectralField> {
    check_zero_mean(f)?;
    Ok(f.apply_multiplier(|k| {
        let ksq = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64;
        if ksq == 0.0 {
            0.0
        } else {
            -1.0 / ksq
        }
    }))
}

/// Orthogonal projection onto divergence-free fields, `F̂ - k(k·F̂)/|k|²`.
pub fn leray_project(f: &SpectralField) -> Result<SpectralField> {
    f.check_vector("leray_project")?;
    let g = f.grid();
    let modes = g.modes();
    let mut out = f.clone();
    for idx in 1..g.len() {
        let k = modes.k[idx];
        let ksq = modes.ksq[idx];
        let kdotf = f.comp(0)[idx] * k[0] + f.comp(1)[idx] * k[1] + f.comp(2)[idx] * k[2];
        for (c, kc) in k.iter().enumerate() {
            out.comp_mut(c)[idx] -= kdotf * (*kc / ksq);
        }
    }
    Ok(out)
}

fn check_zero_mean(f: &SpectralField) -> Result<()> {
    let mean = f.mean().iter().map(|v| v.norm()).fold(0.0, f64::max);
    let scale = f.max_abs_coeff();
    if mean > 1e-12 * scale.max(1.0) {
        return Err(Error::Gauge(mean));
    }
    Ok(())
}

/// Coulomb-gauge vector potential `A = ∇×(-Δ)⁻¹B`.
///
/// For divergence-free, zero-mean `B` the result satisfies `∇×A = B`,
/// `∇·A = 0` and has zero mean.
pub fn biot_savart(b: &SpectralField) -> Result<SpectralField> {
    b.check_vector("biot_savart")?;
    check_zero_mean(b)?;
    let g = b.grid();
    let modes = g.modes();
    let mut out = SpectralField::vector_zeros(g).with_time(b.time());
    for idx in 1..g.len() {
        let k = modes.k[idx];
        let ksq = modes.ksq[idx];
        let (bx, by, bz) = (b.comp(0)[idx], b.comp(1)[idx], b.comp(2)[idx]);
        out.comp_mut(0)[idx] = I * (bz * k[1] - by * k[2]) / ksq;
        out.comp_mut(1)[idx] = I * (bx * k[2] - bz * k[0]) / ksq;
        out.comp_mut(2)[idx] = I * (by * k[0] - bx * k[1]) / ksq;
    }
    Ok(out)
}

/// Physical samples of all components of several fields, transformed jointly.
pub(crate) fn physical_many(fields: &[&SpectralField]) -> Vec<Vec<f64>> {
    let n = fields[0].grid().n();
    let refs: Vec<&[Complex64]> = fields
        .iter()
        .flat_map(|f| f.comps().iter().map(|c| c.as_slice()))
        .collect();
    fft::synthesize_real(n, &refs)
}

/// Transforms products back and truncates to the two-thirds cube.
pub(crate) fn spectral_dealiased(grid: Grid, values: &[Vec<f64>], time: f64) -> SpectralField {
    let refs: Vec<&[f64]> = values.iter().map(|v| v.as_slice()).collect();
    SpectralField::from_coeffs(grid, fft::analyze_real(grid.n(), &refs))
        .expect("product shapes are 1, 3 or 9")
        .dealiased()
        .with_time(time)
}

fn cross_pointwise(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let len = a[0].len();
    let mut out = vec![vec![0.0; len]; 3];
    for i in 0..len {
        out[0][i] = a[1][i] * b[2][i] - a[2][i] * b[1][i];
        out[1][i] = a[2][i] * b[0][i] - a[0][i] * b[2][i];
        out[2][i] = a[0][i] * b[1][i] - a[1][i] * b[0][i];
    }
    out
}

/// Dealiased `A × B`.
pub fn cross(a: &SpectralField, b: &SpectralField) -> Result<SpectralField> {
    a.check_vector("cross")?;
    b.check_vector("cross")?;
    a.check_same_grid(b)?;
    let phys = physical_many(&[a, b]);
    let prod = cross_pointwise(&phys[0..3], &phys[3..6]);
    Ok(spectral_dealiased(a.grid(), &prod, a.time()))
}

/// Dealiased `A · B`.
pub fn dot(a: &SpectralField, b: &SpectralField) -> Result<SpectralField> {
    if a.ncomp() != b.ncomp() {
        return Err(Error::Shape("dot needs matching component counts".into()));
    }
    a.check_same_grid(b)?;
    let m = a.ncomp();
    let phys = physical_many(&[a, b]);
    let len = a.grid().len();
    let mut s = vec![0.0; len];
    for c in 0..m {
        for i in 0..len {
            s[i] += phys[c][i] * phys[m + c][i];
        }
    }
    Ok(spectral_dealiased(a.grid(), &[s], a.time()))
}

/// Dealiased `φ F` for scalar `φ` and any `F`.
pub fn scalar_product(phi: &SpectralField, f: &SpectralField) -> Result<SpectralField> {
    phi.check_scalar("scalar_product")?;
    phi.check_same_grid(f)?;
    let phys = physical_many(&[phi, f]);
    let prod: Vec<Vec<f64>> = phys[1..]
        .iter()
        .map(|c| c.iter().zip(phys[0].iter()).map(|(x, p)| x * p).collect())
        .collect();
    Ok(spectral_dealiased(f.grid(), &prod, f.time()))
}

/// Dealiased tensor product with component `3i + j = A_i B_j`.
pub fn outer(a: &SpectralField, b: &SpectralField) -> Result<SpectralField> {
    a.check_vector("outer")?;
    b.check_vector("outer")?;
    a.check_same_grid(b)?;
    let phys = physical_many(&[a, b]);
    let mut prod = Vec::with_capacity(9);
    for i in 0..3 {
        for j in 0..3 {
            prod.push(
                phys[i]
                    .iter()
                    .zip(phys[3 + j].iter())
                    .map(|(x, y)| x * y)
                    .collect(),
            );
        }
    }
    Ok(spectral_dealiased(a.grid(), &prod, a.time()))
}

/// Dealiased `(A·∇)B`, i.e. `Σ_j A_j ∂_j B_i`.
pub fn advect(a: &SpectralField, b: &SpectralField) -> Result<SpectralField> {
    a.check_vector("advect")?;
    let gb = gradient_tensor(b)?;
    a.check_same_grid(b)?;
    let phys = physical_many(&[a, &gb]);
    let len = a.grid().len();
    let mut prod = vec![vec![0.0; len]; 3];
    for (i, out) in prod.iter_mut().enumerate() {
        for j in 0..3 {
            let aj = &phys[j];
            let dj = &phys[3 + 3 * i + j];
            for p in 0..len {
                out[p] += aj[p] * dj[p];
            }
        }
    }
    Ok(spectral_dealiased(a.grid(), &prod, a.time()))
}

/// Dealiased `(∇×B)×B` (the Lorentz form) together with its curl.
///
/// Returns `(lorentz, hall)`; `hall = ∇×lorentz` is the Hall term of the
/// electron-MHD induction equation without the `d_i` factor.
pub fn hall_nonlinearity(b: &SpectralField) -> Result<(SpectralField, SpectralField)> {
    let lorentz = lorentz(b)?;
    let hall = curl(&lorentz)?;
    Ok((lorentz, hall))
}

/// Dealiased `(∇×B)×B`.
pub fn lorentz(b: &SpectralField) -> Result<SpectralField> {
    b.check_vector("hall_nonlinearity")?;
    let j = curl(b)?;
    let phys = physical_many(&[&j, b]);
    let prod = cross_pointwise(&phys[0..3], &phys[3..6]);
    Ok(spectral_dealiased(b.grid(), &prod, b.time()))
}

fn relative(lhs: &SpectralField, rhs: &SpectralField) -> f64 {
    let scale = lhs.l2_norm().max(rhs.l2_norm());
    if scale == 0.0 {
        return 0.0;
    }
    (lhs - rhs).l2_norm() / scale
}

/// `‖(∇×B)×B − ∇·(B⊗B) + ½∇|B|²‖₂` with both sides formed independently.
pub fn identity_residual(b: &SpectralField) -> Result<f64> {
    let lhs = lorentz(b)?;
    let div_bb = tensor_divergence(&outer(b, b)?)?;
    let half_grad = &gradient(&dot(b, b)?)? * 0.5;
    let rhs = &div_bb - &half_grad;
    Ok((&lhs - &rhs).l2_norm())
}

/// Relative residuals of the product-rule identities for a scalar `φ` and
/// vector fields `A`, `B`.
#[derive(Clone, Copy, Debug)]
pub struct VectorIdentityResiduals {
    /// `∇(φA) = ∇φ⊗A + φ∇A`
    pub grad_scalar_product: f64,
    /// `∇·(φA) = ∇φ·A + φ∇·A`
    pub div_scalar_product: f64,
    /// `∇×(φA) = φ∇×A + ∇φ×A`
    pub curl_scalar_product: f64,
    /// `∇×(A×B) = A(∇·B) − B(∇·A) + (B·∇)A − (A·∇)B`
    pub curl_cross: f64,
    /// `(∇×A)×B = A×(∇×B) + (A·∇)B + (B·∇)A − ∇(A·B)`
    pub curl_cross_swap: f64,
    /// `max |(A×B)·A| / (‖A‖∞ ‖B‖∞)` on the grid.
    pub cross_orthogonality: f64,
}

impl VectorIdentityResiduals {
    pub fn max(&self) -> f64 {
        [
            self.grad_scalar_product,
            self.div_scalar_product,
            self.curl_scalar_product,
            self.curl_cross,
            self.curl_cross_swap,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

pub fn vector_identity_residuals(
    phi: &SpectralField,
    a: &SpectralField,
    b: &SpectralField,
) -> Result<VectorIdentityResiduals> {
    phi.check_scalar("vector identities")?;
    a.check_vector("vector identities")?;
    b.check_vector("vector identities")?;
    let grad_phi = gradient(phi)?;

    // ∇(φA): the tensor convention here is 3i + j = ∂_j (φA_i), so ∇φ⊗A
    // enters as A_i ∂_jφ.
    let phi_a = scalar_product(phi, a)?;
    let lhs1 = gradient_tensor(&phi_a)?;
    let rhs1 = &outer(a, &grad_phi)? + &scalar_product(phi, &gradient_tensor(a)?)?;

    let lhs2 = divergence(&phi_a)?;
    let rhs2 = &dot(&grad_phi, a)? + &scalar_product(phi, &divergence(a)?)?;

    let lhs3 = curl(&phi_a)?;
    let rhs3 = &scalar_product(phi, &curl(a)?)? + &cross(&grad_phi, a)?;

    let lhs4 = curl(&cross(a, b)?)?;
    let rhs4 = {
        let t1 = scalar_product(&divergence(b)?, a)?;
        let t2 = scalar_product(&divergence(a)?, b)?;
        let t3 = advect(b, a)?;
        let t4 = advect(a, b)?;
        &(&(&t1 - &t2) + &t3) - &t4
    };

    let lhs5 = cross(&curl(a)?, b)?;
    let rhs5 = {
        let t1 = cross(a, &curl(b)?)?;
        let t2 = advect(a, b)?;
        let t3 = advect(b, a)?;
        let t4 = gradient(&dot(a, b)?)?;
        &(&(&t1 + &t2) + &t3) - &t4
    };

    let phys = physical_many(&[a, b]);
    let axb = cross_pointwise(&phys[0..3], &phys[3..6]);
    let mut worst: f64 = 0.0;
    for i in 0..a.grid().len() {
        let d = axb[0][i] * phys[0][i] + axb[1][i] * phys[1][i] + axb[2][i] * phys[2][i];
        worst = worst.max(d.abs());
    }
    let amax = magnitude(&phys[0..3]).into_iter().fold(0.0, f64::max);
    let bmax = magnitude(&phys[3..6]).into_iter().fold(0.0, f64::max);
    let orth = if amax * bmax > 0.0 {
        worst / (amax * bmax)
    } else {
        0.0
    };

    Ok(VectorIdentityResiduals {
        grad_scalar_product: relative(&lhs1, &rhs1),
        div_scalar_product: relative(&lhs2, &rhs2),
        curl_scalar_product: relative(&lhs3, &rhs3),
        curl_cross: relative(&lhs4, &rhs4),
        curl_cross_swap: relative(&lhs5, &rhs5),
        cross_orthogonality: orth,
    })
}
