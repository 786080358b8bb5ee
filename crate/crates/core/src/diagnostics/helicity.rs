use crate::error::{Error, Result};
use crate::field::ops::{biot_savart, curl, divergence, gradient, gradient_tensor, inverse_laplacian, laplacian, physical_many};
use crate::field::{Grid, Shape, SpectralField};
use crate::quadrature::cumulative_trapezoid;
use crate::solver::Trajectory;

/// `φ(x, t) = s(x)·p(t)` with a band-limited scalar `s` and a polynomial `p`.
#[derive(Clone, Debug, PartialEq)]
pub struct TestFunction {
    spatial: SpectralField,
    /// `p(t) = Σ c_j t^j`
    envelope: Vec<f64>,
}

impl TestFunction {
    pub fn new(spatial: SpectralField, envelope: Vec<f64>) -> Result<Self> {
        spatial.check_scalar("test function")?;
        if envelope.is_empty() || envelope.iter().any(|c| !c.is_finite()) {
            return Err(Error::param("envelope", "need at least one finite coefficient"));
        }
        if spatial.hermitian_defect() > 1e-12 * spatial.max_abs_coeff() {
            return Err(Error::param("spatial", "test function must be real-valued"));
        }
        Ok(TestFunction { spatial, envelope })
    }

    /// `φ ≡ 1`.
    pub fn constant(grid: Grid) -> Self {
        let mut s = SpectralField::scalar_zeros(grid);
        s.set_coeff(0, [0, 0, 0], 1.0.into());
        TestFunction {
            spatial: s,
            envelope: vec![1.0],
        }
    }

    /// `(1 + cos x₁ cos x₂)(1 − t/T)²`.
    pub fn standard(grid: Grid, t_end: f64) -> Result<Self> {
        if !(t_end > 0.0 && t_end.is_finite()) {
            return Err(Error::param("t_end", format!("must be positive, got {t_end}")));
        }
        let s = SpectralField::from_fn(grid, Shape::Scalar, |x, o| {
            o[0] = 1.0 + x[0].cos() * x[1].cos();
        });
        TestFunction::new(s, vec![1.0, -2.0 / t_end, 1.0 / (t_end * t_end)])
    }

    pub fn spatial(&self) -> &SpectralField {
        &self.spatial
    }

    pub fn envelope(&self, t: f64) -> f64 {
        self.envelope.iter().rev().fold(0.0, |acc, c| acc * t + c)
    }

    pub fn envelope_dt(&self, t: f64) -> f64 {
        self.envelope
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(0.0, |acc, (j, c)| acc * t + j as f64 * c)
    }

    pub fn value_at(&self, x: [f64; 3], t: f64) -> f64 {
        self.spatial.evaluate_at(x)[0] * self.envelope(t)
    }

    /// `φ_t` as a field at time `t`.
    pub fn time_derivative(&self, t: f64) -> SpectralField {
        &self.spatial * self.envelope_dt(t)
    }

    /// `Δφ` at time `t`.
    pub fn laplacian(&self, t: f64) -> SpectralField {
        &laplacian(&self.spatial) * self.envelope(t)
    }

    /// `∇φ` at time `t`.
    pub fn gradient(&self, t: f64) -> SpectralField {
        &gradient(&self.spatial).expect("scalar") * self.envelope(t)
    }

    pub fn at(&self, t: f64) -> SpectralField {
        &self.spatial * self.envelope(t)
    }
}

/// Per-time terms of the localized helicity balance.
#[derive(Clone, Debug, PartialEq)]
pub struct HelicityIdentity {
    pub times: Vec<f64>,
    /// `∫A·Bφ` at each time.
    pub local_helicity: Vec<f64>,
    /// `∫₀ᵗ∫A·B(φ_t + μΔφ)`
    pub transport: Vec<f64>,
    /// `2μ∫₀ᵗ∫∇A:∇B φ`
    pub dissipation: Vec<f64>,
    /// `d_i∫₀ᵗ∫((∇×B)×B)·(∇φ×A) + π ∇φ·B`
    pub hall: Vec<f64>,
    /// `(LHS − RHS)/scale` at each time.
    pub residuals: Vec<f64>,
    /// Largest magnitude among all terms.
    pub scale: f64,
}

impl HelicityIdentity {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().fold(0.0, |m, r| m.max(r.abs()))
    }
}

struct Rates {
    local: f64,
    transport: f64,
    dissipation: f64,
    hall: f64,
}

/// Spatial integrals at one time, summed on the twice-refined grid where every
/// integrand (a trigonometric polynomial) is integrated exactly.
fn rates(a: &SpectralField, b: &SpectralField, phi: &TestFunction, mu: f64, t: f64) -> Result<Rates> {
    let fine = b.grid().oversampled();
    let pad = |f: &SpectralField| f.padded(fine);
    let j = curl(b)?;
    let ga = gradient_tensor(a)?;
    let gb = gradient_tensor(b)?;
    let ph = phi.at(t);
    let weight = &phi.time_derivative(t) + &(&phi.laplacian(t) * mu);
    let grad_phi = phi.gradient(t);
    let fields = [a, b, &j, &ga, &gb, &ph, &weight, &grad_phi].map(pad);
    let [a, b, j, ga, gb, ph, weight, grad_phi] = fields;
    let (a, b, j, ga, gb, ph, weight, grad_phi) = (a?, b?, j?, ga?, gb?, ph?, weight?, grad_phi?);
    let v = physical_many(&[&a, &b, &j, &ga, &gb, &ph, &weight, &grad_phi]);
    let (av, bv, jv) = (&v[0..3], &v[3..6], &v[6..9]);
    let (gav, gbv) = (&v[9..18], &v[18..27]);
    let (phv, wv, gpv) = (&v[27], &v[28], &v[29..32]);
    let len = fine.len();
    let mut l = vec![vec![0.0; len]; 3];
    for p in 0..len {
        l[0][p] = jv[1][p] * bv[2][p] - jv[2][p] * bv[1][p];
        l[1][p] = jv[2][p] * bv[0][p] - jv[0][p] * bv[2][p];
        l[2][p] = jv[0][p] * bv[1][p] - jv[1][p] * bv[0][p];
    }
    // Gauge pressure of the Coulomb potential: π = Δ⁻¹∇·((∇×B)×B).
    let pi = inverse_laplacian(&divergence(&SpectralField::from_physical(fine, &l)?)?)?.to_physical();
    let (mut local, mut transport, mut diss, mut hall) = (0.0, 0.0, 0.0, 0.0);
    for p in 0..len {
        let ab = av[0][p] * bv[0][p] + av[1][p] * bv[1][p] + av[2][p] * bv[2][p];
        local += ab * phv[p];
        transport += ab * wv[p];
        let mut gg = 0.0;
        for c in 0..9 {
            gg += gav[c][p] * gbv[c][p];
        }
        diss += gg * phv[p];
        let g = [gpv[0][p], gpv[1][p], gpv[2][p]];
        let gxa = [
            g[1] * av[2][p] - g[2] * av[1][p],
            g[2] * av[0][p] - g[0] * av[2][p],
            g[0] * av[1][p] - g[1] * av[0][p],
        ];
        let gb_dot = g[0] * bv[0][p] + g[1] * bv[1][p] + g[2] * bv[2][p];
        hall += l[0][p] * gxa[0] + l[1][p] * gxa[1] + l[2][p] * gxa[2] + pi[0][p] * gb_dot;
    }
    let h = fine.spacing();
    let cell = h * h * h;
    Ok(Rates {
        local: local * cell,
        transport: transport * cell,
        dissipation: 2.0 * mu * diss * cell,
        hall: hall * cell,
    })
}

/// Terms of
/// `∫A·Bφ|ₜ + 2μ∫₀ᵗ∫∇A:∇Bφ = ∫A·Bφ|₀ + ∫₀ᵗ∫A·B(φ_t + μΔφ)
///  − d_i∫₀ᵗ∫[((∇×B)×B)·(∇φ×A) + π∇φ·B]`
/// for the Coulomb-gauge potential `A`, where `π = Δ⁻¹∇·((∇×B)×B)` is the
/// gauge pressure removed by the projection in `∂_t A`.
///
/// Uses the trajectory's potentials when present and Biot–Savart otherwise;
/// time integrals are trapezoid sums over the snapshots.
pub fn generalized_helicity_identity(traj: &Trajectory, phi: &TestFunction) -> Result<HelicityIdentity> {
    let (mu, d_i) = (traj.config.mu, traj.config.d_i);
    if let Some(b) = traj.snapshots.first() {
        phi.spatial().check_same_grid(b)?;
    }
    let times = traj.times();
    let mut local = Vec::with_capacity(times.len());
    let mut tr = Vec::with_capacity(times.len());
    let mut di = Vec::with_capacity(times.len());
    let mut ha = Vec::with_capacity(times.len());
    for (i, b) in traj.snapshots.iter().enumerate() {
        let a = match &traj.potentials {
            Some(p) => p[i].clone(),
            None => biot_savart(b)?,
        };
        let r = rates(&a, b, phi, mu, b.time())?;
        local.push(r.local);
        tr.push(r.transport);
        di.push(r.dissipation);
        ha.push(d_i * r.hall);
    }
    let transport = cumulative_trapezoid(&times, &tr);
    let dissipation = cumulative_trapezoid(&times, &di);
    let hall = cumulative_trapezoid(&times, &ha);
    let scale = [&local, &transport, &dissipation, &hall]
        .iter()
        .flat_map(|v| v.iter())
        .fold(0.0f64, |m, v| m.max(v.abs()));
    let norm = if scale > 0.0 { scale } else { 1.0 };
    let residuals = (0..times.len())
        .map(|i| (local[i] + dissipation[i] - local[0] - transport[i] + hall[i]) / norm)
        .collect();
    Ok(HelicityIdentity {
        times,
        local_helicity: local,
        transport,
        dissipation,
        hall,
        residuals,
        scale,
    })
}

/// Max over snapshot times of the identity's residual relative to its
/// largest term.
pub fn generalized_helicity_residual(traj: &Trajectory, phi: &TestFunction) -> Result<f64> {
    Ok(generalized_helicity_identity(traj, phi)?.max_residual())
}
