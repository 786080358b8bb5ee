//! Time integration of `∂_t B = -d_i ∇×((∇×B)×B) + μΔB` and of its
//! Coulomb-gauge potential form `∂_t A = -d_i Π((∇×B)×B) + μΔA`, `B = ∇×A`.
//!
//! Diffusion is diagonal in Fourier space and is treated either exactly
//! (integrating factor) or by Crank–Nicolson; the Hall term is explicit and
//! limited by the whistler step `1/(d_i ‖B‖_∞ k_max²)`.

mod config;

use std::path::Path;

use crate::error::{Error, Instability, Result};
use crate::field::init::{abc_field, random_shells, single_mode};
use crate::field::ops::{biot_savart, curl, hall_nonlinearity, leray_project, lorentz};
use crate::field::{grid_max, lp_norm, pairwise_sum, Grid, Snapshot, SpectralField};

pub use config::{InitCondition, Integrator, SolverConfig};

/// `1/(d_i ‖B‖_∞ k_max²)` with `‖B‖_∞` over the twice-refined grid and
/// `k_max` the dealias cutoff; `+∞` when the Hall term is absent.
pub fn whistler_dt_limit(b: &SpectralField, d_i: f64) -> f64 {
    let binf = lp_norm(b, f64::INFINITY).expect("∞ is a valid exponent");
    let kmax = b.grid().dealias_cutoff() as f64;
    let rate = d_i * binf * kmax * kmax;
    if rate == 0.0 {
        f64::INFINITY
    } else {
        1.0 / rate
    }
}

/// Builds the initial magnetic field of a run.
pub fn initial_field(cfg: &SolverConfig) -> Result<SpectralField> {
    cfg.validate()?;
    let grid = cfg.grid()?;
    match &cfg.init {
        InitCondition::Abc => Ok(abc_field(grid)),
        InitCondition::RandomShells => random_shells(grid, cfg.q_lo, cfg.q_hi, cfg.seed)
            .map_err(|e| Error::config("init", e.to_string())),
        InitCondition::SingleMode(k) => {
            single_mode(grid, *k).map_err(|e| Error::config("init", e.to_string()))
        }
        InitCondition::File(path) => load_initial(path, grid),
    }
}

fn load_initial(path: &Path, grid: Grid) -> Result<SpectralField> {
    let snap = Snapshot::read(path)?;
    let b = snap.field;
    if b.grid() != grid {
        return Err(Error::config(
            "init",
            format!("snapshot grid n={} differs from n={}", b.grid().n(), grid.n()),
        ));
    }
    if !b.is_vector() {
        return Err(Error::config("init", "snapshot must hold a vector field"));
    }
    let mean = b.mean().iter().map(|m| m.norm()).fold(0.0, f64::max);
    if mean > 1e-12 * b.max_abs_coeff().max(f64::MIN_POSITIVE) {
        return Err(Error::config("init", format!("snapshot has nonzero mean mode {mean:e}")));
    }
    let mut b = leray_project(&b.dealiased())?;
    b.zero_mean();
    Ok(b.with_time(0.0))
}

/// Rejects steps above `cfl_safety` times the whistler limit of `b0`.
pub fn check_cfl(b0: &SpectralField, cfg: &SolverConfig) -> Result<f64> {
    let limit = whistler_dt_limit(b0, cfg.d_i);
    if cfg.dt > cfg.cfl_safety * limit {
        return Err(Error::config(
            "cfl_safety",
            format!(
                "dt={} exceeds cfl_safety={} times the whistler limit {limit:e}",
                cfg.dt, cfg.cfl_safety
            ),
        ));
    }
    Ok(limit)
}

/// Scalars recorded after every step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepRecord {
    pub t: f64,
    /// `½‖B‖₂²`
    pub energy: f64,
    /// `∫A·B` with the Coulomb-gauge potential.
    pub helicity: f64,
    pub l2: f64,
    /// `max |B|` over the native grid.
    pub linf: f64,
    /// `‖∇B‖₂`
    pub grad_l2: f64,
}

impl StepRecord {
    pub fn of(b: &SpectralField) -> Result<Self> {
        b.check_vector("step record")?;
        let g = b.grid();
        let modes = g.modes();
        let (bx, by, bz) = (b.comp(0), b.comp(1), b.comp(2));
        let mut l2 = Vec::with_capacity(g.len());
        let mut grad = Vec::with_capacity(g.len());
        let mut hel = Vec::with_capacity(g.len());
        for idx in 1..g.len() {
            let k = modes.k[idx];
            let ksq = modes.ksq[idx];
            let e = bx[idx].norm_sqr() + by[idx].norm_sqr() + bz[idx].norm_sqr();
            l2.push(e);
            grad.push(ksq * e);
            // Re(Â·conj B̂) with Â = i k×B̂/|k|² = -i (B̂×k)/|k|².
            let cx = by[idx] * k[2] - bz[idx] * k[1];
            let cy = bz[idx] * k[0] - bx[idx] * k[2];
            let cz = bx[idx] * k[1] - by[idx] * k[0];
            let dotc = cx * bx[idx].conj() + cy * by[idx].conj() + cz * bz[idx].conj();
            hel.push(dotc.im / ksq);
        }
        let v = g.volume();
        let mean = b.mean();
        let e0 = mean.iter().map(|m| m.norm_sqr()).sum::<f64>();
        let l2sq = v * (pairwise_sum(&l2) + e0);
        Ok(StepRecord {
            t: b.time(),
            energy: 0.5 * l2sq,
            helicity: v * pairwise_sum(&hel),
            l2: l2sq.sqrt(),
            linf: grid_max(b),
            grad_l2: (v * pairwise_sum(&grad)).sqrt(),
        })
    }
}

/// Snapshots and per-step log of one run.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub config: SolverConfig,
    /// Magnetic field snapshots in strictly increasing time.
    pub snapshots: Vec<SpectralField>,
    /// Vector potentials at the snapshot times, when the potential form ran.
    pub potentials: Option<Vec<SpectralField>>,
    pub log: Vec<StepRecord>,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.time()).collect()
    }

    pub fn last(&self) -> &SpectralField {
        self.snapshots.last().expect("a trajectory holds at least the initial state")
    }

    /// Columns `t, E, H, l2, linf, grad_l2`.
    pub fn log_table(&self) -> crate::table::Table {
        let mut t = crate::table::Table::new(&["t", "E", "H", "l2", "linf", "grad_l2"]);
        for r in &self.log {
            t.push(vec![
                r.t.into(),
                r.energy.into(),
                r.helicity.into(),
                r.l2.into(),
                r.linf.into(),
                r.grad_l2.into(),
            ]);
        }
        t
    }
}

/// Which unknown the stepper advances.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Form {
    Field,
    Potential,
}

/// Precomputed per-mode diffusion factors for one step size.
pub struct Stepper {
    grid: Grid,
    mu: f64,
    d_i: f64,
    dt: f64,
    integrator: Integrator,
    form: Form,
    /// `e^{-μ|k|²dt}` and `e^{-μ|k|²dt/2}`, or the Crank–Nicolson factors
    /// `(1 - μ|k|²dt/2)/(1 + μ|k|²dt/2)` and `1/(1 + μ|k|²dt/2)`.
    full: Vec<f64>,
    half: Vec<f64>,
}

impl Stepper {
    pub fn new(grid: Grid, mu: f64, d_i: f64, dt: f64, integrator: Integrator) -> Self {
        Self::with_form(grid, mu, d_i, dt, integrator, Form::Field)
    }

    fn with_form(grid: Grid, mu: f64, d_i: f64, dt: f64, integrator: Integrator, form: Form) -> Self {
        let mut cache = std::collections::HashMap::new();
        let mut full = Vec::with_capacity(grid.len());
        let mut half = Vec::with_capacity(grid.len());
        for idx in 0..grid.len() {
            let ksq = grid.k_norm_sq(idx);
            let (f, h) = *cache.entry(ksq.to_bits()).or_insert_with(|| {
                let a = mu * ksq * dt;
                match integrator {
                    Integrator::IfRk4 => ((-a).exp(), (-0.5 * a).exp()),
                    Integrator::ImexCn => ((1.0 - 0.5 * a) / (1.0 + 0.5 * a), 1.0 / (1.0 + 0.5 * a)),
                }
            });
            full.push(f);
            half.push(h);
        }
        Stepper {
            grid,
            mu,
            d_i,
            dt,
            integrator,
            form,
            full,
            half,
        }
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Explicit part of the right-hand side.
    fn nonlinear(&self, u: &SpectralField) -> Result<SpectralField> {
        if self.d_i == 0.0 {
            return Ok(SpectralField::vector_zeros(self.grid));
        }
        let mut out = match self.form {
            Form::Field => hall_nonlinearity(u)?.1,
            Form::Potential => leray_project(&lorentz(&curl(u)?)?)?,
        };
        out.scale(-self.d_i);
        Ok(out)
    }

    /// `out = fa·a + c·fb·b` mode-wise, where `fa`, `fb` are factor tables
    /// (`None` meaning 1).
    fn combine(
        &self,
        fa: Option<&[f64]>,
        a: &SpectralField,
        c: f64,
        fb: Option<&[f64]>,
        b: &SpectralField,
    ) -> SpectralField {
        let mut comps = Vec::with_capacity(3);
        for comp in 0..3 {
            let (ac, bc) = (a.comp(comp), b.comp(comp));
            let v: Vec<_> = (0..ac.len())
                .map(|i| {
                    let x = fa.map_or(ac[i], |f| ac[i] * f[i]);
                    let y = fb.map_or(bc[i], |f| bc[i] * f[i]);
                    x + y * c
                })
                .collect();
            comps.push(v);
        }
        SpectralField::from_coeffs(self.grid, comps).expect("vector shape")
    }

    /// One step; the result is dealiased, projected, mean-free and stamped
    /// with `t + dt`.
    pub fn step(&self, u: &SpectralField) -> Result<SpectralField> {
        u.check_vector("step")?;
        let dt = self.dt;
        let (full, half) = (Some(self.full.as_slice()), Some(self.half.as_slice()));
        let mut next = match self.integrator {
            Integrator::IfRk4 => {
                let k1 = self.nonlinear(u)?;
                let mut s = u.clone();
                s.add_scaled(0.5 * dt, &k1);
                let k2 = self.nonlinear(&self.combine(half, &s, 0.0, None, &s))?;
                let k3 = self.nonlinear(&self.combine(half, u, 0.5 * dt, None, &k2))?;
                let k4 = self.nonlinear(&self.combine(full, u, dt, half, &k3))?;
                let mut out = self.combine(full, u, dt / 6.0, full, &k1);
                for comp in 0..3 {
                    let (k2c, k3c, k4c) = (k2.comp(comp), k3.comp(comp), k4.comp(comp));
                    for (i, o) in out.comp_mut(comp).iter_mut().enumerate() {
                        *o += ((k2c[i] + k3c[i]) * (self.half[i] / 3.0) + k4c[i] / 6.0) * dt;
                    }
                }
                out
            }
            Integrator::ImexCn => {
                let n0 = self.nonlinear(u)?;
                let pred = self.combine(full, u, dt, half, &n0);
                let mut avg = self.nonlinear(&pred)?;
                avg.add_scaled(1.0, &n0);
                self.combine(full, u, 0.5 * dt, half, &avg)
            }
        };
        next.dealias();
        let mut next = leray_project(&next)?;
        next.zero_mean();
        Ok(next.with_time(u.time() + dt))
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }
}

/// One step of the field equation with the configured integrator.
pub fn step(b: &SpectralField, cfg: &SolverConfig) -> Result<SpectralField> {
    cfg.validate()?;
    let s = Stepper::new(b.grid(), cfg.mu, cfg.d_i, cfg.dt, cfg.integrator);
    let out = s.step(b)?;
    if !out.is_finite() {
        return Err(Error::Unstable(Box::new(Instability {
            time: b.time(),
            step: 0,
            dt: cfg.dt,
            whistler_limit: whistler_dt_limit(b, cfg.d_i),
            cfl_safety: cfg.cfl_safety,
            partial: None,
        })));
    }
    Ok(out)
}

/// Number of full steps and the length of a trailing partial step.
fn schedule(t_end: f64, dt: f64) -> (usize, f64) {
    let ratio = t_end / dt;
    let full = (ratio + 1e-9).floor();
    let rem = t_end - full * dt;
    if rem <= 1e-9 * dt {
        (full as usize, 0.0)
    } else {
        (full as usize, rem)
    }
}

fn run(cfg: &SolverConfig, b0: SpectralField, form: Form) -> Result<Trajectory> {
    let grid = cfg.grid()?;
    let limit = check_cfl(&b0, cfg)?;
    let (nfull, rem) = schedule(cfg.t_end, cfg.dt);
    let main = Stepper::with_form(grid, cfg.mu, cfg.d_i, cfg.dt, cfg.integrator, form);
    let tail = (rem > 0.0).then(|| Stepper::with_form(grid, cfg.mu, cfg.d_i, rem, cfg.integrator, form));
    let total = nfull + usize::from(tail.is_some());

    let mut u = match form {
        Form::Field => b0.with_time(0.0),
        Form::Potential => biot_savart(&b0)?.with_time(0.0),
    };
    let field_of = |u: &SpectralField| -> Result<SpectralField> {
        match form {
            Form::Field => Ok(u.clone()),
            Form::Potential => Ok(curl(u)?.with_time(u.time())),
        }
    };
    let mut traj = Trajectory {
        config: cfg.clone(),
        snapshots: vec![field_of(&u)?],
        potentials: (form == Form::Potential).then(|| vec![u.clone()]),
        log: vec![StepRecord::of(&field_of(&u)?)?],
    };
    for i in 1..=total {
        let stepper = if i <= nfull { &main } else { tail.as_ref().unwrap() };
        let next = stepper.step(&u)?;
        if !next.is_finite() {
            return Err(Error::Unstable(Box::new(Instability {
                time: next.time(),
                step: i,
                dt: cfg.dt,
                whistler_limit: whistler_dt_limit(&field_of(&u)?, cfg.d_i).min(limit),
                cfl_safety: cfg.cfl_safety,
                partial: Some(traj),
            })));
        }
        u = next;
        let b = field_of(&u)?;
        traj.log.push(StepRecord::of(&b)?);
        if i % cfg.snapshot_every == 0 || i == total {
            traj.snapshots.push(b);
            if let Some(p) = traj.potentials.as_mut() {
                p.push(u.clone());
            }
        }
    }
    Ok(traj)
}

/// Integrates the field equation from the configured initial condition.
pub fn evolve(cfg: &SolverConfig) -> Result<Trajectory> {
    let b0 = initial_field(cfg)?;
    evolve_from(cfg, b0)
}

/// Integrates the field equation from an explicit initial field.
pub fn evolve_from(cfg: &SolverConfig, b0: SpectralField) -> Result<Trajectory> {
    cfg.validate()?;
    check_initial(cfg, &b0)?;
    run(cfg, b0, Form::Field)
}

/// Integrates the potential form; snapshots hold `B = ∇×A` and
/// `potentials` holds `A`.
pub fn evolve_potential(cfg: &SolverConfig) -> Result<Trajectory> {
    let b0 = initial_field(cfg)?;
    evolve_potential_from(cfg, b0)
}

pub fn evolve_potential_from(cfg: &SolverConfig, b0: SpectralField) -> Result<Trajectory> {
    cfg.validate()?;
    check_initial(cfg, &b0)?;
    run(cfg, b0, Form::Potential)
}

fn check_initial(cfg: &SolverConfig, b0: &SpectralField) -> Result<()> {
    b0.check_vector("initial field")?;
    if b0.grid().n() != cfg.n {
        return Err(Error::config(
            "n",
            format!("initial field has n={}, config has n={}", b0.grid().n(), cfg.n),
        ));
    }
    let mean = b0.mean().iter().map(|m| m.norm()).fold(0.0, f64::max);
    if mean != 0.0 {
        return Err(Error::Gauge(mean));
    }
    Ok(())
}
