use crate::error::{Error, Result};
use crate::field::{Grid, SpectralField};
use crate::solver::{evolve_from, SolverConfig};

/// `F(λx)` placed on `target`: the coefficient of `k` moves to `λk`.
pub fn scaled(f: &SpectralField, lambda: usize, target: Grid) -> Result<SpectralField> {
    if !lambda.is_power_of_two() {
        return Err(Error::param("lambda", format!("must be a power of two, got {lambda}")));
    }
    let src = f.grid();
    let l = lambda as i64;
    let mut out = SpectralField::zeros(target, f.shape()).with_time(f.time());
    for idx in 0..src.len() {
        if f.comps().iter().all(|c| c[idx].norm_sqr() == 0.0) {
            continue;
        }
        let k = src.k_of(idx);
        let lk = [l * k[0], l * k[1], l * k[2]];
        if !target.is_retained(lk) {
            return Err(Error::param(
                "lambda",
                format!(
                    "mode {k:?} scaled by {lambda} leaves the dealiased band of an n={} grid",
                    target.n()
                ),
            ));
        }
        for c in 0..f.ncomp() {
            out.set_coeff(c, lk, f.comp(c)[idx]);
        }
    }
    Ok(out)
}

/// `‖[evolve(B₀)](λ·, t) − evolve(B₀(λ·))(t/λ²)‖₂ / ‖B₀‖₂`.
///
/// The unscaled run uses the grid `n/λ`, whose dealiased band maps exactly
/// onto the multiples of `λ` retained on the `n` grid, so both runs see the
/// same Galerkin truncation. The scaled run steps with `dt/λ²`.
pub fn scaling_residual(b0: &SpectralField, cfg: &SolverConfig, lambda: usize) -> Result<f64> {
    let fine = cfg.grid()?;
    if b0.grid() != fine {
        return Err(Error::param("B0", "initial field must live on the config grid"));
    }
    let b_scaled = scaled(b0, lambda, fine)?;
    if fine.n() / lambda < 8 {
        return Err(Error::param(
            "lambda",
            format!("n/λ = {} is below the smallest grid", fine.n() / lambda),
        ));
    }
    let coarse = Grid::new(fine.n() / lambda)?;
    let b_coarse = b0.restricted(coarse)?;

    let mut c_cfg = cfg.clone();
    c_cfg.n = coarse.n();
    c_cfg.snapshot_every = usize::MAX;
    c_cfg.out_dir = None;
    let mut f_cfg = c_cfg.clone();
    f_cfg.n = fine.n();
    let l2 = (lambda * lambda) as f64;
    f_cfg.dt = cfg.dt / l2;
    f_cfg.t_end = cfg.t_end / l2;
    // Match the coarse run's whistler check, whose k_max is λ times smaller
    // up to the floor in the dealias cutoff.
    let ratio = fine.dealias_cutoff() as f64 / (lambda as f64 * coarse.dealias_cutoff() as f64);
    f_cfg.cfl_safety = cfg.cfl_safety * ratio * ratio;

    let unscaled = evolve_from(&c_cfg, b_coarse)?;
    let direct = evolve_from(&f_cfg, b_scaled)?;
    let mapped = scaled(unscaled.last(), lambda, fine)?;
    let norm = b0.l2_norm();
    if norm == 0.0 {
        return Ok(0.0);
    }
    Ok((&mapped - direct.last()).l2_norm() / norm)
}
