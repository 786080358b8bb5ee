use crate::error::{Error, Result};
use crate::field::ops::{cross, curl};
use crate::littlewood_paley::{besov_norm, time_norm, BesovSpec};
use crate::quadrature::cumulative_trapezoid;
use crate::solver::Trajectory;
use crate::table::{Cell, Table};

use super::region::{region_classify, Classification};

fn check_pair(a: &Trajectory, b: &Trajectory) -> Result<()> {
    let (ca, cb) = (&a.config, &b.config);
    if ca.n != cb.n || ca.mu != cb.mu || ca.d_i != cb.d_i {
        return Err(Error::param(
            "traj2",
            format!(
                "trajectories differ in (n, mu, d_i): ({}, {}, {}) vs ({}, {}, {})",
                ca.n, ca.mu, ca.d_i, cb.n, cb.mu, cb.d_i
            ),
        ));
    }
    if a.snapshots.len() != b.snapshots.len()
        || a.snapshots.iter().zip(&b.snapshots).any(|(x, y)| x.time() != y.time())
    {
        return Err(Error::param("traj2", "trajectories have different snapshot times"));
    }
    Ok(())
}

/// Residual of the cross-energy balance
/// `∫B¹·B²|₀ᵗ = −2μ∫₀ᵗ∫∇B¹:∇B² + d_i∫₀ᵗ∫∇×((∇×B¹)×Z)·Z`, `Z = B¹ − B²`,
/// at every snapshot time, relative to `‖B¹₀‖₂‖B²₀‖₂`.
///
/// Time integrals use the trapezoid rule on the snapshots, so runs should
/// keep every step.
pub fn cross_energy_residual(traj1: &Trajectory, traj2: &Trajectory) -> Result<Vec<(f64, f64)>> {
    check_pair(traj1, traj2)?;
    let (mu, d_i) = (traj1.config.mu, traj1.config.d_i);
    let times = traj1.times();
    let mut inner = Vec::with_capacity(times.len());
    let mut rate = Vec::with_capacity(times.len());
    for (b1, b2) in traj1.snapshots.iter().zip(&traj2.snapshots) {
        let z = b1 - b2;
        // ∫∇×(J¹×Z)·Z = ∫(J¹×Z)·(∇×Z)
        let hall = if d_i == 0.0 || z.is_zero() {
            0.0
        } else {
            cross(&curl(b1)?, &z)?.inner(&curl(&z)?)
        };
        inner.push(b1.inner(b2));
        rate.push(-2.0 * mu * b1.grad_inner(b2) + d_i * hall);
    }
    let integral = cumulative_trapezoid(&times, &rate);
    let scale = traj1.snapshots[0].l2_norm() * traj2.snapshots[0].l2_norm();
    let scale = if scale > 0.0 { scale } else { 1.0 };
    Ok(times
        .iter()
        .zip(inner.iter().zip(integral))
        .map(|(&t, (&ip, int))| (t, (ip - inner[0] - int) / scale))
        .collect())
}

/// One row of the Gronwall-bound check.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UniquenessRow {
    pub t: f64,
    /// `‖Z(t)‖₂²`
    pub z_l2_sq: f64,
    /// `‖∇×B¹‖_{L^q(0,t; B^r_{p,∞})}`
    pub besov_time_norm: f64,
    /// `ln(‖Z(t)‖²/‖Z₀‖²)/(t + N(t))`, the constant this row alone demands.
    pub demanded: f64,
    pub bound_ok: bool,
}

/// `‖Z(t)‖² ≤ ‖Z₀‖² exp{C(t + ‖∇×B¹‖_{L^q(0,t;B^r_{p,∞})})}` checked with the
/// smallest admissible `C`.
#[derive(Clone, Debug, PartialEq)]
pub struct UniquenessReport {
    pub p: f64,
    pub q: f64,
    pub r: f64,
    pub rows: Vec<UniquenessRow>,
    /// Max of the per-row demands (`0` when `Z` vanishes identically).
    pub fitted_c: f64,
    pub c_cap: f64,
    pub bound_ok: bool,
}

impl UniquenessReport {
    /// Columns `t, Z_l2_sq, besov_time_norm, fitted_C, bound_ok`.
    pub fn to_table(&self) -> Table {
        let mut t = Table::new(&["t", "Z_l2_sq", "besov_time_norm", "fitted_C", "bound_ok"]);
        for r in &self.rows {
            t.push(vec![
                r.t.into(),
                r.z_l2_sq.into(),
                r.besov_time_norm.into(),
                self.fitted_c.into(),
                Cell::Bool(r.bound_ok),
            ]);
        }
        t
    }

    /// Re-checks every row against a given constant.
    pub fn holds_with(&self, c: f64) -> bool {
        self.rows.iter().all(|r| r.demanded <= c)
    }
}

/// Relative size below which `Z` counts as identically zero.
const Z_FLOOR: f64 = 1e-24;

pub fn uniqueness_bound_check(
    traj1: &Trajectory,
    traj2: &Trajectory,
    p: f64,
    q: f64,
    r: f64,
    c_cap: f64,
) -> Result<UniquenessReport> {
    let class = region_classify(p, q, r)?.classification;
    if class != Classification::UniquenessRegion {
        return Err(Error::Classification {
            p,
            q,
            r,
            class: class.name().into(),
        });
    }
    check_pair(traj1, traj2)?;
    let spec = BesovSpec::new(r, p, f64::INFINITY)?;
    let times = traj1.times();
    let besov = traj1
        .snapshots
        .iter()
        .map(|b| besov_norm(&curl(b)?, &spec))
        .collect::<Result<Vec<f64>>>()?;
    let z_sq: Vec<f64> = traj1
        .snapshots
        .iter()
        .zip(&traj2.snapshots)
        .map(|(a, b)| (a - b).l2_norm_sq())
        .collect();
    let scale = traj1.snapshots[0].l2_norm_sq().max(traj2.snapshots[0].l2_norm_sq());
    let z0 = z_sq[0];
    let vanishing = z_sq.iter().all(|&z| z <= Z_FLOOR * scale.max(f64::MIN_POSITIVE));
    let mut rows = Vec::with_capacity(z_sq.len());
    for (i, &t) in times.iter().enumerate() {
        let norm = if i == 0 {
            0.0
        } else {
            time_norm(&times[..=i], &besov[..=i], q)?
        };
        let demanded = if vanishing || i == 0 {
            f64::NEG_INFINITY
        } else if z0 == 0.0 {
            f64::INFINITY
        } else {
            (z_sq[i] / z0).ln() / (t + norm)
        };
        rows.push(UniquenessRow {
            t,
            z_l2_sq: z_sq[i],
            besov_time_norm: norm,
            demanded,
            bound_ok: false,
        });
    }
    let fitted_c = if vanishing {
        0.0
    } else {
        rows.iter().map(|r| r.demanded).fold(f64::NEG_INFINITY, f64::max)
    };
    let fitted_c = if fitted_c == f64::NEG_INFINITY { 0.0 } else { fitted_c };
    let within_cap = fitted_c <= c_cap;
    for row in &mut rows {
        row.bound_ok = within_cap && row.demanded <= fitted_c;
    }
    let bound_ok = rows.iter().all(|r| r.bound_ok);
    Ok(UniquenessReport {
        p,
        q,
        r,
        rows,
        fitted_c,
        c_cap,
        bound_ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::init::{abc_field, random_shells};
    use crate::field::Grid;
    use crate::solver::{evolve_from, SolverConfig};

    fn g(n: usize) -> Grid {
        Grid::new(n).unwrap()
    }

    #[test]
    fn identical_runs_reduce_to_energy_balance() {
        let b0 = random_shells(g(16), 0, 1, 3).unwrap();
        let cfg = SolverConfig::new(16, 0.05, 1.0, 2e-3, 0.1);
        let t1 = evolve_from(&cfg, b0.clone()).unwrap();
        let t2 = evolve_from(&cfg, b0).unwrap();
        for (_, r) in cross_energy_residual(&t1, &t2).unwrap() {
            assert!(r.abs() <= 1e-6, "{r}");
        }
        let rep = uniqueness_bound_check(&t1, &t2, 3.0, 2.0, 1.0, 10.0).unwrap();
        assert!(rep.bound_ok && rep.fitted_c == 0.0);
        assert!(rep.rows.iter().all(|r| r.z_l2_sq <= 1e-12));
    }

    #[test]
    fn beltrami_pair_balances_exactly() {
        let b1 = abc_field(g(16));
        let b2 = &b1 * 0.5;
        let cfg = SolverConfig::new(16, 0.1, 1.0, 1e-3, 0.1);
        let t1 = evolve_from(&cfg, b1).unwrap();
        let t2 = evolve_from(&cfg, b2).unwrap();
        for (_, r) in cross_energy_residual(&t1, &t2).unwrap() {
            assert!(r.abs() <= 1e-8, "{r}");
        }
    }

    #[test]
    fn mismatched_runs_are_rejected() {
        let b = abc_field(g(16));
        let t1 = evolve_from(&SolverConfig::new(16, 0.1, 1.0, 1e-3, 0.002), b.clone()).unwrap();
        let t2 = evolve_from(&SolverConfig::new(16, 0.2, 1.0, 1e-3, 0.002), b).unwrap();
        assert!(matches!(cross_energy_residual(&t1, &t2), Err(Error::Parameter { .. })));
    }

    #[test]
    fn exponents_outside_region_are_rejected() {
        let b = abc_field(g(16));
        let t = evolve_from(&SolverConfig::new(16, 0.1, 1.0, 1e-3, 0.002), b).unwrap();
        let err = uniqueness_bound_check(&t, &t, 1.5, 4.0, 1.0, 1.0).unwrap_err();
        assert!(matches!(err, Error::Classification { .. }));
        assert!(err.to_string().contains("region_classify"));
    }

    #[test]
    fn fitted_constant_satisfies_every_row() {
        let b1 = abc_field(g(16));
        let mut b2 = random_shells(g(16), 1, 1, 5).unwrap();
        b2.scale(1e-3 * b1.l2_norm() / b2.l2_norm());
        let b2 = &b1 + &b2;
        let cfg = SolverConfig::new(16, 0.1, 1.0, 1e-3, 0.05);
        let t1 = evolve_from(&cfg, b1).unwrap();
        let t2 = evolve_from(&cfg, b2).unwrap();
        let rep = uniqueness_bound_check(&t1, &t2, 3.0, 2.0, 1.0, 1e6).unwrap();
        assert!(rep.bound_ok);
        assert!(rep.holds_with(rep.fitted_c));
        let z0 = rep.rows[0].z_l2_sq;
        for r in &rep.rows[1..] {
            let envelope = (rep.fitted_c * (r.t + r.besov_time_norm)).exp();
            assert!(r.z_l2_sq <= z0 * envelope * (1.0 + 1e-12));
        }
    }
}
