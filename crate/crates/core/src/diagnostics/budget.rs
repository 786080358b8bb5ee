use crate::quadrature::cumulative_trapezoid;
use crate::solver::Trajectory;
use crate::table::Table;

/// Energy and helicity bookkeeping at one logged step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BudgetRecord {
    pub t: f64,
    /// `½‖B‖₂²`
    pub energy: f64,
    /// `∫A·B`
    pub helicity: f64,
    /// `‖∇B‖₂²`
    pub grad_energy: f64,
    /// `2μ∫₀ᵗ‖∇B‖₂²`
    pub cumulative_dissipation: f64,
    /// `(‖B(t)‖₂² + 2μ∫₀ᵗ‖∇B‖₂² − ‖B₀‖₂²)/‖B₀‖₂²`; zero when `B₀ = 0`.
    pub energy_residual: f64,
}

/// One record per logged step; time integrals use the trapezoid rule on the
/// step log.
pub fn budget(traj: &Trajectory) -> Vec<BudgetRecord> {
    let mu = traj.config.mu;
    let times: Vec<f64> = traj.log.iter().map(|r| r.t).collect();
    let grad_sq: Vec<f64> = traj.log.iter().map(|r| r.grad_l2 * r.grad_l2).collect();
    let integral = cumulative_trapezoid(&times, &grad_sq);
    let b0_sq = traj.log.first().map_or(0.0, |r| 2.0 * r.energy);
    traj.log
        .iter()
        .zip(grad_sq.iter().zip(integral))
        .map(|(r, (&g, int))| {
            let dissipation = 2.0 * mu * int;
            let residual = if b0_sq > 0.0 {
                (2.0 * r.energy + dissipation - b0_sq) / b0_sq
            } else {
                0.0
            };
            BudgetRecord {
                t: r.t,
                energy: r.energy,
                helicity: r.helicity,
                grad_energy: g,
                cumulative_dissipation: dissipation,
                energy_residual: residual,
            }
        })
        .collect()
}

/// The signed residual of largest magnitude over the run. Positive values
/// mean the energy inequality is violated beyond quadrature error.
pub fn energy_inequality_residual(traj: &Trajectory) -> f64 {
    budget(traj)
        .iter()
        .map(|r| r.energy_residual)
        .fold(0.0, |acc, v| if v.abs() > acc.abs() { v } else { acc })
}

/// Columns `t, E, H, grad_l2, cum_dissipation, energy_ineq_residual`;
/// `grad_l2` is the norm `‖∇B‖₂`.
pub fn budget_table(records: &[BudgetRecord]) -> Table {
    let mut t = Table::new(&[
        "t",
        "E",
        "H",
        "grad_l2",
        "cum_dissipation",
        "energy_ineq_residual",
    ]);
    for r in records {
        t.push(vec![
            r.t.into(),
            r.energy.into(),
            r.helicity.into(),
            r.grad_energy.sqrt().into(),
            r.cumulative_dissipation.into(),
            r.energy_residual.into(),
        ]);
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::init::random_shells;
    use crate::field::Grid;
    use crate::solver::{evolve, evolve_from, SolverConfig};
    use std::f64::consts::PI;

    #[test]
    fn abc_budget_follows_analytic_decay() {
        let cfg = SolverConfig::new(16, 0.1, 1.0, 1e-3, 0.1);
        let rows = budget(&evolve(&cfg).unwrap());
        let e0 = 1.5 * (2.0 * PI).powi(3);
        assert!((rows[0].energy - e0).abs() < 1e-10 * e0);
        assert!((rows[0].helicity - 2.0 * e0).abs() < 1e-10 * e0);
        for r in &rows {
            let h = 2.0 * e0 * (-0.2 * r.t).exp();
            assert!((r.helicity - h).abs() <= 1e-7 * h, "t={} H={}", r.t, r.helicity);
            assert!(r.energy_residual.abs() <= 1e-8);
        }
        assert!(rows.windows(2).all(|w| w[1].cumulative_dissipation >= w[0].cumulative_dissipation));
    }

    #[test]
    fn zero_field_budget_is_zero() {
        let cfg = SolverConfig::new(8, 0.1, 1.0, 1e-2, 0.05);
        let traj = evolve_from(&cfg, crate::SpectralField::vector_zeros(Grid::new(8).unwrap())).unwrap();
        for r in budget(&traj) {
            assert_eq!(
                [r.energy, r.helicity, r.grad_energy, r.cumulative_dissipation, r.energy_residual],
                [0.0; 5]
            );
        }
    }

    #[test]
    fn single_snapshot_has_zero_residual() {
        let cfg = SolverConfig::new(16, 0.1, 1.0, 1e-3, 0.0);
        assert_eq!(energy_inequality_residual(&evolve(&cfg).unwrap()), 0.0);
    }

    #[test]
    fn resistive_random_run_balances_energy() {
        let g = Grid::new(16).unwrap();
        let b0 = random_shells(g, 0, 1, 5).unwrap();
        let cfg = SolverConfig::new(16, 0.05, 1.0, 2e-3, 0.1);
        let res = energy_inequality_residual(&evolve_from(&cfg, b0).unwrap());
        assert!(res.abs() <= 1e-6, "{res}");
    }
}
