//! Energy and helicity budgets, truncated fluxes, uniqueness machinery and
//! the criterion classifier.

mod budget;
mod flux;
mod helicity;
mod region;
mod scaling;
mod uniqueness;

pub use budget::{budget, budget_table, energy_inequality_residual, BudgetRecord};
pub use flux::{
    commutator_norm, flux_spectrum, mollifier_commutator, shell_commutator, FluxRow, FluxSpectrum,
};
pub use helicity::{
    generalized_helicity_identity, generalized_helicity_residual, HelicityIdentity, TestFunction,
};
pub use region::{figure_points, region_classify, Classification, CriterionTriple};
pub use scaling::{scaled, scaling_residual};
pub use uniqueness::{
    cross_energy_residual, uniqueness_bound_check, UniquenessReport, UniquenessRow,
};
