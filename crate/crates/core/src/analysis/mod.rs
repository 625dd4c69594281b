//! Estimators, readout mitigation and fidelity bounds.

mod bounds;
mod estimate;
mod spam;
mod tables;

pub use bounds::{fidelity_bounds, fidelity_bounds_with_errors, topological_qutrit_bounds, BoundErrors, FidelityBound};
pub use estimate::{
    binomial_se, bootstrap_se, energy_density, energy_from_values, logical_values, sample_measure_all, sample_measure_all_with, sampled_logical_values, sampled_plaquettes,
    standard_errors, LogicalValues, MeasureAllRun, SampledPlaquettes,
};
pub use spam::{apply_confusion, spam_mitigate, ConfusionMatrix, Mitigated};
pub use tables::{bounds_csv, frames_csv, plaquette_table_csv, qutrit_table_csv};
