//! Path simulation of the chain at polling instants and the estimators built
//! on it.

pub mod coupling;
pub mod diagnostics;
pub mod path;
pub mod stationary;
pub mod step;

pub use coupling::{coupled_paths, CoupledPaths};
pub use diagnostics::{
    drift_monte_carlo, emptying_probability, laplace_residual, laplace_sample, tail_geometric_fit, DriftFunctional,
    LaplaceResidual, TailFit,
};
pub use path::{run_path, run_path_with_snapshots, PathRecord};
pub use stationary::{
    autonomous_queue_oracle, autonomous_queue_path, batch_means_estimate, stationary_estimate,
    stationary_estimate_with, stationary_or_batch_means, stationary_run, EstimateMethod, StationaryEstimate, StationaryOptions,
};
pub use step::{apply_step, derive_seed, substream, StepNoise, StepOutcome};
