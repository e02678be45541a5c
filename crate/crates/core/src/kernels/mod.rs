//! One-step dynamics of the sampled chain: interpolling laws, the arrival and
//! polling operators, their composition and exact drift evaluation.

pub mod arrivals;
pub mod distribution;
pub mod drift;
pub mod functional;
pub mod law;
pub mod params;
pub mod polling;

pub use arrivals::{
    apply_arrival_operator, sample_interarrival_batch, truncation_level, ArrivalBatch, Estimate, OperatorSettings,
};
pub use distribution::InterpollingDistribution;
pub use drift::{
    energy_drift, energy_drift_with_law, one_step_expectation, poll_only_energy_drift, poll_only_population_drift,
    poll_stage, population_drift, scan_success_after_arrivals, PollStage,
};
pub use functional::Functional;
pub use law::{CountLaw, FiniteLaw, MixedPoisson};
pub use params::SystemParams;
pub use polling::{
    apply_polling_operator, poll_at, poll_outcome_distribution, sample_poll, PollOutcome, PollOutcomeDistribution,
};
