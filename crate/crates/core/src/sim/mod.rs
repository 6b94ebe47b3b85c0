//! Profile generators, the compromise-gap sweep and the strategic scenarios.

pub mod properties;
pub mod scenarios;
pub mod sweep;

pub use sweep::{
    evaluate_index, profile_seed, sample_profile, sweep, sweep_records, ProfileRecord, ReferenceRow, Setting,
    SimError, StatusQuoPolicy, SweepConfig, SweepStats, HEADLINE_ROWS, REFERENCE_ROWS,
};
pub use properties::{property_reports, property_spaces, property_suite, Property};
pub use scenarios::{
    claim_search, monotonicity_fixture, monotonicity_space, multidim_fixture, scenario_spaces, scenario_suite,
    separating_epoch, Claim, ManipulationFixture, MonotonicityFixture, ScenarioBudget, ScenarioReport,
};
