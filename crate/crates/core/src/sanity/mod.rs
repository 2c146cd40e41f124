//! Sanity tests: scenario families whose prediction sets have a known
//! quality ordering, the approximate-truth perturbation, and the Monte Carlo
//! harness measuring how well each criterion recovers the ordering.

mod generate;
mod harness;

pub use generate::{
    gen_detection_scenario, gen_tracking_scenario, linspace, perturb_to_approximate_truth,
    perturb_tracks_to_approximate_truth, shifted_squares_scenario, swap_likelihood, ClassMode,
    DetectionSanityConfig, PredictionParams, SanityScenario, ShiftedSquares, TrackingSanityConfig,
};
pub use harness::{
    default_criteria, default_grid, run_consistency_experiment, run_sanity_experiment, supports,
    trial_rng, trial_scenario, validate_grid, ConsistencyReport, ConsistencyRow, ConsistencySeries,
    Criterion, CriterionSummary, ExperimentConfig, Reliability, SampleSeries, SanityReport,
    SeriesKey, SeriesSummary, Stat, Task, TrialScenario, TIE_RULE,
};
