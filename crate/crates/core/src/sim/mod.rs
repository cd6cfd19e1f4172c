//! Simulation designs, study metrics, Monte Carlo checks, graph construction
//! and classification utilities.

mod checks;
mod classify;
mod graph;
mod rng;
mod scenario;
mod study;

pub use checks::{
    consistency_check, fdr_bound_check, pure_noise, selected_at_level, ConsistencyDesign,
    ConsistencyResult, FdrCheck,
};
pub use classify::{
    classify, cv_boost, fitted_values, outlier_flags, BoostRound, Classification, CvBoostResult,
    Outlier, HAMPEL_CUTOFF,
};
pub use graph::{build_graph, Edge, EdgeRule, GraphResult, NodeFailure};
pub use rng::{SimRng, Stream};
pub use scenario::{builtin, Covariance, Generated, Noise, ScenarioSpec, Signal, BUILTIN_SCENARIOS};
pub use study::{run_study, score_replication, summarize, MetricsReport, Procedure, ReplicationRecord, StudyOptions};
