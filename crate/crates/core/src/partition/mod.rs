//! Assignment producers: the two-phase re-hosting heuristic, an exhaustive
//! optimal solver for small instances, and the comparison baselines.

mod baselines;
mod brute;
mod heuristic;
mod rehost;

pub use baselines::{baseline_max_preference, baseline_min_propagation, baseline_random};
pub use brute::{brute_force_optimal, BruteForceResult, DEFAULT_BRUTE_FORCE_CAP};
pub use heuristic::{
    initial_hosting, run_heuristic, run_heuristic_from, HeuristicOutcome, HeuristicParams, MoveRecord,
    StopReason, Telemetry, TerminationMode,
};
pub use rehost::{propagation_delta, rehost_gains, MoveKind, MoveSpec, PhiMode, RehostGains, Scheme};

use thiserror::Error;

use crate::graph::UserId;
use crate::objective::ObjectiveError;

#[derive(Debug, Error, PartialEq)]
pub enum PartitionError {
    #[error("users {0} and {1} are hosted on the same cloud; re-hosting gains are undefined")]
    SameCloudPair(UserId, UserId),
    #[error("brute force needs {needed} assignments, above the cap of {cap}")]
    TooLarge { needed: String, cap: u64 },
    #[error("invalid heuristic parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Objective(#[from] ObjectiveError),
}
