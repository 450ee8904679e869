//! Propagation-aware multi-cloud hosting for social video services.
//!
//! Users of a social graph are assigned to cloud providers so that each user
//! is served from a preferred provider while content reshared across provider
//! boundaries stays cheap. The crate provides the graph and cloud models, the
//! combined objective, a two-phase re-hosting heuristic with an exhaustive
//! oracle and baselines, and an experiment harness behind the CLI.

pub mod cloud;
pub mod experiments;
pub mod graph;
pub mod objective;
pub mod partition;

pub use cloud::{CloudId, CloudModel, RegionId};
pub use graph::{SocialGraph, UserId};
pub use objective::{Assignment, EvaluationReport, ObjectiveParams, Problem};
pub use partition::{HeuristicParams, PhiMode, TerminationMode};
