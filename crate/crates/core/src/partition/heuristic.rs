use serde::{Deserialize, Serialize};

use crate::cloud::CloudId;
use crate::graph::{SocialConnection, UserId};
use crate::objective::{Assignment, ObjectiveParams, Problem};

use super::rehost::{rehost_gains, PhiMode, Scheme};
use super::PartitionError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminationMode {
    /// Stop once the best gain of an examined connection falls below `eta`.
    GainThreshold,
    /// Stop once `touched_budget` of all connections have been examined.
    Budget,
    /// Whichever of the two triggers first.
    #[default]
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeuristicParams {
    pub objective: ObjectiveParams,
    pub eta: f64,
    /// Fraction of all connections that may be examined, in `(0, 1]`.
    pub touched_budget: f64,
    pub termination: TerminationMode,
    pub phi: PhiMode,
}

impl Default for HeuristicParams {
    fn default() -> Self {
        Self {
            objective: ObjectiveParams::default(),
            eta: 0.0,
            touched_budget: 0.2,
            termination: TerminationMode::Both,
            phi: PhiMode::Exact,
        }
    }
}

impl HeuristicParams {
    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.objective.alpha = alpha;
        self
    }

    pub fn validate(&self) -> Result<(), PartitionError> {
        self.objective.validate()?;
        if !(self.touched_budget > 0.0 && self.touched_budget <= 1.0) {
            return Err(PartitionError::InvalidParameter(format!(
                "touched_budget must be in (0, 1], got {}",
                self.touched_budget
            )));
        }
        if !self.eta.is_finite() {
            return Err(PartitionError::InvalidParameter(format!("eta must be finite, got {}", self.eta)));
        }
        Ok(())
    }

    /// Maximum number of connections examined out of `total`.
    pub fn budget_limit(&self, total: usize) -> usize {
        match self.termination {
            TerminationMode::GainThreshold => usize::MAX,
            // Guard against 0.2 * 30 rounding up to 7.
            _ => ((self.touched_budget * total as f64) - 1e-9).ceil().max(0.0) as usize,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    GainBelowThreshold,
    BudgetExhausted,
    ListExhausted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MoveRecord {
    /// 1-based index of the examined connection that produced this move.
    pub step: usize,
    pub u: UserId,
    pub v: UserId,
    pub scheme: Scheme,
    pub gain: f64,
    /// `(user, from, to)` for every user that changed cloud.
    pub moved: Vec<(UserId, CloudId, CloudId)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Telemetry {
    pub total_connections: usize,
    pub initial_cross_cloud: usize,
    pub touched: usize,
    /// Listed connections that had become same-cloud by the time they came up.
    pub skipped_same_cloud: usize,
    pub stop: StopReason,
    /// Combined weights of the examined connections, in examination order.
    pub examined_weights: Vec<f64>,
    pub moves: Vec<MoveRecord>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeuristicOutcome {
    pub initial: Assignment,
    pub assignment: Assignment,
    pub telemetry: Telemetry,
}

/// Preference-aware placement: every user on a cloud maximizing `psi(u, .)`,
/// lowest id on ties.
pub fn initial_hosting(problem: &Problem<'_>) -> Assignment {
    let prefs = problem.preferences();
    Assignment::new(problem.graph().users().map(|u| prefs.argmax(u)).collect())
}

/// Initial hosting followed by one propagation-aware re-hosting pass.
pub fn run_heuristic(problem: &Problem<'_>, params: &HeuristicParams) -> Result<HeuristicOutcome, PartitionError> {
    run_heuristic_from(problem, params, initial_hosting(problem))
}

/// Re-hosting pass starting from an arbitrary assignment.
///
/// Cross-cloud connections are sorted once by combined weight (descending,
/// ties by `(a, b)`) and each is examined at most once; gains are evaluated
/// against the current assignment when a connection reaches the head.
pub fn run_heuristic_from(
    problem: &Problem<'_>,
    params: &HeuristicParams,
    initial: Assignment,
) -> Result<HeuristicOutcome, PartitionError> {
    params.validate()?;
    initial.validate(problem.n_users(), problem.n_clouds())?;

    let graph = problem.graph();
    let total = graph.n_connections();
    let mut list: Vec<SocialConnection> = graph
        .connections()
        .into_iter()
        .filter(|c| initial.cloud(c.a) != initial.cloud(c.b))
        .collect();
    list.sort_by(|x, y| y.combined_weight.total_cmp(&x.combined_weight).then((x.a, x.b).cmp(&(y.a, y.b))));

    let limit = params.budget_limit(total);
    let check_gain = matches!(params.termination, TerminationMode::GainThreshold | TerminationMode::Both);

    let mut assignment = initial.clone();
    let mut telemetry = Telemetry {
        total_connections: total,
        initial_cross_cloud: list.len(),
        touched: 0,
        skipped_same_cloud: 0,
        stop: StopReason::ListExhausted,
        examined_weights: Vec::new(),
        moves: Vec::new(),
    };

    for conn in &list {
        if telemetry.touched >= limit {
            telemetry.stop = StopReason::BudgetExhausted;
            break;
        }
        let (u, v) = (conn.a, conn.b);
        let (c, d) = (assignment.cloud(u), assignment.cloud(v));
        if c == d {
            telemetry.skipped_same_cloud += 1;
            continue;
        }
        telemetry.touched += 1;
        telemetry.examined_weights.push(conn.combined_weight);

        let gains = rehost_gains(u, v, &assignment, problem, &params.objective, params.phi)?;
        let (scheme, gain) = gains.best();
        let moved = match scheme {
            Scheme::A => Vec::new(),
            Scheme::B => vec![(u, c, d)],
            Scheme::C => vec![(v, d, c)],
            Scheme::D => {
                let f = gains.best_f.expect("gamma_D is finite only with a third cloud");
                vec![(u, c, f), (v, d, f)]
            }
        };
        if !moved.is_empty() {
            for &(x, _, to) in &moved {
                assignment.set(x, to);
            }
            telemetry.moves.push(MoveRecord { step: telemetry.touched, u, v, scheme, gain, moved });
        }
        if check_gain && gain < params.eta {
            telemetry.stop = StopReason::GainBelowThreshold;
            break;
        }
    }

    Ok(HeuristicOutcome { initial, assignment, telemetry })
}
