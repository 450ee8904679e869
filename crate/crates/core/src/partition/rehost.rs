use serde::{Deserialize, Serialize};

use crate::cloud::CloudId;
use crate::graph::UserId;
use crate::objective::{Assignment, ObjectiveParams, Problem};

use super::PartitionError;

/// How the inter-cloud cost change of a move is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhiMode {
    /// True change of `sum_u Y(u, C_u)` over every incident connection of the
    /// moved users, including neighbors on third clouds and intra-cloud prices.
    #[default]
    Exact,
    /// Half-weighted neighbor sums over clouds `c`, `d` and `f` only.
    ThreeCase,
}

/// The four re-hosting schemes for a cross-cloud pair `u` (on `c`), `v` (on `d`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scheme {
    /// Keep both where they are.
    A,
    /// Move `u` to `d`.
    B,
    /// Move `v` to `c`.
    C,
    /// Move both to a third cloud.
    D,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MoveKind {
    UToV,
    VToU,
    BothTo(CloudId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MoveSpec {
    pub u: UserId,
    pub v: UserId,
    pub kind: MoveKind,
}

impl MoveSpec {
    /// `(user, new cloud)` pairs this move applies.
    pub fn targets(&self, assignment: &Assignment) -> Vec<(UserId, CloudId)> {
        match self.kind {
            MoveKind::UToV => vec![(self.u, assignment.cloud(self.v))],
            MoveKind::VToU => vec![(self.v, assignment.cloud(self.u))],
            MoveKind::BothTo(f) => vec![(self.u, f), (self.v, f)],
        }
    }
}

/// Change in `gamma * sum_u Y(u, C_u)` if `moves` were applied.
pub(crate) fn exact_cost_delta(problem: &Problem<'_>, assignment: &Assignment, moves: &[(UserId, CloudId)]) -> f64 {
    let graph = problem.graph();
    let new_cloud = |w: UserId| moves.iter().find(|m| m.0 == w).map_or(assignment.cloud(w), |m| m.1);
    let mut delta = 0.0;
    for &(x, to) in moves {
        let from = assignment.cloud(x);
        for nb in graph.neighbors(x) {
            let moved_too = moves.iter().any(|m| m.0 == nb.user);
            // A connection between two moved users is counted from its smaller end.
            if moved_too && nb.user < x {
                continue;
            }
            let before = problem.pair_cost(from, assignment.cloud(nb.user), nb.out_weight, nb.in_weight);
            let after = problem.pair_cost(to, new_cloud(nb.user), nb.out_weight, nb.in_weight);
            delta += after - before;
        }
    }
    delta
}

/// Delta-cost from the three closed-form move cases.
fn three_case_delta(problem: &Problem<'_>, assignment: &Assignment, spec: &MoveSpec, gamma: f64) -> f64 {
    let graph = problem.graph();
    let p = problem.model().pricing();
    let (u, v) = (spec.u, spec.v);
    let (c, d) = (assignment.cloud(u), assignment.cloud(v));

    // half * gamma * sum over w in F_x with C_w == cloud of (p[a][b] e_wx + p[b][a] e_xw)
    // where `inbound` selects which direction pairs with p[a][b].
    let half_sum = |x: UserId, on: CloudId, a: CloudId, b: CloudId, inbound_first: bool| -> f64 {
        graph
            .neighbors(x)
            .iter()
            .filter(|nb| assignment.cloud(nb.user) == on)
            .map(|nb| {
                let (first, second) =
                    if inbound_first { (nb.in_weight, nb.out_weight) } else { (nb.out_weight, nb.in_weight) };
                0.5 * gamma * (p.get(a, b) * first + p.get(b, a) * second)
            })
            .sum()
    };

    match spec.kind {
        // 1/2 sum_{w in c} g(p_cd e_wu + p_dc e_uw) - 1/2 sum_{w in d} g(p_cd e_uw + p_dc e_wu)
        MoveKind::UToV => half_sum(u, c, c, d, true) - half_sum(u, d, c, d, false),
        // 1/2 sum_{w in d} g(p_dc e_wv + p_cd e_vw) - 1/2 sum_{w in c} g(p_dc e_vw + p_cd e_wv)
        MoveKind::VToU => half_sum(v, d, d, c, true) - half_sum(v, c, d, c, false),
        // u's terms then v's terms, each gaining cost at home and saving on f.
        MoveKind::BothTo(f) => {
            half_sum(u, c, c, d, true) - half_sum(u, f, c, f, false) + half_sum(v, d, d, c, true)
                - half_sum(v, f, d, f, false)
        }
    }
}

/// `phi(move)`: the inter-cloud replication cost change of a re-hosting move,
/// already multiplied by `gamma`.
pub fn propagation_delta(
    spec: &MoveSpec,
    assignment: &Assignment,
    problem: &Problem<'_>,
    gamma: f64,
    mode: PhiMode,
) -> Result<f64, PartitionError> {
    if assignment.cloud(spec.u) == assignment.cloud(spec.v) {
        return Err(PartitionError::SameCloudPair(spec.u, spec.v));
    }
    Ok(match mode {
        PhiMode::Exact => gamma * exact_cost_delta(problem, assignment, &spec.targets(assignment)),
        PhiMode::ThreeCase => three_case_delta(problem, assignment, spec, gamma),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RehostGains {
    pub gamma_a: f64,
    pub gamma_b: f64,
    pub gamma_c: f64,
    /// `-inf` when there is no third cloud.
    pub gamma_d: f64,
    pub best_f: Option<CloudId>,
}

impl RehostGains {
    /// Largest gain, preferring A over B over C over D on ties.
    pub fn best(&self) -> (Scheme, f64) {
        let mut best = (Scheme::A, self.gamma_a);
        for (s, g) in [(Scheme::B, self.gamma_b), (Scheme::C, self.gamma_c), (Scheme::D, self.gamma_d)] {
            if g > best.1 {
                best = (s, g);
            }
        }
        best
    }
}

/// Gains of the four re-hosting schemes for the cross-cloud pair `(u, v)`.
pub fn rehost_gains(
    u: UserId,
    v: UserId,
    assignment: &Assignment,
    problem: &Problem<'_>,
    params: &ObjectiveParams,
    mode: PhiMode,
) -> Result<RehostGains, PartitionError> {
    let (c, d) = (assignment.cloud(u), assignment.cloud(v));
    if c == d {
        return Err(PartitionError::SameCloudPair(u, v));
    }
    let alpha = params.alpha;
    let pm = params.preference;
    let pref = |x, cl| problem.pref(x, cl, pm);
    let phi = |kind| propagation_delta(&MoveSpec { u, v, kind }, assignment, problem, params.gamma, mode);

    // Skip the cost scan entirely when it carries no weight.
    let cost_term = |kind| -> Result<f64, PartitionError> {
        if alpha == 1.0 {
            Ok(0.0)
        } else {
            Ok((1.0 - alpha) * phi(kind)?)
        }
    };

    let gamma_b = alpha * (pref(u, d) - pref(u, c)) - cost_term(MoveKind::UToV)?;
    let gamma_c = alpha * (pref(v, c) - pref(v, d)) - cost_term(MoveKind::VToU)?;

    let mut gamma_d = f64::NEG_INFINITY;
    let mut best_f = None;
    for f in problem.model().clouds() {
        if f == c || f == d {
            continue;
        }
        let g = alpha * (pref(u, f) + pref(v, f) - pref(u, c) - pref(v, d)) - cost_term(MoveKind::BothTo(f))?;
        if g > gamma_d {
            gamma_d = g;
            best_f = Some(f);
        }
    }

    Ok(RehostGains { gamma_a: 0.0, gamma_b, gamma_c, gamma_d, best_f })
}
