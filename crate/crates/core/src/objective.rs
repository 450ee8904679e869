//! Replication cost, the combined hosting objective and evaluation metrics.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cloud::{CloudId, CloudModel, ModelError, PreferenceTable};
use crate::graph::{SocialGraph, UserId};

#[derive(Debug, Error, PartialEq)]
pub enum ObjectiveError {
    #[error("alpha must be in [0, 1], got {0}")]
    Alpha(f64),
    #[error("gamma must be > 0, got {0}")]
    Gamma(f64),
    #[error("assignment covers {got} users, graph has {expected}")]
    AssignmentSize { got: usize, expected: usize },
    #[error("user {user} assigned to unknown cloud {cloud}")]
    UnknownCloud { user: usize, cloud: usize },
}

/// Which preference term enters the objective.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PreferenceMode {
    /// Per-user normalized preference, summing to one over clouds.
    #[default]
    Normalized,
    Raw,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveParams {
    pub alpha: f64,
    pub gamma: f64,
    #[serde(default)]
    pub preference: PreferenceMode,
}

impl Default for ObjectiveParams {
    fn default() -> Self {
        Self { alpha: 0.5, gamma: 1.0, preference: PreferenceMode::Normalized }
    }
}

impl ObjectiveParams {
    pub fn new(alpha: f64, gamma: f64) -> Result<Self, ObjectiveError> {
        let p = Self { alpha, gamma, preference: PreferenceMode::Normalized };
        p.validate()?;
        Ok(p)
    }

    pub fn with_preference(mut self, mode: PreferenceMode) -> Self {
        self.preference = mode;
        self
    }

    pub fn validate(&self) -> Result<(), ObjectiveError> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(ObjectiveError::Alpha(self.alpha));
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(ObjectiveError::Gamma(self.gamma));
        }
        Ok(())
    }
}

/// Total map from user to hosting cloud.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Assignment {
    host: Vec<CloudId>,
}

impl Assignment {
    pub fn new(host: Vec<CloudId>) -> Self {
        Self { host }
    }

    pub fn uniform(n_users: usize, cloud: CloudId) -> Self {
        Self { host: vec![cloud; n_users] }
    }

    #[inline]
    pub fn cloud(&self, u: UserId) -> CloudId {
        self.host[u.0]
    }

    #[inline]
    pub fn set(&mut self, u: UserId, c: CloudId) {
        self.host[u.0] = c;
    }

    pub fn len(&self) -> usize {
        self.host.len()
    }

    pub fn is_empty(&self) -> bool {
        self.host.is_empty()
    }

    pub fn as_slice(&self) -> &[CloudId] {
        &self.host
    }

    pub fn validate(&self, n_users: usize, n_clouds: usize) -> Result<(), ObjectiveError> {
        if self.host.len() != n_users {
            return Err(ObjectiveError::AssignmentSize { got: self.host.len(), expected: n_users });
        }
        if let Some((u, c)) = self.host.iter().enumerate().find(|(_, c)| c.0 >= n_clouds) {
            return Err(ObjectiveError::UnknownCloud { user: u, cloud: c.0 });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub objective_value: f64,
    /// Sum over users of normalized preference for their host cloud.
    pub preference_satisfaction: f64,
    /// Directed, un-halved sum of `p[C_u][C_v] * e_uv`.
    pub inter_cloud_cost: f64,
    /// Unordered connections whose endpoints sit on different clouds.
    pub inter_cloud_edge_count: usize,
    pub total_connections: usize,
    pub per_cloud_user_counts: BTreeMap<String, usize>,
}

/// Graph, cloud model and the precomputed preference table for one instance.
#[derive(Debug, Clone)]
pub struct Problem<'a> {
    graph: &'a SocialGraph,
    model: &'a CloudModel,
    prefs: PreferenceTable,
}

impl<'a> Problem<'a> {
    pub fn new(graph: &'a SocialGraph, model: &'a CloudModel) -> Result<Self, ModelError> {
        if model.n_users() != graph.n_users() {
            return Err(ModelError::ProfileCount { profiles: model.n_users(), users: graph.n_users() });
        }
        Ok(Self { graph, model, prefs: PreferenceTable::compute(graph, model) })
    }

    /// Uses a precomputed table, e.g. one restricted from a larger provider set.
    pub fn with_preferences(
        graph: &'a SocialGraph,
        model: &'a CloudModel,
        prefs: PreferenceTable,
    ) -> Result<Self, ModelError> {
        if model.n_users() != graph.n_users() {
            return Err(ModelError::ProfileCount { profiles: model.n_users(), users: graph.n_users() });
        }
        if prefs.n_clouds() != model.n_clouds() || prefs.n_users() != graph.n_users() {
            return Err(ModelError::InvalidValue(format!(
                "preference table is {}x{}, model is {}x{}",
                prefs.n_users(),
                prefs.n_clouds(),
                graph.n_users(),
                model.n_clouds()
            )));
        }
        Ok(Self { graph, model, prefs })
    }

    pub fn graph(&self) -> &'a SocialGraph {
        self.graph
    }

    pub fn model(&self) -> &'a CloudModel {
        self.model
    }

    pub fn preferences(&self) -> &PreferenceTable {
        &self.prefs
    }

    pub fn n_users(&self) -> usize {
        self.graph.n_users()
    }

    pub fn n_clouds(&self) -> usize {
        self.model.n_clouds()
    }

    /// Preference term used by the objective under `mode`.
    #[inline]
    pub fn pref(&self, u: UserId, c: CloudId, mode: PreferenceMode) -> f64 {
        match mode {
            PreferenceMode::Normalized => self.prefs.normalized(u, c),
            PreferenceMode::Raw => self.prefs.raw(u, c),
        }
    }

    /// Full (un-halved) price of traffic on the connection `u -- w` when they
    /// sit on `cu` and `cw`.
    #[inline]
    pub fn pair_cost(&self, cu: CloudId, cw: CloudId, e_uw: f64, e_wu: f64) -> f64 {
        let p = self.model.pricing();
        p.get(cu, cw) * e_uw + p.get(cw, cu) * e_wu
    }

    /// `Y(u, C_u)`: half of the priced traffic on each of `u`'s connections.
    pub fn replication_cost(&self, u: UserId, assignment: &Assignment) -> f64 {
        let cu = assignment.cloud(u);
        self.graph
            .neighbors(u)
            .iter()
            .map(|nb| 0.5 * self.pair_cost(cu, assignment.cloud(nb.user), nb.out_weight, nb.in_weight))
            .fold(0.0, |acc, x| acc + x)
    }

    pub fn total_replication_cost(&self, assignment: &Assignment) -> f64 {
        self.graph.users().map(|u| self.replication_cost(u, assignment)).fold(0.0, |acc, x| acc + x)
    }

    /// `sum_u alpha * pref(u, C_u) - (1 - alpha) * gamma * Y(u, C_u)`
    pub fn total_objective(&self, assignment: &Assignment, params: &ObjectiveParams) -> f64 {
        let a = params.alpha;
        self.graph
            .users()
            .map(|u| {
                a * self.pref(u, assignment.cloud(u), params.preference)
                    - (1.0 - a) * params.gamma * self.replication_cost(u, assignment)
            })
            .fold(0.0, |acc, x| acc + x)
    }

    // Folds start at +0.0: an empty f64 `sum()` yields -0.0.
    pub fn inter_cloud_cost(&self, assignment: &Assignment) -> f64 {
        let p = self.model.pricing();
        self.graph
            .edges()
            .iter()
            .filter_map(|e| {
                let (cs, cd) = (assignment.cloud(e.src), assignment.cloud(e.dst));
                (cs != cd).then(|| p.get(cs, cd) * e.weight)
            })
            .fold(0.0, |acc, x| acc + x)
    }

    pub fn inter_cloud_edge_count(&self, assignment: &Assignment) -> usize {
        self.graph
            .users()
            .map(|u| {
                let cu = assignment.cloud(u);
                self.graph.neighbors(u).iter().filter(|nb| nb.user > u && assignment.cloud(nb.user) != cu).count()
            })
            .sum()
    }

    pub fn preference_satisfaction(&self, assignment: &Assignment) -> f64 {
        self.graph.users().map(|u| self.prefs.normalized(u, assignment.cloud(u))).fold(0.0, |acc, x| acc + x)
    }

    pub fn evaluate(&self, assignment: &Assignment, params: &ObjectiveParams) -> EvaluationReport {
        let mut counts = vec![0usize; self.n_clouds()];
        for c in assignment.as_slice() {
            counts[c.0] += 1;
        }
        EvaluationReport {
            objective_value: self.total_objective(assignment, params),
            preference_satisfaction: self.preference_satisfaction(assignment),
            inter_cloud_cost: self.inter_cloud_cost(assignment),
            inter_cloud_edge_count: self.inter_cloud_edge_count(assignment),
            total_connections: self.graph.n_connections(),
            per_cloud_user_counts: self
                .model
                .clouds()
                .map(|c| (self.model.cloud_label(c).to_string(), counts[c.0]))
                .collect(),
        }
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::cloud::{Affinity, AffinityTable, PricingMatrix, RegionId, UserProfile};
    use proptest::prelude::*;

    /// One region per cloud; `upload[u][c]` becomes raw `psi(u, c)` for
    /// isolated-affinity users (no download terms, `K = beta = 1`).
    pub(crate) fn model_with(upload: &[Vec<f64>], pricing: PricingMatrix) -> CloudModel {
        let k = pricing.n_clouds();
        let mut t = AffinityTable::new(upload.len());
        for (u, row) in upload.iter().enumerate() {
            for (c, &v) in row.iter().enumerate() {
                t.set(UserId(u), RegionId(c), 0.0, v).unwrap();
            }
        }
        CloudModel::new(
            (0..k).map(|c| format!("c{c}")).collect(),
            (0..k).map(|c| format!("r{c}")).collect(),
            (0..k).map(CloudId).collect(),
            pricing,
            Affinity::Table(t),
            vec![UserProfile::new(1.0, 1.0, None).unwrap(); upload.len()],
        )
        .unwrap()
    }

    pub(crate) fn graph(n: usize, edges: &[(usize, usize, f64)]) -> SocialGraph {
        SocialGraph::from_parts((0..n).map(|i| format!("u{i}")).collect(), edges.iter().copied()).unwrap()
    }

    fn asg(v: &[usize]) -> Assignment {
        Assignment::new(v.iter().map(|&c| CloudId(c)).collect())
    }

    #[test]
    fn cross_cloud_pair_shares_cost() {
        let g = graph(2, &[(0, 1, 4.0), (1, 0, 2.0)]);
        let m = model_with(&[vec![1.0, 0.0], vec![0.0, 1.0]], PricingMatrix::uniform(2, 1.0, 0.0));
        let p = Problem::new(&g, &m).unwrap();
        let a = asg(&[0, 1]);
        assert_eq!(p.replication_cost(UserId(0), &a), 3.0);
        assert_eq!(p.replication_cost(UserId(1), &a), 3.0);
        assert_eq!(p.total_replication_cost(&a), 6.0);

        let r = p.evaluate(&a, &ObjectiveParams::default());
        assert_eq!(r.inter_cloud_cost, 6.0);
        assert_eq!(r.inter_cloud_edge_count, 1);
        assert_eq!(r.per_cloud_user_counts.values().sum::<usize>(), 2);
    }

    #[test]
    fn single_cloud_costs_nothing() {
        let g = graph(3, &[(0, 1, 4.0), (1, 2, 2.0), (2, 0, 1.0)]);
        let m = model_with(&vec![vec![1.0, 0.0]; 3], PricingMatrix::uniform(2, 1.0, 0.0));
        let p = Problem::new(&g, &m).unwrap();
        let a = asg(&[1, 1, 1]);
        for u in g.users() {
            assert_eq!(p.replication_cost(u, &a), 0.0);
        }
        let r = p.evaluate(&a, &ObjectiveParams::default());
        assert_eq!((r.inter_cloud_cost, r.inter_cloud_edge_count), (0.0, 0));
        assert!(r.preference_satisfaction <= 3.0);
    }

    #[test]
    fn asymmetric_pricing() {
        let g = graph(2, &[(0, 1, 3.0), (1, 0, 5.0)]);
        let pricing = PricingMatrix::from_rows(vec![vec![0.0, 2.0], vec![0.0, 0.0]]).unwrap();
        let m = model_with(&[vec![1.0, 0.0], vec![0.0, 1.0]], pricing);
        let p = Problem::new(&g, &m).unwrap();
        assert_eq!(p.replication_cost(UserId(0), &asg(&[0, 1])), 3.0);
    }

    #[test]
    fn alpha_boundaries() {
        let g = graph(3, &[(0, 1, 4.0), (1, 2, 2.0)]);
        let m = model_with(&[vec![3.0, 1.0], vec![1.0, 1.0], vec![0.0, 2.0]], PricingMatrix::uniform(2, 1.0, 0.0));
        let p = Problem::new(&g, &m).unwrap();
        let a = asg(&[0, 1, 1]);
        let one = ObjectiveParams::new(1.0, 1.0).unwrap();
        assert_eq!(p.total_objective(&a, &one), p.preference_satisfaction(&a));
        let zero = ObjectiveParams::new(0.0, 2.5).unwrap();
        assert_eq!(p.total_objective(&a, &zero), -2.5 * p.total_replication_cost(&a));
        let raw = one.with_preference(PreferenceMode::Raw);
        assert_eq!(p.total_objective(&a, &raw), 3.0 + 1.0 + 2.0);
    }

    /// Hand-enumerated table for 2 users, 2 clouds, `e01 = 2`, `e10 = 1`,
    /// uniform price 1, raw psi(0) = (3, 1), psi(1) = (1, 2), alpha = 0.5,
    /// gamma = 1:
    ///
    /// | C0 C1 | pref | Y total | objective |
    /// | 0  0  | 3+1  | 0       | 2.0       |
    /// | 0  1  | 3+2  | 3       | 1.0       |
    /// | 1  0  | 1+1  | 3       | -0.5      |
    /// | 1  1  | 1+2  | 0       | 1.5       |
    #[test]
    fn two_user_enumeration_table() {
        let g = graph(2, &[(0, 1, 2.0), (1, 0, 1.0)]);
        let m = model_with(&[vec![3.0, 1.0], vec![1.0, 2.0]], PricingMatrix::uniform(2, 1.0, 0.0));
        let p = Problem::new(&g, &m).unwrap();
        let params = ObjectiveParams::new(0.5, 1.0).unwrap().with_preference(PreferenceMode::Raw);
        let expected = [([0, 0], 2.0), ([0, 1], 1.0), ([1, 0], -0.5), ([1, 1], 1.5)];
        for (a, want) in expected {
            assert!((p.total_objective(&asg(&a), &params) - want).abs() < 1e-12, "{a:?}");
        }
    }

    #[test]
    fn params_validation() {
        assert_eq!(ObjectiveParams::new(1.5, 1.0), Err(ObjectiveError::Alpha(1.5)));
        assert_eq!(ObjectiveParams::new(0.5, 0.0), Err(ObjectiveError::Gamma(0.0)));
        let a = asg(&[0, 3]);
        assert!(matches!(a.validate(2, 2), Err(ObjectiveError::UnknownCloud { user: 1, cloud: 3 })));
        assert!(matches!(a.validate(3, 4), Err(ObjectiveError::AssignmentSize { .. })));
    }

    pub(crate) fn arb_problem_parts() -> impl Strategy<Value = (SocialGraph, CloudModel, Assignment)> {
        (2usize..9, 1usize..5).prop_flat_map(|(n, k)| {
            (
                prop::collection::vec((0..n, 0..n, 0.0f64..10.0), 0..25),
                prop::collection::vec(prop::collection::vec(0.0f64..5.0, k), n),
                prop::collection::vec(0..k, n),
            )
                .prop_map(move |(edges, upload, host)| {
                    let edges: Vec<_> = edges.into_iter().filter(|e| e.0 != e.1).collect();
                    let g = graph(n, &edges);
                    let m = model_with(&upload, PricingMatrix::uniform(k, 1.0, 0.0));
                    (g, m, Assignment::new(host.into_iter().map(CloudId).collect()))
                })
        })
    }

    proptest! {
        #[test]
        fn halved_cost_matches_directed_metric((g, m, a) in arb_problem_parts()) {
            let p = Problem::new(&g, &m).unwrap();
            let y = p.total_replication_cost(&a);
            let c = p.inter_cloud_cost(&a);
            prop_assert!((y - c).abs() <= 1e-9 * c.max(1.0));
            prop_assert!(p.inter_cloud_edge_count(&a) <= g.n_connections());
            prop_assert!(p.preference_satisfaction(&a) <= g.n_users() as f64 + 1e-9);
        }

        #[test]
        fn single_move_delta_decomposes(
            (g, m, a) in arb_problem_parts(),
            pick in any::<prop::sample::Index>(),
            to in any::<prop::sample::Index>(),
            alpha in 0.0f64..=1.0,
        ) {
            let p = Problem::new(&g, &m).unwrap();
            let params = ObjectiveParams::new(alpha, 1.7).unwrap();
            let u = UserId(pick.index(g.n_users()));
            let d = CloudId(to.index(m.n_clouds()));
            let c = a.cloud(u);
            let mut b = a.clone();
            b.set(u, d);
            let before = p.total_objective(&a, &params);
            let after = p.total_objective(&b, &params);
            // Exact delta over u's incident connections, full (un-halved) pair costs.
            let dy: f64 = g.neighbors(u).iter().map(|nb| {
                let cw = a.cloud(nb.user);
                p.pair_cost(d, cw, nb.out_weight, nb.in_weight) - p.pair_cost(c, cw, nb.out_weight, nb.in_weight)
            }).sum();
            let predicted = alpha * (p.pref(u, d, params.preference) - p.pref(u, c, params.preference))
                - (1.0 - alpha) * params.gamma * dy;
            let scale = before.abs().max(after.abs()).max(1.0);
            prop_assert!(((after - before) - predicted).abs() <= 1e-9 * scale);
        }
    }
}
