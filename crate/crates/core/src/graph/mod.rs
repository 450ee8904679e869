//! Directed, propagation-weighted social graph.
//!
//! Users carry a dense internal index (`0..n`) and the opaque label they had in
//! the input. Edges are stored sorted by `(src, dst)` with three CSR indexes
//! on top: outgoing, incoming, and the undirected friend view used by the
//! preference and cost computations.

mod io;
mod sample;
mod synth;

pub use io::{read_edges_csv, read_graph_json, write_edges_csv, write_graph_json, SerializedGraph};
pub use sample::{bfs_sample, bfs_sample_from, BfsSample};
pub use synth::{synth_clustered_graph, synth_graph, SynthParams};

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GraphError {
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("line {line}: negative propagation weight {weight}")]
    NegativeWeight { line: u64, weight: f64 },
    #[error("line {line}: self-loop on user `{label}`")]
    SelfLoop { line: u64, label: String },
    #[error("edge references unknown user index {0}")]
    UnknownUser(usize),
    #[error("duplicate user label `{0}`")]
    DuplicateLabel(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("io: {0}")]
    Io(String),
}

/// Dense index of a user in a [`SocialGraph`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct UserId(pub usize);

impl UserId {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for UserId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "u{}", self.0)
    }
}

/// Expected reshares per accounting period from `src` to `dst`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagationEdge {
    pub src: UserId,
    pub dst: UserId,
    pub weight: f64,
}

/// One entry of the undirected friend view of user `u`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub user: UserId,
    /// `e_uw`, propagation from the owner of the list to `user`.
    pub out_weight: f64,
    /// `e_wu`, propagation from `user` back to the owner.
    pub in_weight: f64,
}

impl Neighbor {
    pub fn combined_weight(&self) -> f64 {
        self.out_weight + self.in_weight
    }
}

/// Unordered user pair with at least one edge between them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SocialConnection {
    /// Always the smaller id of the pair.
    pub a: UserId,
    pub b: UserId,
    /// `e_ab + e_ba`
    pub combined_weight: f64,
}

#[derive(Debug, Clone, Default)]
struct Csr {
    offsets: Vec<usize>,
}

impl Csr {
    fn range(&self, u: usize) -> std::ops::Range<usize> {
        self.offsets[u]..self.offsets[u + 1]
    }
}

#[derive(Debug, Clone)]
pub struct SocialGraph {
    labels: Vec<String>,
    index: HashMap<String, UserId>,
    /// Sorted by `(src, dst)`, so this doubles as the outgoing CSR payload.
    edges: Vec<PropagationEdge>,
    out_csr: Csr,
    in_csr: Csr,
    /// Edge indices ordered by `(dst, src)`.
    in_edges: Vec<usize>,
    nbr_csr: Csr,
    neighbors: Vec<Neighbor>,
}

impl PartialEq for SocialGraph {
    fn eq(&self, other: &Self) -> bool {
        self.labels == other.labels && self.edges == other.edges
    }
}

impl SocialGraph {
    /// Builds a graph from labels and `(src, dst, weight)` index triples.
    ///
    /// Duplicate ordered pairs are summed. Zero-degree users are kept.
    pub fn from_parts<I>(labels: Vec<String>, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let n = labels.len();
        let mut index = HashMap::with_capacity(n);
        for (i, label) in labels.iter().enumerate() {
            if index.insert(label.clone(), UserId(i)).is_some() {
                return Err(GraphError::DuplicateLabel(label.clone()));
            }
        }

        let mut raw: Vec<(usize, usize, f64)> = Vec::new();
        for (line, (s, d, w)) in edges.into_iter().enumerate() {
            let line = line as u64 + 1;
            if s >= n {
                return Err(GraphError::UnknownUser(s));
            }
            if d >= n {
                return Err(GraphError::UnknownUser(d));
            }
            if !w.is_finite() {
                return Err(GraphError::Parse { line, message: format!("non-finite weight {w}") });
            }
            if w < 0.0 {
                return Err(GraphError::NegativeWeight { line, weight: w });
            }
            if s == d {
                return Err(GraphError::SelfLoop { line, label: labels[s].clone() });
            }
            raw.push((s, d, w));
        }
        raw.sort_by_key(|x| (x.0, x.1));

        let mut edges: Vec<PropagationEdge> = Vec::with_capacity(raw.len());
        for (s, d, w) in raw {
            match edges.last_mut() {
                Some(last) if last.src.0 == s && last.dst.0 == d => last.weight += w,
                _ => edges.push(PropagationEdge { src: UserId(s), dst: UserId(d), weight: w }),
            }
        }

        Ok(Self::index_edges(labels, index, edges))
    }

    fn index_edges(
        labels: Vec<String>,
        index: HashMap<String, UserId>,
        edges: Vec<PropagationEdge>,
    ) -> Self {
        let n = labels.len();

        let mut out_offsets = vec![0usize; n + 1];
        let mut in_offsets = vec![0usize; n + 1];
        for e in &edges {
            out_offsets[e.src.0 + 1] += 1;
            in_offsets[e.dst.0 + 1] += 1;
        }
        for i in 0..n {
            out_offsets[i + 1] += out_offsets[i];
            in_offsets[i + 1] += in_offsets[i];
        }

        // Counting sort by dst keeps src ascending inside each bucket.
        let mut cursor = in_offsets.clone();
        let mut in_edges = vec![0usize; edges.len()];
        for (i, e) in edges.iter().enumerate() {
            in_edges[cursor[e.dst.0]] = i;
            cursor[e.dst.0] += 1;
        }

        let out_csr = Csr { offsets: out_offsets };
        let in_csr = Csr { offsets: in_offsets };

        let mut nbr_offsets = Vec::with_capacity(n + 1);
        nbr_offsets.push(0);
        let mut neighbors = Vec::with_capacity(edges.len());
        for u in 0..n {
            let outs = &edges[out_csr.range(u)];
            let ins = &in_edges[in_csr.range(u)];
            let (mut i, mut j) = (0, 0);
            while i < outs.len() || j < ins.len() {
                let out_id = outs.get(i).map(|e| e.dst.0);
                let in_id = ins.get(j).map(|&k| edges[k].src.0);
                let nb = match (out_id, in_id) {
                    (Some(a), Some(b)) if a == b => {
                        let nb = Neighbor {
                            user: UserId(a),
                            out_weight: outs[i].weight,
                            in_weight: edges[ins[j]].weight,
                        };
                        i += 1;
                        j += 1;
                        nb
                    }
                    (Some(a), Some(b)) if a < b => {
                        i += 1;
                        Neighbor { user: UserId(a), out_weight: outs[i - 1].weight, in_weight: 0.0 }
                    }
                    (Some(a), None) => {
                        i += 1;
                        Neighbor { user: UserId(a), out_weight: outs[i - 1].weight, in_weight: 0.0 }
                    }
                    (_, Some(b)) => {
                        j += 1;
                        Neighbor { user: UserId(b), out_weight: 0.0, in_weight: edges[ins[j - 1]].weight }
                    }
                    (None, None) => unreachable!(),
                };
                neighbors.push(nb);
            }
            nbr_offsets.push(neighbors.len());
        }

        Self {
            labels,
            index,
            edges,
            out_csr,
            in_csr,
            in_edges,
            nbr_csr: Csr { offsets: nbr_offsets },
            neighbors,
        }
    }

    pub fn n_users(&self) -> usize {
        self.labels.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn users(&self) -> impl ExactSizeIterator<Item = UserId> + '_ {
        (0..self.labels.len()).map(UserId)
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, u: UserId) -> &str {
        &self.labels[u.0]
    }

    pub fn user_id(&self, label: &str) -> Option<UserId> {
        self.index.get(label).copied()
    }

    /// All edges, sorted by `(src, dst)`.
    pub fn edges(&self) -> &[PropagationEdge] {
        &self.edges
    }

    pub fn out_edges(&self, u: UserId) -> &[PropagationEdge] {
        &self.edges[self.out_csr.range(u.0)]
    }

    pub fn in_edges(&self, u: UserId) -> impl Iterator<Item = &PropagationEdge> + '_ {
        self.in_edges[self.in_csr.range(u.0)].iter().map(|&i| &self.edges[i])
    }

    /// Undirected friend view `F_u`, sorted by neighbor id.
    pub fn neighbors(&self, u: UserId) -> &[Neighbor] {
        &self.neighbors[self.nbr_csr.range(u.0)]
    }

    pub fn friends(&self, u: UserId) -> impl ExactSizeIterator<Item = UserId> + '_ {
        self.neighbors(u).iter().map(|n| n.user)
    }

    /// `e_uv`, or 0 when there is no such edge.
    pub fn weight(&self, u: UserId, v: UserId) -> f64 {
        let outs = self.out_edges(u);
        outs.binary_search_by(|e| e.dst.cmp(&v)).map(|i| outs[i].weight).unwrap_or(0.0)
    }

    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.weight).sum()
    }

    pub fn mean_out_weight(&self, u: UserId) -> f64 {
        let outs = self.out_edges(u);
        if outs.is_empty() {
            0.0
        } else {
            outs.iter().map(|e| e.weight).sum::<f64>() / outs.len() as f64
        }
    }

    /// Unordered connections, ordered by `(a, b)`.
    pub fn connections(&self) -> Vec<SocialConnection> {
        let mut out = Vec::with_capacity(self.edges.len());
        for a in self.users() {
            for nb in self.neighbors(a) {
                if nb.user > a {
                    out.push(SocialConnection { a, b: nb.user, combined_weight: nb.combined_weight() });
                }
            }
        }
        out
    }

    pub fn n_connections(&self) -> usize {
        // Each connection appears once in each endpoint's friend list.
        self.neighbors.len() / 2
    }

    /// Subgraph induced by `users`, renumbered in the given order.
    pub fn induced_subgraph(&self, users: &[UserId]) -> SocialGraph {
        let mut remap = vec![usize::MAX; self.n_users()];
        for (new, u) in users.iter().enumerate() {
            remap[u.0] = new;
        }
        let labels: Vec<String> = users.iter().map(|&u| self.labels[u.0].clone()).collect();
        let index = labels.iter().enumerate().map(|(i, l)| (l.clone(), UserId(i))).collect();
        let mut edges: Vec<PropagationEdge> = self
            .edges
            .iter()
            .filter(|e| remap[e.src.0] != usize::MAX && remap[e.dst.0] != usize::MAX)
            .map(|e| PropagationEdge {
                src: UserId(remap[e.src.0]),
                dst: UserId(remap[e.dst.0]),
                weight: e.weight,
            })
            .collect();
        edges.sort_by_key(|x| (x.src, x.dst));
        Self::index_edges(labels, index, edges)
    }

    /// Connected components of the undirected view; `result[u]` is the
    /// component index, numbered in order of smallest member.
    pub fn components(&self) -> Vec<usize> {
        let n = self.n_users();
        let mut comp = vec![usize::MAX; n];
        let mut next = 0;
        let mut stack = Vec::new();
        for start in 0..n {
            if comp[start] != usize::MAX {
                continue;
            }
            comp[start] = next;
            stack.push(start);
            while let Some(u) = stack.pop() {
                for nb in self.neighbors(UserId(u)) {
                    if comp[nb.user.0] == usize::MAX {
                        comp[nb.user.0] = next;
                        stack.push(nb.user.0);
                    }
                }
            }
            next += 1;
        }
        comp
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(names: &[&str]) -> Vec<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    fn abc() -> SocialGraph {
        SocialGraph::from_parts(labels(&["A", "B", "C"]), [(0, 1, 4.0), (1, 0, 2.0), (1, 2, 1.0)]).unwrap()
    }

    #[test]
    fn friends_span_both_directions() {
        let g = abc();
        assert_eq!(g.n_users(), 3);
        assert_eq!(g.n_edges(), 3);
        let b = g.user_id("B").unwrap();
        let f: Vec<&str> = g.friends(b).map(|u| g.label(u)).collect();
        assert_eq!(f, ["A", "C"]);
        assert_eq!(g.n_connections(), 2);
        let nb = g.neighbors(b)[0];
        assert_eq!((nb.out_weight, nb.in_weight), (2.0, 4.0));
    }

    #[test]
    fn duplicates_sum() {
        let g = SocialGraph::from_parts(labels(&["A", "B"]), [(0, 1, 1.0), (0, 1, 2.0)]).unwrap();
        assert_eq!(g.n_edges(), 1);
        assert_eq!(g.weight(UserId(0), UserId(1)), 3.0);
    }

    #[test]
    fn rejects_self_loop_and_negative() {
        let e = SocialGraph::from_parts(labels(&["A"]), [(0, 0, 5.0)]).unwrap_err();
        assert!(matches!(e, GraphError::SelfLoop { .. }));
        let e = SocialGraph::from_parts(labels(&["A", "B"]), [(0, 1, -1.0)]).unwrap_err();
        assert!(matches!(e, GraphError::NegativeWeight { .. }));
    }

    #[test]
    fn isolated_users_kept() {
        let g = SocialGraph::from_parts(labels(&["A", "B", "Z"]), [(0, 1, 1.0)]).unwrap();
        assert_eq!(g.n_users(), 3);
        assert!(g.neighbors(UserId(2)).is_empty());
        assert_eq!(g.components(), vec![0, 0, 1]);
    }

    #[test]
    fn connections_combine_directions() {
        let g = abc();
        let c = g.connections();
        assert_eq!(c.len(), 2);
        assert_eq!((c[0].a, c[0].b, c[0].combined_weight), (UserId(0), UserId(1), 6.0));
        assert_eq!(c[1].combined_weight, 1.0);
    }

    #[test]
    fn induced_subgraph_keeps_internal_edges() {
        let g = abc();
        let s = g.induced_subgraph(&[UserId(2), UserId(1)]);
        assert_eq!(s.labels(), ["C", "B"]);
        assert_eq!(s.n_edges(), 1);
        assert_eq!(s.weight(UserId(1), UserId(0)), 1.0);
    }
}
