use std::collections::VecDeque;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{GraphError, SocialGraph, UserId};

#[derive(Debug, Clone)]
pub struct BfsSample {
    pub graph: SocialGraph,
    /// Original ids of the sampled users, in discovery order.
    pub members: Vec<UserId>,
    /// The frontier ran dry before reaching the target size.
    pub self_contained: bool,
    /// Requested size exceeded the parent graph.
    pub target_exceeds_graph: bool,
}

/// Snowball sample from `seed_count` uniformly drawn seeds.
pub fn bfs_sample(
    graph: &SocialGraph,
    seed_count: usize,
    target_size: usize,
    rng_seed: u64,
) -> Result<BfsSample, GraphError> {
    if graph.is_empty() {
        return Err(GraphError::InvalidParameter("cannot sample an empty graph".into()));
    }
    if seed_count == 0 || seed_count > graph.n_users() {
        return Err(GraphError::InvalidParameter(format!(
            "seed_count must be in 1..={}, got {seed_count}",
            graph.n_users()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut seeds: Vec<UserId> = index::sample(&mut rng, graph.n_users(), seed_count)
        .into_iter()
        .map(UserId)
        .collect();
    seeds.sort();
    bfs_sample_from(graph, &seeds, target_size)
}

/// Breadth-first expansion over the undirected friend view from fixed seeds.
///
/// The frontier is FIFO and neighbors are enqueued in ascending id order.
/// Expansion stops as soon as `target_size` users are collected.
pub fn bfs_sample_from(
    graph: &SocialGraph,
    seeds: &[UserId],
    target_size: usize,
) -> Result<BfsSample, GraphError> {
    if seeds.is_empty() {
        return Err(GraphError::InvalidParameter("at least one seed is required".into()));
    }
    if target_size < seeds.len() {
        return Err(GraphError::InvalidParameter(format!(
            "target_size {target_size} is smaller than the seed count {}",
            seeds.len()
        )));
    }
    if let Some(bad) = seeds.iter().find(|s| s.0 >= graph.n_users()) {
        return Err(GraphError::UnknownUser(bad.0));
    }

    let mut seen = vec![false; graph.n_users()];
    let mut members = Vec::with_capacity(target_size.min(graph.n_users()));
    let mut queue = VecDeque::new();
    for &s in seeds {
        if !seen[s.0] {
            seen[s.0] = true;
            members.push(s);
            queue.push_back(s);
        }
    }

    'outer: while let Some(u) = queue.pop_front() {
        if members.len() >= target_size {
            break;
        }
        for v in graph.friends(u) {
            if members.len() >= target_size {
                break 'outer;
            }
            if !seen[v.0] {
                seen[v.0] = true;
                members.push(v);
                queue.push_back(v);
            }
        }
    }

    let self_contained = members.len() < target_size;
    Ok(BfsSample {
        graph: graph.induced_subgraph(&members),
        members,
        self_contained,
        target_exceeds_graph: target_size > graph.n_users(),
    })
}
