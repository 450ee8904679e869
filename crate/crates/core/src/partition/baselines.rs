use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cloud::CloudId;
use crate::graph::UserId;
use crate::objective::{Assignment, ObjectiveParams, PreferenceMode, Problem};

use super::heuristic::{initial_hosting, run_heuristic, HeuristicParams, TerminationMode};
use super::PartitionError;

/// Every user on an independent, uniformly drawn cloud.
pub fn baseline_random(problem: &Problem<'_>, rng_seed: u64) -> Assignment {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let k = problem.n_clouds();
    Assignment::new((0..problem.n_users()).map(|_| CloudId(rng.random_range(0..k))).collect())
}

/// Every user on her argmax-preference cloud.
pub fn baseline_max_preference(problem: &Problem<'_>) -> Assignment {
    initial_hosting(problem)
}

/// Cost-only placement.
///
/// Runs the re-hosting pass with `alpha = 0` over the full connection list,
/// then, per connected component, collocates the whole component on its
/// cheapest cloud whenever that beats the heuristic's cost for it. With zero
/// intra-cloud prices every component ends at zero cost.
pub fn baseline_min_propagation(problem: &Problem<'_>) -> Result<Assignment, PartitionError> {
    let params = HeuristicParams {
        objective: ObjectiveParams { alpha: 0.0, gamma: 1.0, preference: PreferenceMode::Normalized },
        touched_budget: 1.0,
        termination: TerminationMode::Budget,
        ..HeuristicParams::default()
    };
    let mut assignment = run_heuristic(problem, &params)?.assignment;

    let graph = problem.graph();
    let model = problem.model();
    let comp = graph.components();
    let n_comp = comp.iter().copied().max().map_or(0, |m| m + 1);

    let mut internal_weight = vec![0.0; n_comp];
    let mut current_cost = vec![0.0; n_comp];
    for e in graph.edges() {
        let k = comp[e.src.0];
        internal_weight[k] += e.weight;
        current_cost[k] += model.pricing().get(assignment.cloud(e.src), assignment.cloud(e.dst)) * e.weight;
    }
    // Sum of normalized preference per (component, cloud) breaks cost ties.
    let kc = model.n_clouds();
    let mut comp_pref = vec![0.0; n_comp * kc];
    for u in graph.users() {
        for c in model.clouds() {
            comp_pref[comp[u.0] * kc + c.0] += problem.preferences().normalized(u, c);
        }
    }

    let mut target: Vec<Option<CloudId>> = vec![None; n_comp];
    for k in 0..n_comp {
        let mut best: Option<(f64, f64, CloudId)> = None;
        for c in model.clouds() {
            let cost = model.pricing().get(c, c) * internal_weight[k];
            let pref = comp_pref[k * kc + c.0];
            let better = match best {
                None => true,
                Some((bc, bp, _)) => cost < bc || (cost == bc && pref > bp),
            };
            if better {
                best = Some((cost, pref, c));
            }
        }
        let (cost, _, c) = best.expect("at least one cloud");
        if cost < current_cost[k] {
            target[k] = Some(c);
        }
    }
    for u in 0..graph.n_users() {
        if let Some(c) = target[comp[u]] {
            assignment.set(UserId(u), c);
        }
    }
    Ok(assignment)
}
