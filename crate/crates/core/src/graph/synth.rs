use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use super::{GraphError, SocialGraph};

#[derive(Debug, Clone, PartialEq)]
pub struct SynthParams {
    pub n_users: usize,
    /// Expected out-degree.
    pub mean_degree: f64,
    /// Exponent `s` of the weight law `P(w = k) ~ k^-s`, `k >= 1`.
    pub weight_tail_exponent: f64,
    pub rng_seed: u64,
}

impl SynthParams {
    pub fn new(n_users: usize, mean_degree: f64, weight_tail_exponent: f64, rng_seed: u64) -> Self {
        Self { n_users, mean_degree, weight_tail_exponent, rng_seed }
    }

    fn validate(&self) -> Result<(), GraphError> {
        let (n, d, s) = (self.n_users, self.mean_degree, self.weight_tail_exponent);
        if n < 2 {
            return Err(GraphError::InvalidParameter(format!("n_users must be >= 2, got {n}")));
        }
        if !(d > 0.0 && d.is_finite()) {
            return Err(GraphError::InvalidParameter(format!("mean_degree must be > 0, got {d}")));
        }
        if !(s > 1.0 && s.is_finite()) {
            return Err(GraphError::InvalidParameter(format!("weight_tail_exponent must be > 1, got {s}")));
        }
        Ok(())
    }
}

/// Directed G(n, p) with heavy-tailed integer propagation weights.
///
/// Ordered pairs are visited with geometric skips, so generation is linear in
/// the number of edges produced. Weights follow `P(w >= k) = k^-(s-1)`.
pub fn synth_graph(params: &SynthParams) -> Result<SocialGraph, GraphError> {
    params.validate()?;
    let SynthParams { n_users: n, mean_degree, weight_tail_exponent: s, rng_seed } = *params;

    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let p = (mean_degree / (n - 1) as f64).min(1.0);
    let slots = (n as u64) * (n as u64 - 1);
    let log_q = (1.0 - p).ln();
    let tail = 1.0 / (s - 1.0);

    let mut edges = Vec::with_capacity((p * slots as f64 * 1.05) as usize + 16);
    let mut k: u64 = 0;
    loop {
        if p < 1.0 {
            let u: f64 = 1.0 - rng.random::<f64>();
            let skip = (u.ln() / log_q).floor();
            if skip >= (slots - k) as f64 {
                break;
            }
            k += skip as u64;
        }
        if k >= slots {
            break;
        }
        let src = (k / (n as u64 - 1)) as usize;
        let j = (k % (n as u64 - 1)) as usize;
        let dst = if j < src { j } else { j + 1 };
        edges.push((src, dst, draw_weight(&mut rng, tail)));
        k += 1;
    }

    let labels = (0..n).map(|i| format!("u{i}")).collect();
    SocialGraph::from_parts(labels, edges)
}

fn draw_weight(rng: &mut ChaCha8Rng, tail: f64) -> f64 {
    let u: f64 = 1.0 - rng.random::<f64>();
    u.powf(-tail).floor().min(1e12)
}

/// Graph whose friendships concentrate inside groups (home regions).
///
/// Each user draws a Poisson(`mean_degree`) out-degree. Every out-edge picks
/// a uniform member of the user's own group with probability `locality`, and
/// a uniform user otherwise. Repeated targets are redrawn a bounded number of
/// times, so the realised degree can fall slightly short on tiny groups.
pub fn synth_clustered_graph(params: &SynthParams, group: &[usize], locality: f64) -> Result<SocialGraph, GraphError> {
    params.validate()?;
    let SynthParams { n_users: n, mean_degree, weight_tail_exponent: s, rng_seed } = *params;
    if group.len() != n {
        return Err(GraphError::InvalidParameter(format!("{} group labels for {n} users", group.len())));
    }
    if !(0.0..=1.0).contains(&locality) {
        return Err(GraphError::InvalidParameter(format!("locality must be in [0, 1], got {locality}")));
    }
    let n_groups = group.iter().copied().max().map_or(0, |g| g + 1);
    let mut members = vec![Vec::new(); n_groups];
    for (u, &g) in group.iter().enumerate() {
        members[g].push(u);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let degree = Poisson::new(mean_degree.min((n - 1) as f64))
        .map_err(|e| GraphError::InvalidParameter(e.to_string()))?;
    let tail = 1.0 / (s - 1.0);
    let mut edges = Vec::with_capacity((n as f64 * mean_degree * 1.05) as usize + 16);
    let mut targets: Vec<usize> = Vec::new();
    for src in 0..n {
        let d = (degree.sample(&mut rng) as usize).min(n - 1);
        let own = &members[group[src]];
        targets.clear();
        let mut attempts = 0;
        while targets.len() < d && attempts < 4 * d + 8 {
            attempts += 1;
            let dst = if own.len() > 1 && rng.random::<f64>() < locality {
                own[rng.random_range(0..own.len())]
            } else {
                rng.random_range(0..n)
            };
            if dst != src && !targets.contains(&dst) {
                targets.push(dst);
            }
        }
        for &dst in &targets {
            edges.push((src, dst, draw_weight(&mut rng, tail)));
        }
    }

    let labels = (0..n).map(|i| format!("u{i}")).collect();
    SocialGraph::from_parts(labels, edges)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edge_count_tracks_mean_degree() {
        let mut total = 0usize;
        for seed in 0..30 {
            let g = synth_graph(&SynthParams::new(1000, 10.0, 2.0, seed)).unwrap();
            let m = g.n_edges() as f64;
            assert!((m - 10_000.0).abs() <= 2_000.0, "seed {seed}: {m}");
            total += g.n_edges();
        }
        let mean = total as f64 / 30.0;
        assert!((mean - 10_000.0).abs() < 200.0, "{mean}");
    }

    #[test]
    fn weights_are_heavy_tailed() {
        let g = synth_graph(&SynthParams::new(1000, 10.0, 2.0, 5)).unwrap();
        let mut w: Vec<f64> = g.connections().iter().map(|c| c.combined_weight).collect();
        w.sort_by(|a, b| b.total_cmp(a));
        let top: f64 = w[..w.len() / 10].iter().sum();
        let all: f64 = w.iter().sum();
        assert!(top / all > 0.5, "top decile carries {}", top / all);
        assert!(w.iter().all(|&x| x >= 1.0));
    }

    #[test]
    fn clustered_keeps_most_edges_inside_groups() {
        let n = 2000;
        let group: Vec<usize> = (0..n).map(|u| u % 40).collect();
        let g = synth_clustered_graph(&SynthParams::new(n, 8.0, 2.0, 3), &group, 0.8).unwrap();
        let inside = g.edges().iter().filter(|e| group[e.src.0] == group[e.dst.0]).count() as f64;
        let frac = inside / g.n_edges() as f64;
        // 0.8 local plus 1/40 of the uniform draws.
        assert!((frac - 0.805).abs() < 0.02, "{frac}");
        assert!((g.n_edges() as f64 / n as f64 - 8.0).abs() < 0.3);
        assert!(g.edges().iter().all(|e| e.src != e.dst));

        let uniform = synth_clustered_graph(&SynthParams::new(n, 8.0, 2.0, 3), &group, 0.0).unwrap();
        let inside = uniform.edges().iter().filter(|e| group[e.src.0] == group[e.dst.0]).count() as f64;
        assert!(inside / (uniform.n_edges() as f64) < 0.05);
    }

    #[test]
    fn clustered_rejects_bad_input() {
        let p = SynthParams::new(10, 2.0, 2.0, 0);
        assert!(synth_clustered_graph(&p, &[0; 9], 0.5).is_err());
        assert!(synth_clustered_graph(&p, &[0; 10], 1.5).is_err());
        let a = synth_clustered_graph(&p, &[0; 10], 1.0).unwrap();
        assert_eq!(a, synth_clustered_graph(&p, &[0; 10], 1.0).unwrap());
    }

    #[test]
    fn two_users_boundary() {
        for seed in 0..20 {
            let g = synth_graph(&SynthParams::new(2, 5.0, 2.5, seed)).unwrap();
            assert!(g.n_edges() <= 2);
            assert!(g.edges().iter().all(|e| e.src != e.dst));
        }
        // p saturates at 1: both ordered pairs present.
        assert_eq!(synth_graph(&SynthParams::new(2, 5.0, 2.5, 0)).unwrap().n_edges(), 2);
    }

    #[test]
    fn deterministic_and_validated() {
        let p = SynthParams::new(500, 4.0, 2.2, 77);
        assert_eq!(synth_graph(&p).unwrap(), synth_graph(&p).unwrap());
        assert!(synth_graph(&SynthParams::new(1, 4.0, 2.0, 0)).is_err());
        assert!(synth_graph(&SynthParams::new(10, 0.0, 2.0, 0)).is_err());
        assert!(synth_graph(&SynthParams::new(10, 2.0, 1.0, 0)).is_err());
    }
}
