use crate::graph::{SocialGraph, UserId};

use super::{Affinity, CloudId, CloudModel};

/// `Q(u, c)`: sum over `u`'s friends of their best download level among `c`'s regions.
pub fn local_download_index(u: UserId, c: CloudId, graph: &SocialGraph, model: &CloudModel) -> f64 {
    let regions = model.regions_of(c);
    graph
        .friends(u)
        .map(|v| regions.iter().map(|&s| model.affinity().chi(v, s)).fold(0.0, f64::max))
        .sum()
}

/// `W(u, c)`: `u`'s best upload level among `c`'s regions, scaled by `K_u`.
pub fn local_upload_index(u: UserId, c: CloudId, model: &CloudModel) -> f64 {
    let best = model.regions_of(c).iter().map(|&s| model.affinity().chi_prime(u, s)).fold(0.0, f64::max);
    best * model.profile(u).upload_volume
}

/// `psi(u, c) = Q(u, c) + beta_u * W(u, c)`
pub fn preference(u: UserId, c: CloudId, graph: &SocialGraph, model: &CloudModel) -> f64 {
    local_download_index(u, c, graph, model) + model.profile(u).beta * local_upload_index(u, c, model)
}

/// `psi(u, c)` divided by the sum over all clouds; uniform when every `psi(u, .)` is zero.
pub fn normalized_preference(u: UserId, c: CloudId, graph: &SocialGraph, model: &CloudModel) -> f64 {
    let total: f64 = model.clouds().map(|d| preference(u, d, graph, model)).sum();
    if total > 0.0 {
        preference(u, c, graph, model) / total
    } else {
        1.0 / model.n_clouds() as f64
    }
}

/// Precomputed `psi` and its per-user normalization for every (user, cloud).
///
/// Built in `O(|E| * |C| + |V| * |R|)` by first reducing each user's affinity
/// row to a best level per cloud.
#[derive(Debug, Clone, PartialEq)]
pub struct PreferenceTable {
    n_clouds: usize,
    raw: Vec<f64>,
    normalized: Vec<f64>,
}

impl PreferenceTable {
    pub fn compute(graph: &SocialGraph, model: &CloudModel) -> Self {
        let n = graph.n_users();
        let k = model.n_clouds();
        let mut best_down = vec![0.0f64; n * k];
        let mut best_up = vec![0.0f64; n * k];

        for u in graph.users() {
            let down = &mut best_down[u.0 * k..(u.0 + 1) * k];
            let up = &mut best_up[u.0 * k..(u.0 + 1) * k];
            match model.affinity() {
                Affinity::Table(t) => {
                    for e in t.entries(u) {
                        let c = model.cloud_of(e.region).0;
                        down[c] = down[c].max(e.chi);
                        up[c] = up[c].max(e.chi_prime);
                    }
                }
                aff @ Affinity::Distance(_) => {
                    for s in (0..model.n_regions()).map(super::RegionId) {
                        let c = model.cloud_of(s).0;
                        down[c] = down[c].max(aff.chi(u, s));
                        up[c] = up[c].max(aff.chi_prime(u, s));
                    }
                }
            }
        }

        let mut raw = vec![0.0; n * k];
        for u in graph.users() {
            let profile = model.profile(u);
            let row = &mut raw[u.0 * k..(u.0 + 1) * k];
            for v in graph.friends(u) {
                for (dst, src) in row.iter_mut().zip(&best_down[v.0 * k..(v.0 + 1) * k]) {
                    *dst += src;
                }
            }
            for (dst, up) in row.iter_mut().zip(&best_up[u.0 * k..(u.0 + 1) * k]) {
                *dst += profile.beta * up * profile.upload_volume;
            }
        }

        let mut normalized = vec![0.0; n * k];
        for (src, dst) in raw.chunks(k).zip(normalized.chunks_mut(k)) {
            let total: f64 = src.iter().sum();
            for (d, s) in dst.iter_mut().zip(src) {
                *d = if total > 0.0 { s / total } else { 1.0 / k as f64 };
            }
        }

        Self { n_clouds: k, raw, normalized }
    }

    pub fn n_clouds(&self) -> usize {
        self.n_clouds
    }

    pub fn n_users(&self) -> usize {
        self.raw.len() / self.n_clouds.max(1)
    }

    #[inline]
    pub fn raw(&self, u: UserId, c: CloudId) -> f64 {
        self.raw[u.0 * self.n_clouds + c.0]
    }

    #[inline]
    pub fn normalized(&self, u: UserId, c: CloudId) -> f64 {
        self.normalized[u.0 * self.n_clouds + c.0]
    }

    pub fn raw_row(&self, u: UserId) -> &[f64] {
        &self.raw[u.0 * self.n_clouds..(u.0 + 1) * self.n_clouds]
    }

    pub fn normalized_row(&self, u: UserId) -> &[f64] {
        &self.normalized[u.0 * self.n_clouds..(u.0 + 1) * self.n_clouds]
    }

    /// Columns of the first `k` clouds. The normalized values keep their
    /// normalization over the full provider set, so satisfaction stays
    /// comparable when only some providers are available.
    pub fn restrict_to_first(&self, k: usize) -> Self {
        assert!(k >= 1 && k <= self.n_clouds, "cloud count {k} out of range");
        let cols = |v: &[f64]| v.chunks(self.n_clouds).flat_map(|row| row[..k].iter().copied()).collect();
        Self { n_clouds: k, raw: cols(&self.raw), normalized: cols(&self.normalized) }
    }

    /// Cloud maximizing raw `psi(u, .)`, lowest id on ties.
    pub fn argmax(&self, u: UserId) -> CloudId {
        let row = self.raw_row(u);
        let mut best = 0;
        for (c, &v) in row.iter().enumerate().skip(1) {
            if v > row[best] {
                best = c;
            }
        }
        CloudId(best)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cloud::{AffinityTable, DistanceAffinity, PricingMatrix, RegionId, UserProfile};
    use proptest::prelude::*;

    fn labels(prefix: &str, n: usize) -> Vec<String> {
        (0..n).map(|i| format!("{prefix}{i}")).collect()
    }

    /// u=0 with friends v1=1, v2=2; cloud 0 = {s0, s1}, cloud 1 = {s2}.
    fn fixture(k_u: f64, beta: f64) -> (SocialGraph, CloudModel) {
        let g = SocialGraph::from_parts(labels("u", 4), [(0, 1, 1.0), (2, 0, 1.0)]).unwrap();
        let mut t = AffinityTable::new(4);
        t.set(UserId(1), RegionId(0), 0.9, 0.0).unwrap();
        t.set(UserId(1), RegionId(1), 0.3, 0.0).unwrap();
        t.set(UserId(2), RegionId(0), 0.2, 0.0).unwrap();
        t.set(UserId(2), RegionId(1), 0.7, 0.0).unwrap();
        t.set(UserId(0), RegionId(0), 0.0, 0.2).unwrap();
        t.set(UserId(0), RegionId(1), 0.0, 0.8).unwrap();
        t.set(UserId(0), RegionId(2), 0.5, 0.6).unwrap();
        let profiles = (0..4).map(|_| UserProfile::new(k_u, beta, None).unwrap()).collect();
        let m = CloudModel::new(
            labels("c", 2),
            labels("s", 3),
            vec![CloudId(0), CloudId(0), CloudId(1)],
            PricingMatrix::uniform(2, 1.0, 0.0),
            Affinity::Table(t),
            profiles,
        )
        .unwrap();
        (g, m)
    }

    #[test]
    fn download_index_sums_best_friend_levels() {
        let (g, m) = fixture(5.0, 2.0);
        assert!((local_download_index(UserId(0), CloudId(0), &g, &m) - 1.6).abs() < 1e-12);
        // Isolated user 3.
        for c in m.clouds() {
            assert_eq!(local_download_index(UserId(3), c, &g, &m), 0.0);
        }
    }

    #[test]
    fn upload_index_scales_by_volume() {
        let (_, m) = fixture(5.0, 2.0);
        assert!((local_upload_index(UserId(0), CloudId(0), &m) - 4.0).abs() < 1e-12);
        // Single-region cloud is the degenerate max.
        assert!((local_upload_index(UserId(0), CloudId(1), &m) - 3.0).abs() < 1e-12);
        let (_, m0) = fixture(0.0, 2.0);
        for c in m0.clouds() {
            assert_eq!(local_upload_index(UserId(0), c, &m0), 0.0);
        }
    }

    #[test]
    fn preference_blends_indices() {
        let (g, m) = fixture(5.0, 2.0);
        assert!((preference(UserId(0), CloudId(0), &g, &m) - 9.6).abs() < 1e-12);
        let (g, m) = fixture(5.0, 0.0);
        assert_eq!(
            preference(UserId(0), CloudId(0), &g, &m),
            local_download_index(UserId(0), CloudId(0), &g, &m)
        );
        let (g, m) = fixture(0.0, 1.0);
        for c in m.clouds() {
            assert_eq!(preference(UserId(3), c, &g, &m), 0.0);
        }
    }

    #[test]
    fn constant_affinity_gives_degree_times_level() {
        let g = SocialGraph::from_parts(labels("u", 4), [(0, 1, 1.0), (0, 2, 1.0), (3, 0, 1.0)]).unwrap();
        let mut t = AffinityTable::new(4);
        for u in 0..4 {
            for s in 0..3 {
                t.set(UserId(u), RegionId(s), 0.4, 0.0).unwrap();
            }
        }
        let m = CloudModel::new(
            labels("c", 3),
            labels("s", 3),
            vec![CloudId(0), CloudId(1), CloudId(2)],
            PricingMatrix::uniform(3, 1.0, 0.0),
            Affinity::Table(t),
            vec![UserProfile::new(0.0, 1.0, None).unwrap(); 4],
        )
        .unwrap();
        for c in m.clouds() {
            assert!((local_download_index(UserId(0), c, &g, &m) - 1.2).abs() < 1e-12);
        }
    }

    fn psi_model(psi: &[f64]) -> (SocialGraph, CloudModel) {
        // One isolated user whose upload levels equal `psi` with K = beta = 1.
        let g = SocialGraph::from_parts(labels("u", 1), []).unwrap();
        let mut t = AffinityTable::new(1);
        for (s, &p) in psi.iter().enumerate() {
            t.set(UserId(0), RegionId(s), 0.0, p).unwrap();
        }
        let m = CloudModel::new(
            labels("c", psi.len()),
            labels("s", psi.len()),
            (0..psi.len()).map(CloudId).collect(),
            PricingMatrix::uniform(psi.len(), 1.0, 0.0),
            Affinity::Table(t),
            vec![UserProfile::new(1.0, 1.0, None).unwrap()],
        )
        .unwrap();
        (g, m)
    }

    #[test]
    fn normalization_cases() {
        let (g, m) = psi_model(&[2.0, 1.0, 1.0]);
        let got: Vec<f64> = m.clouds().map(|c| normalized_preference(UserId(0), c, &g, &m)).collect();
        assert_eq!(got, [0.5, 0.25, 0.25]);

        let (g, m) = psi_model(&[0.0, 0.0, 0.0]);
        for c in m.clouds() {
            assert_eq!(normalized_preference(UserId(0), c, &g, &m), 1.0 / 3.0);
        }

        let (g, m) = psi_model(&[0.3]);
        assert_eq!(normalized_preference(UserId(0), CloudId(0), &g, &m), 1.0);
    }

    #[test]
    fn argmax_ties_pick_lowest() {
        let (g, m) = psi_model(&[0.5, 0.5, 0.5]);
        assert_eq!(PreferenceTable::compute(&g, &m).argmax(UserId(0)), CloudId(0));
        let (g, m) = psi_model(&[0.1, 0.5, 0.5]);
        assert_eq!(PreferenceTable::compute(&g, &m).argmax(UserId(0)), CloudId(1));
    }

    #[test]
    fn distance_affinity_home_region_is_one() {
        let coords = [(0.0, 0.0), (0.0, 90.0)];
        let aff = DistanceAffinity::new(&coords, vec![Some(RegionId(1))], 1000.0).unwrap();
        let a = Affinity::Distance(aff);
        assert_eq!(a.chi(UserId(0), RegionId(1)), 1.0);
        let far = a.chi(UserId(0), RegionId(0));
        let expected = 1.0 / (1.0 + crate::cloud::haversine_km(coords[0], coords[1]) / 1000.0);
        assert!((far - expected).abs() < 1e-15);
    }

    /// Random instance: users, regions, clouds and a dense random affinity table.
    fn arb_instance() -> impl Strategy<Value = (SocialGraph, CloudModel)> {
        (2usize..8, 1usize..4, 0usize..4).prop_flat_map(|(n, k, extra)| {
            let r = k + extra;
            (
                prop::collection::vec((0..n, 0..n, 0.5f64..5.0), 0..20),
                prop::collection::vec(0..k, extra),
                prop::collection::vec((0.0f64..1.0, 0.0f64..1.0), n * r),
                prop::collection::vec((0.0f64..3.0, 0.0f64..2.0), n),
            )
                .prop_map(move |(edges, extra_clouds, aff, prof)| {
                    let g = SocialGraph::from_parts(labels("u", n), edges.into_iter().filter(|e| e.0 != e.1))
                        .unwrap();
                    let mut region_cloud: Vec<CloudId> = (0..k).map(CloudId).collect();
                    region_cloud.extend(extra_clouds.into_iter().map(CloudId));
                    let mut t = AffinityTable::new(n);
                    for (i, (chi, chip)) in aff.into_iter().enumerate() {
                        t.set(UserId(i / r), RegionId(i % r), chi, chip).unwrap();
                    }
                    let profiles = prof.into_iter().map(|(kk, b)| UserProfile::new(kk, b, None).unwrap()).collect();
                    let m = CloudModel::new(
                        labels("c", k),
                        labels("s", r),
                        region_cloud,
                        PricingMatrix::uniform(k, 1.0, 0.0),
                        Affinity::Table(t),
                        profiles,
                    )
                    .unwrap();
                    (g, m)
                })
        })
    }

    #[test]
    fn restriction_keeps_full_normalization() {
        let g = SocialGraph::from_parts(vec!["a".into(), "b".into()], [(0, 1, 1.0)]).unwrap();
        let m = crate::objective::tests::model_with(&[vec![1.0, 2.0, 1.0], vec![3.0, 0.0, 1.0]], PricingMatrix::uniform(3, 1.0, 0.0));
        let full = PreferenceTable::compute(&g, &m);
        let two = full.restrict_to_first(2);
        assert_eq!(two.n_clouds(), 2);
        for u in g.users() {
            assert_eq!(two.normalized_row(u), &full.normalized_row(u)[..2]);
            assert_eq!(two.raw_row(u), &full.raw_row(u)[..2]);
        }
        // Raw preference does not depend on which other clouds exist.
        let direct = PreferenceTable::compute(&g, &m.restrict_to_first(2).unwrap());
        for u in g.users() {
            assert_eq!(direct.raw_row(u), two.raw_row(u));
        }
    }

    proptest! {
        #[test]
        fn table_matches_direct_definition((g, m) in arb_instance()) {
            let t = PreferenceTable::compute(&g, &m);
            for u in g.users() {
                let mut sum = 0.0;
                for c in m.clouds() {
                    let direct = preference(u, c, &g, &m);
                    prop_assert!((t.raw(u, c) - direct).abs() <= 1e-9 * direct.max(1.0));
                    let norm = normalized_preference(u, c, &g, &m);
                    prop_assert!((t.normalized(u, c) - norm).abs() <= 1e-9);
                    sum += t.normalized(u, c);
                }
                prop_assert!((sum - 1.0).abs() <= 1e-9);
            }
        }

        #[test]
        fn scaling_chi_scales_q_and_keeps_argmax((g, m) in arb_instance(), scale in 0.1f64..10.0) {
            let mut scaled = AffinityTable::new(g.n_users());
            if let Affinity::Table(t) = m.affinity() {
                for u in g.users() {
                    for e in t.entries(u) {
                        scaled.set(u, e.region, e.chi * scale, e.chi_prime).unwrap();
                    }
                }
            }
            // Download-only users so the argmax depends on Q alone.
            let profiles = vec![UserProfile::new(0.0, 0.0, None).unwrap(); g.n_users()];
            let base = CloudModel::new(
                m.cloud_labels().to_vec(), m.region_labels().to_vec(),
                (0..m.n_regions()).map(|r| m.cloud_of(RegionId(r))).collect(),
                m.pricing().clone(), m.affinity().clone(), profiles.clone(),
            ).unwrap();
            let m2 = CloudModel::new(
                m.cloud_labels().to_vec(), m.region_labels().to_vec(),
                (0..m.n_regions()).map(|r| m.cloud_of(RegionId(r))).collect(),
                m.pricing().clone(), Affinity::Table(scaled), profiles,
            ).unwrap();
            let t1 = PreferenceTable::compute(&g, &base);
            let t2 = PreferenceTable::compute(&g, &m2);
            for u in g.users() {
                for c in m.clouds() {
                    let q1 = local_download_index(u, c, &g, &base);
                    let q2 = local_download_index(u, c, &g, &m2);
                    prop_assert!((q2 - scale * q1).abs() <= 1e-9 * q2.max(1.0));
                }
                let row1 = t1.raw_row(u);
                let best1 = row1.iter().cloned().fold(f64::MIN, f64::max);
                let a2 = t2.argmax(u);
                prop_assert!((row1[a2.0] - best1).abs() <= 1e-9 * best1.abs().max(1.0));
            }
        }

        #[test]
        fn adding_region_never_decreases_indices((g, m) in arb_instance(), levels in prop::collection::vec((0.0f64..1.0, 0.0f64..1.0), 8)) {
            // Append one region to cloud 0 with fresh affinities.
            let new_region = RegionId(m.n_regions());
            let mut grown = AffinityTable::new(g.n_users());
            if let Affinity::Table(t) = m.affinity() {
                for u in g.users() {
                    for e in t.entries(u) {
                        grown.set(u, e.region, e.chi, e.chi_prime).unwrap();
                    }
                    let (chi, chip) = levels[u.0 % levels.len()];
                    grown.set(u, new_region, chi, chip).unwrap();
                }
            }
            let mut region_labels = m.region_labels().to_vec();
            region_labels.push("extra".into());
            let mut region_cloud: Vec<CloudId> = (0..m.n_regions()).map(|r| m.cloud_of(RegionId(r))).collect();
            region_cloud.push(CloudId(0));
            let m2 = CloudModel::new(
                m.cloud_labels().to_vec(), region_labels, region_cloud,
                m.pricing().clone(), Affinity::Table(grown), m.profiles().to_vec(),
            ).unwrap();
            for u in g.users() {
                prop_assert!(local_download_index(u, CloudId(0), &g, &m2) >= local_download_index(u, CloudId(0), &g, &m));
                prop_assert!(local_upload_index(u, CloudId(0), &m2) >= local_upload_index(u, CloudId(0), &m));
            }
        }
    }
}
