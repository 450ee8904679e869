//! Cloud providers, their regions, transfer pricing and user affinities.

mod io;
mod preference;

pub use io::{
    read_affinity_csv, read_pricing_csv, read_profiles_csv, read_regions_csv, write_pricing_csv,
    write_profiles_csv, write_regions_csv, RegionsFile,
};
pub use preference::{
    local_download_index, local_upload_index, normalized_preference, preference, PreferenceTable,
};

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{SocialGraph, UserId};

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("{file} line {line}: {message}")]
    Parse { file: &'static str, line: u64, message: String },
    #[error("unknown {kind} `{label}`")]
    UnknownLabel { kind: &'static str, label: String },
    #[error("duplicate {kind} `{label}`")]
    DuplicateLabel { kind: &'static str, label: String },
    #[error("cloud `{0}` has no regions")]
    EmptyCloud(String),
    #[error("pricing matrix is {rows}x{cols}, expected {expected}x{expected}")]
    PricingShape { rows: usize, cols: usize, expected: usize },
    #[error("invalid value: {0}")]
    InvalidValue(String),
    #[error("model has {profiles} user profiles but the graph has {users} users")]
    ProfileCount { profiles: usize, users: usize },
    #[error("io: {0}")]
    Io(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CloudId(pub usize);

impl CloudId {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for CloudId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "c{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct RegionId(pub usize);

impl RegionId {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

/// `p[c][d]`: price per unit of traffic replicated from cloud `c` to cloud `d`.
#[derive(Debug, Clone, PartialEq)]
pub struct PricingMatrix {
    n: usize,
    prices: Vec<f64>,
}

impl PricingMatrix {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self, ModelError> {
        let n = rows.len();
        let mut prices = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(ModelError::PricingShape { rows: n, cols: row.len(), expected: n });
            }
            for p in row {
                if !(p.is_finite() && p >= 0.0) {
                    return Err(ModelError::InvalidValue(format!("price {p} must be finite and >= 0")));
                }
                prices.push(p);
            }
        }
        Ok(Self { n, prices })
    }

    /// Every inter-cloud price is `inter`, every intra-cloud price is `intra`.
    pub fn uniform(n: usize, inter: f64, intra: f64) -> Self {
        let prices = (0..n * n).map(|k| if k / n == k % n { intra } else { inter }).collect();
        Self { n, prices }
    }

    pub fn n_clouds(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, from: CloudId, to: CloudId) -> f64 {
        self.prices[from.0 * self.n + to.0]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.prices.chunks(self.n.max(1)).take(self.n)
    }

    /// True when all off-diagonal prices are equal.
    pub fn is_uniform_inter(&self) -> bool {
        let mut off = (0..self.n * self.n).filter(|k| k / self.n != k % self.n).map(|k| self.prices[k]);
        match off.next() {
            None => true,
            Some(first) => off.all(|p| p == first),
        }
    }

    fn restrict(&self, k: usize) -> Self {
        let prices = (0..k).flat_map(|c| (0..k).map(move |d| (c, d))).map(|(c, d)| self.prices[c * self.n + d]).collect();
        Self { n: k, prices }
    }
}

/// Sparse per-user download (`chi`) and upload (`chi_prime`) preference levels.
/// Absent entries read as zero.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AffinityTable {
    rows: Vec<Vec<AffinityEntry>>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffinityEntry {
    pub region: RegionId,
    pub chi: f64,
    pub chi_prime: f64,
}

impl AffinityTable {
    pub fn new(n_users: usize) -> Self {
        Self { rows: vec![Vec::new(); n_users] }
    }

    pub fn set(&mut self, user: UserId, region: RegionId, chi: f64, chi_prime: f64) -> Result<(), ModelError> {
        for v in [chi, chi_prime] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(ModelError::InvalidValue(format!("affinity {v} must be finite and >= 0")));
            }
        }
        let row = &mut self.rows[user.0];
        match row.binary_search_by_key(&region, |e| e.region) {
            Ok(i) => row[i] = AffinityEntry { region, chi, chi_prime },
            Err(i) => row.insert(i, AffinityEntry { region, chi, chi_prime }),
        }
        Ok(())
    }

    pub fn entries(&self, user: UserId) -> &[AffinityEntry] {
        &self.rows[user.0]
    }

    fn get(&self, user: UserId, region: RegionId) -> Option<&AffinityEntry> {
        let row = &self.rows[user.0];
        row.binary_search_by_key(&region, |e| e.region).ok().map(|i| &row[i])
    }
}

/// Affinities derived from geography: each user sits in a home region and
/// `chi(v, s) = 1 / (1 + dist(home_v, s) / scale_km)`. Upload and download
/// levels coincide.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceAffinity {
    /// Number of candidate (column) regions.
    cols: usize,
    /// Row per home region, column per candidate region.
    kernel: Vec<f64>,
    home: Vec<Option<RegionId>>,
}

impl DistanceAffinity {
    pub fn new(coords: &[(f64, f64)], home: Vec<Option<RegionId>>, scale_km: f64) -> Result<Self, ModelError> {
        if !(scale_km > 0.0 && scale_km.is_finite()) {
            return Err(ModelError::InvalidValue(format!("distance scale {scale_km} must be > 0")));
        }
        let n = coords.len();
        if let Some(bad) = home.iter().flatten().find(|r| r.0 >= n) {
            return Err(ModelError::InvalidValue(format!("home region index {} out of range", bad.0)));
        }
        let mut kernel = vec![0.0; n * n];
        for (i, &a) in coords.iter().enumerate() {
            for (j, &b) in coords.iter().enumerate() {
                kernel[i * n + j] = 1.0 / (1.0 + haversine_km(a, b) / scale_km);
            }
        }
        Ok(Self { cols: n, kernel, home })
    }

    fn level(&self, user: UserId, region: RegionId) -> f64 {
        match self.home.get(user.0).copied().flatten() {
            Some(h) => self.kernel[h.0 * self.cols + region.0],
            None => 0.0,
        }
    }

    // Home rows keep their original numbering because a user's home may lie
    // in a dropped cloud; only the candidate columns are renumbered.
    fn restrict(&self, keep: &[RegionId]) -> Self {
        let rows = self.kernel.len() / self.cols.max(1);
        let m = keep.len();
        let mut kernel = vec![0.0; rows * m];
        for h in 0..rows {
            for (j, r) in keep.iter().enumerate() {
                kernel[h * m + j] = self.kernel[h * self.cols + r.0];
            }
        }
        Self { cols: m, kernel, home: self.home.clone() }
    }
}

/// Great-circle distance between `(lat, lon)` points in degrees.
pub fn haversine_km(a: (f64, f64), b: (f64, f64)) -> f64 {
    const EARTH_RADIUS_KM: f64 = 6371.0;
    let (lat1, lon1) = (a.0.to_radians(), a.1.to_radians());
    let (lat2, lon2) = (b.0.to_radians(), b.1.to_radians());
    let h = ((lat2 - lat1) / 2.0).sin().powi(2) + lat1.cos() * lat2.cos() * ((lon2 - lon1) / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_KM * h.sqrt().min(1.0).asin()
}

#[derive(Debug, Clone, PartialEq)]
pub enum Affinity {
    Table(AffinityTable),
    Distance(DistanceAffinity),
}

impl Affinity {
    pub fn chi(&self, user: UserId, region: RegionId) -> f64 {
        match self {
            Affinity::Table(t) => t.get(user, region).map_or(0.0, |e| e.chi),
            Affinity::Distance(d) => d.level(user, region),
        }
    }

    pub fn chi_prime(&self, user: UserId, region: RegionId) -> f64 {
        match self {
            Affinity::Table(t) => t.get(user, region).map_or(0.0, |e| e.chi_prime),
            Affinity::Distance(d) => d.level(user, region),
        }
    }

    fn restrict(&self, keep: &[RegionId], n_regions: usize) -> Self {
        match self {
            Affinity::Table(t) => {
                let mut remap = vec![None; n_regions];
                for (new, r) in keep.iter().enumerate() {
                    remap[r.0] = Some(RegionId(new));
                }
                let rows = t
                    .rows
                    .iter()
                    .map(|row| {
                        row.iter()
                            .filter_map(|e| remap[e.region.0].map(|region| AffinityEntry { region, ..*e }))
                            .collect()
                    })
                    .collect();
                Affinity::Table(AffinityTable { rows })
            }
            Affinity::Distance(d) => Affinity::Distance(d.restrict(keep)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UserProfile {
    /// `K_u`: expected content generated per period.
    pub upload_volume: f64,
    /// `beta_u`: weight of the upload index in the preference blend.
    pub beta: f64,
    pub region: Option<RegionId>,
}

impl UserProfile {
    pub fn new(upload_volume: f64, beta: f64, region: Option<RegionId>) -> Result<Self, ModelError> {
        if !(upload_volume.is_finite() && upload_volume >= 0.0) {
            return Err(ModelError::InvalidValue(format!("K_u {upload_volume} must be finite and >= 0")));
        }
        if !(beta.is_finite() && beta >= 0.0) {
            return Err(ModelError::InvalidValue(format!("beta_u {beta} must be finite and >= 0")));
        }
        Ok(Self { upload_volume, beta, region })
    }
}

/// `beta_u = 1` and `K_u` = mean outgoing propagation weight of `u`.
pub fn default_profiles(graph: &SocialGraph) -> Vec<UserProfile> {
    graph
        .users()
        .map(|u| UserProfile { upload_volume: graph.mean_out_weight(u), beta: 1.0, region: None })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct CloudModel {
    cloud_labels: Vec<String>,
    region_labels: Vec<String>,
    region_cloud: Vec<CloudId>,
    cloud_regions: Vec<Vec<RegionId>>,
    pricing: PricingMatrix,
    affinity: Affinity,
    profiles: Vec<UserProfile>,
}

impl CloudModel {
    pub fn new(
        cloud_labels: Vec<String>,
        region_labels: Vec<String>,
        region_cloud: Vec<CloudId>,
        pricing: PricingMatrix,
        affinity: Affinity,
        profiles: Vec<UserProfile>,
    ) -> Result<Self, ModelError> {
        let n_clouds = cloud_labels.len();
        if n_clouds == 0 {
            return Err(ModelError::InvalidValue("at least one cloud is required".into()));
        }
        check_unique("cloud", &cloud_labels)?;
        check_unique("region", &region_labels)?;
        if region_cloud.len() != region_labels.len() {
            return Err(ModelError::InvalidValue(format!(
                "{} region labels but {} region->cloud entries",
                region_labels.len(),
                region_cloud.len()
            )));
        }
        if pricing.n_clouds() != n_clouds {
            return Err(ModelError::PricingShape {
                rows: pricing.n_clouds(),
                cols: pricing.n_clouds(),
                expected: n_clouds,
            });
        }
        let mut cloud_regions = vec![Vec::new(); n_clouds];
        for (r, c) in region_cloud.iter().enumerate() {
            if c.0 >= n_clouds {
                return Err(ModelError::InvalidValue(format!("region {r} maps to unknown cloud {}", c.0)));
            }
            cloud_regions[c.0].push(RegionId(r));
        }
        if let Some(c) = cloud_regions.iter().position(Vec::is_empty) {
            return Err(ModelError::EmptyCloud(cloud_labels[c].clone()));
        }
        if let Some(bad) = profiles.iter().filter_map(|p| p.region).find(|r| r.0 >= region_labels.len()) {
            return Err(ModelError::InvalidValue(format!("profile references unknown region {}", bad.0)));
        }
        Ok(Self { cloud_labels, region_labels, region_cloud, cloud_regions, pricing, affinity, profiles })
    }

    pub fn n_clouds(&self) -> usize {
        self.cloud_labels.len()
    }

    pub fn n_regions(&self) -> usize {
        self.region_labels.len()
    }

    pub fn n_users(&self) -> usize {
        self.profiles.len()
    }

    pub fn clouds(&self) -> impl ExactSizeIterator<Item = CloudId> {
        (0..self.n_clouds()).map(CloudId)
    }

    pub fn cloud_label(&self, c: CloudId) -> &str {
        &self.cloud_labels[c.0]
    }

    pub fn cloud_labels(&self) -> &[String] {
        &self.cloud_labels
    }

    pub fn cloud_id(&self, label: &str) -> Option<CloudId> {
        self.cloud_labels.iter().position(|l| l == label).map(CloudId)
    }

    pub fn region_label(&self, r: RegionId) -> &str {
        &self.region_labels[r.0]
    }

    pub fn region_labels(&self) -> &[String] {
        &self.region_labels
    }

    pub fn region_id(&self, label: &str) -> Option<RegionId> {
        self.region_labels.iter().position(|l| l == label).map(RegionId)
    }

    /// `R_c`
    pub fn regions_of(&self, c: CloudId) -> &[RegionId] {
        &self.cloud_regions[c.0]
    }

    pub fn cloud_of(&self, r: RegionId) -> CloudId {
        self.region_cloud[r.0]
    }

    pub fn pricing(&self) -> &PricingMatrix {
        &self.pricing
    }

    pub fn affinity(&self) -> &Affinity {
        &self.affinity
    }

    pub fn profile(&self, u: UserId) -> &UserProfile {
        &self.profiles[u.0]
    }

    pub fn profiles(&self) -> &[UserProfile] {
        &self.profiles
    }

    /// Model with only the first `k` clouds and their regions. Region ids are
    /// renumbered; user home regions outside the kept set become `None`.
    pub fn restrict_to_first(&self, k: usize) -> Result<Self, ModelError> {
        if k == 0 || k > self.n_clouds() {
            return Err(ModelError::InvalidValue(format!(
                "cloud count {k} must be in 1..={}",
                self.n_clouds()
            )));
        }
        let keep: Vec<RegionId> =
            (0..self.n_regions()).map(RegionId).filter(|r| self.region_cloud[r.0].0 < k).collect();
        let mut remap = vec![None; self.n_regions()];
        for (new, r) in keep.iter().enumerate() {
            remap[r.0] = Some(RegionId(new));
        }
        let profiles = self
            .profiles
            .iter()
            .map(|p| UserProfile { region: p.region.and_then(|r| remap[r.0]), ..*p })
            .collect();
        Self::new(
            self.cloud_labels[..k].to_vec(),
            keep.iter().map(|r| self.region_labels[r.0].clone()).collect(),
            keep.iter().map(|r| self.region_cloud[r.0]).collect(),
            self.pricing.restrict(k),
            self.affinity.restrict(&keep, self.n_regions()),
            profiles,
        )
    }
}

impl CloudModel {
    /// Model over a user subset, e.g. a BFS sample. User `i` of the result is
    /// `members[i]` of `self`.
    pub fn restrict_to_users(&self, members: &[UserId]) -> Result<Self, ModelError> {
        if let Some(bad) = members.iter().find(|u| u.0 >= self.n_users()) {
            return Err(ModelError::InvalidValue(format!("user index {} out of range", bad.0)));
        }
        let affinity = match &self.affinity {
            Affinity::Table(t) => Affinity::Table(AffinityTable { rows: members.iter().map(|u| t.rows[u.0].clone()).collect() }),
            Affinity::Distance(d) => Affinity::Distance(DistanceAffinity {
                home: members.iter().map(|u| d.home.get(u.0).copied().flatten()).collect(),
                ..d.clone()
            }),
        };
        Self::new(
            self.cloud_labels.clone(),
            self.region_labels.clone(),
            self.region_cloud.clone(),
            self.pricing.clone(),
            affinity,
            members.iter().map(|u| self.profiles[u.0]).collect(),
        )
    }
}

fn check_unique(kind: &'static str, labels: &[String]) -> Result<(), ModelError> {
    let mut seen = std::collections::HashSet::new();
    for l in labels {
        if !seen.insert(l.as_str()) {
            return Err(ModelError::DuplicateLabel { kind, label: l.clone() });
        }
    }
    Ok(())
}
