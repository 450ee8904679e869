use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::objective::ObjectiveParams;
use crate::partition::{HeuristicParams, PhiMode, TerminationMode, DEFAULT_BRUTE_FORCE_CAP};

use super::ExperimentError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Heuristic,
    Random,
    MinPropagation,
    MaxPreference,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] =
        [Algorithm::Heuristic, Algorithm::Random, Algorithm::MinPropagation, Algorithm::MaxPreference];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Heuristic => "heuristic",
            Algorithm::Random => "random",
            Algorithm::MinPropagation => "min_propagation",
            Algorithm::MaxPreference => "max_preference",
        }
    }

    pub fn parse(s: &str) -> Result<Self, ExperimentError> {
        Self::ALL
            .into_iter()
            .find(|a| a.name() == s || a.name().replace('_', "-") == s)
            .ok_or_else(|| ExperimentError::Config(format!("unknown algorithm `{s}`")))
    }
}

/// Synthetic stand-in for a trace: regions scattered over a lat/lon box,
/// each randomly owned by one cloud, users homed in uniformly drawn regions
/// with friendships concentrated inside a region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthScenario {
    pub n_users: usize,
    pub mean_degree: f64,
    pub weight_tail_exponent: f64,
    /// Probability that a friendship stays inside the user's home region.
    pub locality: f64,
    pub n_regions: usize,
    pub n_clouds: usize,
    pub lat_range: (f64, f64),
    pub lon_range: (f64, f64),
    /// Distance at which affinity halves.
    pub distance_scale_km: f64,
    pub beta: f64,
}

impl Default for SynthScenario {
    fn default() -> Self {
        Self {
            n_users: 20_000,
            mean_degree: 10.0,
            weight_tail_exponent: 1.8,
            locality: 0.7,
            n_regions: 80,
            n_clouds: 6,
            lat_range: (20.0, 50.0),
            lon_range: (75.0, 135.0),
            distance_scale_km: 100.0,
            beta: 1.0,
        }
    }
}

/// Preprocessed inputs. Only `edges` and `regions` are required. Without an
/// affinity file the regions need coordinates and the profiles need home
/// regions, and affinities decay with distance from home.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputFiles {
    pub edges: PathBuf,
    pub regions: PathBuf,
    #[serde(default)]
    pub pricing: Option<PathBuf>,
    #[serde(default)]
    pub affinity: Option<PathBuf>,
    #[serde(default)]
    pub profiles: Option<PathBuf>,
    #[serde(default = "default_scale_km")]
    pub distance_scale_km: f64,
}

fn default_scale_km() -> f64 {
    SynthScenario::default().distance_scale_km
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataSource {
    Synth(SynthScenario),
    Files(InputFiles),
}

impl Default for DataSource {
    fn default() -> Self {
        DataSource::Synth(SynthScenario::default())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SampleConfig {
    pub seeds: usize,
    pub target_size: usize,
}

impl Default for SampleConfig {
    fn default() -> Self {
        Self { seeds: 10, target_size: 20_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleConfig {
    pub n_users: usize,
    pub n_clouds: usize,
    pub edge_counts: Vec<usize>,
    pub instances: usize,
    /// Falls back to the top-level `alpha`.
    pub alpha: Option<f64>,
    pub weight_tail_exponent: f64,
    /// Oracle instances are tiny, so the heuristic may look at every connection.
    pub touched_budget: f64,
    pub cap: u64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            n_users: 10,
            n_clouds: 3,
            edge_counts: vec![10, 20, 30, 40, 50],
            instances: 20,
            alpha: None,
            weight_tail_exponent: 1.8,
            touched_budget: 1.0,
            cap: DEFAULT_BRUTE_FORCE_CAP,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub data: DataSource,
    /// Optional BFS snowball sample taken after loading.
    pub sample: Option<SampleConfig>,
    pub alphas: Vec<f64>,
    pub cloud_counts: Vec<usize>,
    pub algorithms: Vec<Algorithm>,
    /// Weight used by `partition` and `sweep-providers`.
    pub alpha: f64,
    pub gamma: f64,
    pub eta: f64,
    pub touched_budget: f64,
    pub termination: TerminationMode,
    pub phi: PhiMode,
    pub rng_seed: u64,
    /// Independent scenarios per sweep, seeded `rng_seed`, `rng_seed + 1`, ...
    pub replicates: usize,
    pub output_dir: PathBuf,
    pub oracle: OracleConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            data: DataSource::default(),
            sample: None,
            alphas: vec![0.0, 0.25, 0.5, 0.75, 1.0],
            cloud_counts: (1..=6).collect(),
            algorithms: Algorithm::ALL.to_vec(),
            alpha: 0.5,
            gamma: 0.02,
            eta: 0.0,
            touched_budget: 0.2,
            termination: TerminationMode::Both,
            phi: PhiMode::Exact,
            rng_seed: 1,
            replicates: 1,
            output_dir: PathBuf::from("out"),
            oracle: OracleConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_json_str(s: &str) -> Result<Self, ExperimentError> {
        let cfg: Self = serde_json::from_str(s).map_err(|e| ExperimentError::Config(e.to_string()))?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ExperimentError> {
        let text = std::fs::read_to_string(path).map_err(|e| ExperimentError::io(path, e))?;
        Self::from_json_str(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn heuristic_params(&self, alpha: f64) -> HeuristicParams {
        HeuristicParams {
            objective: ObjectiveParams { alpha, gamma: self.gamma, ..ObjectiveParams::default() },
            eta: self.eta,
            touched_budget: self.touched_budget,
            termination: self.termination,
            phi: self.phi,
        }
    }

    /// Checks everything that can be checked without loading data.
    pub fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |m: String| Err(ExperimentError::Config(m));
        for &a in self.alphas.iter().chain(std::iter::once(&self.alpha)) {
            if !(0.0..=1.0).contains(&a) {
                return bad(format!("alpha {a} is outside [0, 1]"));
            }
        }
        if self.cloud_counts.contains(&0) {
            return bad("cloud counts must be >= 1".into());
        }
        if self.algorithms.is_empty() {
            return bad("at least one algorithm is required".into());
        }
        if self.replicates == 0 {
            return bad("replicates must be >= 1".into());
        }
        self.heuristic_params(self.alpha).validate()?;
        if let DataSource::Synth(s) = &self.data {
            if s.n_regions < s.n_clouds {
                return bad(format!("{} regions cannot cover {} clouds", s.n_regions, s.n_clouds));
            }
            if s.n_clouds == 0 {
                return bad("synthetic scenario needs at least one cloud".into());
            }
            if !(s.lat_range.0 <= s.lat_range.1 && s.lon_range.0 <= s.lon_range.1) {
                return bad("lat/lon ranges must be ordered (min, max)".into());
            }
        }
        if let Some(s) = &self.sample {
            if s.seeds == 0 || s.target_size < s.seeds {
                return bad(format!("sample needs 1 <= seeds <= target_size, got {} and {}", s.seeds, s.target_size));
            }
        }
        let o = &self.oracle;
        if o.n_users < 2 || o.n_clouds == 0 {
            return bad("oracle instances need >= 2 users and >= 1 cloud".into());
        }
        let max_edges = o.n_users * (o.n_users - 1);
        if let Some(m) = o.edge_counts.iter().find(|&&m| m > max_edges) {
            return bad(format!("{m} directed edges do not fit on {} users", o.n_users));
        }
        if let Some(a) = o.alpha.filter(|a| !(0.0..=1.0).contains(a)) {
            return bad(format!("oracle alpha {a} is outside [0, 1]"));
        }
        Ok(())
    }
}
