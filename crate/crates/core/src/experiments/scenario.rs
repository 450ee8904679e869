use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cloud::{
    default_profiles, read_affinity_csv, read_pricing_csv, read_profiles_csv, read_regions_csv, Affinity,
    CloudId, CloudModel, DistanceAffinity, PricingMatrix, RegionId, RegionsFile, UserProfile,
};
use crate::graph::{bfs_sample, read_edges_csv, synth_clustered_graph, SocialGraph, SynthParams};

use super::config::{DataSource, ExperimentConfig, InputFiles, SynthScenario};
use super::ExperimentError;

/// A loaded graph with its cloud model.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub graph: SocialGraph,
    pub model: CloudModel,
    pub regions: RegionsFile,
}

impl Scenario {
    /// Loads or generates the configured data, then applies the optional
    /// BFS sample. `rng_seed` drives both generation and sampling.
    pub fn build(cfg: &ExperimentConfig, rng_seed: u64) -> Result<Self, ExperimentError> {
        let scenario = match &cfg.data {
            DataSource::Synth(s) => synth_scenario(s, rng_seed)?,
            DataSource::Files(f) => load_files(f)?,
        };
        match &cfg.sample {
            None => Ok(scenario),
            Some(s) => {
                let sample = bfs_sample(&scenario.graph, s.seeds, s.target_size, rng_seed)?;
                let model = scenario.model.restrict_to_users(&sample.members)?;
                Ok(Scenario { graph: sample.graph, model, regions: scenario.regions })
            }
        }
    }
}

pub fn synth_scenario(s: &SynthScenario, rng_seed: u64) -> Result<Scenario, ExperimentError> {
    if s.n_clouds == 0 || s.n_regions < s.n_clouds {
        return Err(ExperimentError::Config(format!("{} regions cannot cover {} clouds", s.n_regions, s.n_clouds)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);

    let coords: Vec<(f64, f64)> = (0..s.n_regions)
        .map(|_| (rng.random_range(s.lat_range.0..=s.lat_range.1), rng.random_range(s.lon_range.0..=s.lon_range.1)))
        .collect();
    // The first `n_clouds` regions of a shuffled order guarantee every cloud
    // owns at least one region; the rest are assigned uniformly.
    let mut order: Vec<usize> = (0..s.n_regions).collect();
    order.shuffle(&mut rng);
    let mut region_cloud = vec![CloudId(0); s.n_regions];
    for (i, &r) in order.iter().enumerate() {
        region_cloud[r] = CloudId(if i < s.n_clouds { i } else { rng.random_range(0..s.n_clouds) });
    }
    // Number clouds by first appearance in region order, as the regions file
    // reader does, so written scenarios reload with the same cloud ids.
    let mut renumber = vec![None; s.n_clouds];
    let mut next = 0;
    for c in region_cloud.iter_mut() {
        *c = *renumber[c.0].get_or_insert_with(|| {
            next += 1;
            CloudId(next - 1)
        });
    }
    let home: Vec<usize> = (0..s.n_users).map(|_| rng.random_range(0..s.n_regions)).collect();
    let graph_seed: u64 = rng.random();

    let params = SynthParams::new(s.n_users, s.mean_degree, s.weight_tail_exponent, graph_seed);
    let graph = synth_clustered_graph(&params, &home, s.locality)?;

    let width = s.n_regions.saturating_sub(1).to_string().len();
    let regions = RegionsFile {
        region_labels: (0..s.n_regions).map(|r| format!("r{r:0width$}")).collect(),
        cloud_labels: (0..s.n_clouds).map(|c| format!("cloud{c}")).collect(),
        region_cloud,
        coords: Some(coords),
    };
    let profiles: Vec<UserProfile> = default_profiles(&graph)
        .into_iter()
        .zip(&home)
        .map(|(p, &h)| UserProfile { beta: s.beta, region: Some(RegionId(h)), ..p })
        .collect();
    let affinity = DistanceAffinity::new(
        regions.coords.as_deref().unwrap_or_default(),
        profiles.iter().map(|p| p.region).collect(),
        s.distance_scale_km,
    )?;
    let model = CloudModel::new(
        regions.cloud_labels.clone(),
        regions.region_labels.clone(),
        regions.region_cloud.clone(),
        PricingMatrix::uniform(s.n_clouds, 1.0, 0.0),
        Affinity::Distance(affinity),
        profiles,
    )?;
    Ok(Scenario { graph, model, regions })
}

fn open(path: &Path) -> Result<BufReader<File>, ExperimentError> {
    File::open(path).map(BufReader::new).map_err(|e| ExperimentError::io(path, e))
}

pub fn load_files(f: &InputFiles) -> Result<Scenario, ExperimentError> {
    let graph = read_edges_csv(open(&f.edges)?).map_err(|e| ExperimentError::input(&f.edges, e))?;
    let regions = read_regions_csv(open(&f.regions)?).map_err(|e| ExperimentError::input(&f.regions, e))?;
    let k = regions.cloud_labels.len();
    let pricing = match &f.pricing {
        Some(p) => read_pricing_csv(open(p)?, &regions.cloud_labels).map_err(|e| ExperimentError::input(p, e))?,
        None => PricingMatrix::uniform(k, 1.0, 0.0),
    };
    let profiles = match &f.profiles {
        Some(p) => read_profiles_csv(open(p)?, &graph, &regions, default_profiles(&graph))
            .map_err(|e| ExperimentError::input(p, e))?,
        None => default_profiles(&graph),
    };
    let affinity = match (&f.affinity, &regions.coords) {
        (Some(p), _) => Affinity::Table(read_affinity_csv(open(p)?, &graph, &regions).map_err(|e| ExperimentError::input(p, e))?),
        (None, Some(coords)) => {
            if profiles.iter().all(|p| p.region.is_none()) {
                return Err(ExperimentError::Config(
                    "no affinity file given and no profile carries a home region".into(),
                ));
            }
            Affinity::Distance(DistanceAffinity::new(coords, profiles.iter().map(|p| p.region).collect(), f.distance_scale_km)?)
        }
        (None, None) => {
            return Err(ExperimentError::Config(
                "no affinity file given and the regions file has no coordinates".into(),
            ))
        }
    };
    let model = CloudModel::new(
        regions.cloud_labels.clone(),
        regions.region_labels.clone(),
        regions.region_cloud.clone(),
        pricing,
        affinity,
        profiles,
    )?;
    Ok(Scenario { graph, model, regions })
}
