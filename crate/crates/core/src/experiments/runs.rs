use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cloud::{
    write_pricing_csv, write_profiles_csv, write_regions_csv, Affinity, AffinityTable, CloudModel, PreferenceTable,
    PricingMatrix, RegionId, UserProfile,
};
use crate::graph::{write_edges_csv, SocialGraph, UserId};
use crate::objective::{Assignment, EvaluationReport, Problem};
use crate::partition::{
    baseline_max_preference, baseline_min_propagation, baseline_random, brute_force_optimal, run_heuristic,
    HeuristicParams, StopReason, Telemetry,
};

use super::config::{Algorithm, DataSource, ExperimentConfig, OracleConfig};
use super::output::{read_assignment_csv, write_assignment_csv, write_rows_csv, write_telemetry_jsonl};
use super::scenario::Scenario;
use super::ExperimentError;

pub struct AlgorithmRun {
    pub assignment: Assignment,
    /// Heuristic runs only.
    pub telemetry: Option<Telemetry>,
}

/// Random placements use a stream separate from scenario generation.
fn random_seed(rng_seed: u64) -> u64 {
    rng_seed ^ 0x9e37_79b9_7f4a_7c15
}

pub fn run_algorithm(
    problem: &Problem<'_>,
    algorithm: Algorithm,
    params: &HeuristicParams,
    rng_seed: u64,
) -> Result<AlgorithmRun, ExperimentError> {
    let (assignment, telemetry) = match algorithm {
        Algorithm::Heuristic => {
            let out = run_heuristic(problem, params)?;
            (out.assignment, Some(out.telemetry))
        }
        Algorithm::Random => (baseline_random(problem, random_seed(rng_seed)), None),
        Algorithm::MinPropagation => (baseline_min_propagation(problem)?, None),
        Algorithm::MaxPreference => (baseline_max_preference(problem), None),
    };
    Ok(AlgorithmRun { assignment, telemetry })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeuristicSummary {
    pub initial_cross_cloud: usize,
    pub touched: usize,
    pub moves: usize,
    pub stop: StopReason,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionReport {
    pub algorithm: Algorithm,
    pub n_users: usize,
    pub n_clouds: usize,
    pub rng_seed: u64,
    pub params: HeuristicParams,
    pub metrics: EvaluationReport,
    pub heuristic: Option<HeuristicSummary>,
}

fn create_dir(dir: &Path) -> Result<(), ExperimentError> {
    fs::create_dir_all(dir).map_err(|e| ExperimentError::io(dir, e))
}

fn create(path: &Path) -> Result<BufWriter<File>, ExperimentError> {
    File::create(path).map(BufWriter::new).map_err(|e| ExperimentError::io(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), ExperimentError> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| ExperimentError::io(path, e))?;
    writeln!(w).and_then(|_| w.flush()).map_err(|e| ExperimentError::io(path, e))
}

/// Partitions the configured scenario and writes `assignment.csv`,
/// `report.json` and, for the heuristic, `telemetry.jsonl`.
pub fn cmd_partition(cfg: &ExperimentConfig, algorithm: Algorithm) -> Result<PartitionReport, ExperimentError> {
    cfg.validate()?;
    let scenario = Scenario::build(cfg, cfg.rng_seed)?;
    let problem = Problem::new(&scenario.graph, &scenario.model)?;
    let params = cfg.heuristic_params(cfg.alpha);
    let run = run_algorithm(&problem, algorithm, &params, cfg.rng_seed)?;

    let dir = &cfg.output_dir;
    create_dir(dir)?;
    write_assignment_csv(create(&dir.join("assignment.csv"))?, &scenario.graph, &scenario.model, &run.assignment)?;
    if let Some(t) = &run.telemetry {
        write_telemetry_jsonl(create(&dir.join("telemetry.jsonl"))?, t)?;
    }
    let report = PartitionReport {
        algorithm,
        n_users: problem.n_users(),
        n_clouds: problem.n_clouds(),
        rng_seed: cfg.rng_seed,
        params,
        metrics: problem.evaluate(&run.assignment, &params.objective),
        heuristic: run.telemetry.as_ref().map(|t| HeuristicSummary {
            initial_cross_cloud: t.initial_cross_cloud,
            touched: t.touched,
            moves: t.moves.len(),
            stop: t.stop,
        }),
    };
    write_json(&dir.join("report.json"), &report)?;
    Ok(report)
}

/// Scores an existing assignment file and writes `evaluation.json`.
pub fn cmd_evaluate(cfg: &ExperimentConfig, assignment: &Path) -> Result<EvaluationReport, ExperimentError> {
    cfg.validate()?;
    let scenario = Scenario::build(cfg, cfg.rng_seed)?;
    let problem = Problem::new(&scenario.graph, &scenario.model)?;
    let file = File::open(assignment).map_err(|e| ExperimentError::io(assignment, e))?;
    let a = read_assignment_csv(BufReader::new(file), &scenario.graph, &scenario.model)
        .map_err(|e| ExperimentError::input(assignment, e))?;
    let report = problem.evaluate(&a, &cfg.heuristic_params(cfg.alpha).objective);
    create_dir(&cfg.output_dir)?;
    write_json(&cfg.output_dir.join("evaluation.json"), &report)?;
    Ok(report)
}

/// Writes the scenario as input files that `files` mode reads back.
pub fn cmd_synth(cfg: &ExperimentConfig) -> Result<Vec<PathBuf>, ExperimentError> {
    cfg.validate()?;
    if !matches!(cfg.data, DataSource::Synth(_)) {
        return Err(ExperimentError::Config("synth needs a synthetic data source".into()));
    }
    let s = Scenario::build(cfg, cfg.rng_seed)?;
    let dir = &cfg.output_dir;
    create_dir(dir)?;
    let paths: Vec<PathBuf> = ["edges.csv", "regions.csv", "pricing.csv", "profiles.csv"].iter().map(|f| dir.join(f)).collect();
    write_edges_csv(&s.graph, create(&paths[0])?).map_err(|e| ExperimentError::io(&paths[0], e))?;
    write_regions_csv(&s.regions, create(&paths[1])?)?;
    write_pricing_csv(s.model.pricing(), s.model.cloud_labels(), create(&paths[2])?)?;
    write_profiles_csv(&s.graph, s.model.profiles(), s.model.region_labels(), create(&paths[3])?)?;
    Ok(paths)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub replicate: usize,
    pub rng_seed: u64,
    pub n_clouds: usize,
    pub alpha: f64,
    pub algorithm: Algorithm,
    pub objective: f64,
    pub preference_satisfaction: f64,
    pub inter_cloud_cost: f64,
    pub inter_cloud_edge_count: usize,
    pub total_connections: usize,
    pub n_users: usize,
    /// Heuristic only; zero for baselines.
    pub touched: usize,
    pub moves: usize,
}

fn check_cloud_counts(cfg: &ExperimentConfig, available: usize) -> Result<(), ExperimentError> {
    match cfg.cloud_counts.iter().find(|&&k| k > available) {
        Some(k) => Err(ExperimentError::Config(format!("cloud count {k} exceeds the {available} available clouds"))),
        None => Ok(()),
    }
}

fn sweep(cfg: &ExperimentConfig, alphas: &[f64]) -> Result<Vec<SweepRow>, ExperimentError> {
    cfg.validate()?;
    let mut rows = Vec::new();
    for replicate in 0..cfg.replicates {
        let seed = cfg.rng_seed.wrapping_add(replicate as u64);
        let scenario = Scenario::build(cfg, seed)?;
        check_cloud_counts(cfg, scenario.model.n_clouds())?;
        let full = PreferenceTable::compute(&scenario.graph, &scenario.model);
        for &k in &cfg.cloud_counts {
            let model = scenario.model.restrict_to_first(k)?;
            let problem = Problem::with_preferences(&scenario.graph, &model, full.restrict_to_first(k))?;
            // Baselines ignore alpha, so each runs once per cloud count.
            let mut fixed: Vec<(Algorithm, Assignment)> = Vec::new();
            for &alg in cfg.algorithms.iter().filter(|&&a| a != Algorithm::Heuristic) {
                fixed.push((alg, run_algorithm(&problem, alg, &cfg.heuristic_params(cfg.alpha), seed)?.assignment));
            }
            for &alpha in alphas {
                let params = cfg.heuristic_params(alpha);
                for &alg in &cfg.algorithms {
                    let (assignment, telemetry) = match alg {
                        Algorithm::Heuristic => {
                            let out = run_heuristic(&problem, &params)?;
                            (out.assignment, Some(out.telemetry))
                        }
                        _ => (fixed.iter().find(|(a, _)| *a == alg).map(|(_, x)| x.clone()).expect("baseline ran"), None),
                    };
                    let r = problem.evaluate(&assignment, &params.objective);
                    rows.push(SweepRow {
                        replicate,
                        rng_seed: seed,
                        n_clouds: k,
                        alpha,
                        algorithm: alg,
                        objective: r.objective_value,
                        preference_satisfaction: r.preference_satisfaction,
                        inter_cloud_cost: r.inter_cloud_cost,
                        inter_cloud_edge_count: r.inter_cloud_edge_count,
                        total_connections: r.total_connections,
                        n_users: problem.n_users(),
                        touched: telemetry.as_ref().map_or(0, |t| t.touched),
                        moves: telemetry.as_ref().map_or(0, |t| t.moves.len()),
                    });
                }
            }
        }
    }
    Ok(rows)
}

/// One row per (replicate, cloud count, alpha, algorithm).
pub fn sweep_alpha_rows(cfg: &ExperimentConfig) -> Result<Vec<SweepRow>, ExperimentError> {
    if cfg.alphas.len() < 2 {
        return Err(ExperimentError::Config("an alpha sweep needs at least two alpha values".into()));
    }
    sweep(cfg, &cfg.alphas)
}

/// One row per (replicate, cloud count, algorithm) at the configured alpha.
/// Clouds are activated in id order; preferences stay normalized over every
/// cloud of the scenario, available or not.
pub fn sweep_provider_rows(cfg: &ExperimentConfig) -> Result<Vec<SweepRow>, ExperimentError> {
    sweep(cfg, &[cfg.alpha])
}

pub fn cmd_sweep_alpha(cfg: &ExperimentConfig) -> Result<Vec<SweepRow>, ExperimentError> {
    let rows = sweep_alpha_rows(cfg)?;
    create_dir(&cfg.output_dir)?;
    write_rows_csv(&cfg.output_dir.join("sweep_alpha.csv"), &rows)?;
    Ok(rows)
}

pub fn cmd_sweep_providers(cfg: &ExperimentConfig) -> Result<Vec<SweepRow>, ExperimentError> {
    let rows = sweep_provider_rows(cfg)?;
    create_dir(&cfg.output_dir)?;
    write_rows_csv(&cfg.output_dir.join("sweep_providers.csv"), &rows)?;
    Ok(rows)
}

/// Small instance with independent uniform preferences: one region per
/// cloud, upload affinities drawn from `U(0, 1)`, no download term, and
/// `m` distinct directed edges with heavy-tailed weights.
pub fn oracle_instance(o: &OracleConfig, m: usize, rng_seed: u64) -> Result<(SocialGraph, CloudModel), ExperimentError> {
    let n = o.n_users;
    let k = o.n_clouds;
    if m > n * (n - 1) {
        return Err(ExperimentError::Config(format!("{m} directed edges do not fit on {n} users")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let tail = 1.0 / (o.weight_tail_exponent - 1.0);
    let mut slots: Vec<usize> = index::sample(&mut rng, n * (n - 1), m).into_vec();
    slots.sort_unstable();
    let edges: Vec<(usize, usize, f64)> = slots
        .into_iter()
        .map(|s| {
            let (src, j) = (s / (n - 1), s % (n - 1));
            let dst = if j < src { j } else { j + 1 };
            let u: f64 = 1.0 - rng.random::<f64>();
            (src, dst, u.powf(-tail).floor())
        })
        .collect();
    let graph = SocialGraph::from_parts((0..n).map(|i| format!("u{i}")).collect(), edges)?;

    let mut table = AffinityTable::new(n);
    for u in 0..n {
        for c in 0..k {
            table.set(UserId(u), RegionId(c), 0.0, rng.random::<f64>())?;
        }
    }
    let model = CloudModel::new(
        (0..k).map(|c| format!("cloud{c}")).collect(),
        (0..k).map(|c| format!("r{c}")).collect(),
        (0..k).map(crate::cloud::CloudId).collect(),
        PricingMatrix::uniform(k, 1.0, 0.0),
        Affinity::Table(table),
        vec![UserProfile::new(1.0, 1.0, None)?; n],
    )?;
    Ok((graph, model))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleRow {
    pub edges: usize,
    pub instance: usize,
    pub alpha: f64,
    pub heuristic_objective: f64,
    pub optimal_objective: f64,
    pub ratio: f64,
    pub evaluated: u64,
}

/// Heuristic against exhaustive search, `instances` per edge count.
pub fn oracle_rows(cfg: &ExperimentConfig) -> Result<Vec<OracleRow>, ExperimentError> {
    cfg.validate()?;
    let o = &cfg.oracle;
    let alpha = o.alpha.unwrap_or(cfg.alpha);
    let params = HeuristicParams { touched_budget: o.touched_budget, ..cfg.heuristic_params(alpha) };
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let mut rows = Vec::new();
    for &m in &o.edge_counts {
        for instance in 0..o.instances {
            let (graph, model) = oracle_instance(o, m, rng.random())?;
            let problem = Problem::new(&graph, &model)?;
            let heuristic = run_heuristic(&problem, &params)?;
            let h = problem.total_objective(&heuristic.assignment, &params.objective);
            let best = brute_force_optimal(&problem, &params.objective, o.cap)?;
            rows.push(OracleRow {
                edges: m,
                instance,
                alpha,
                heuristic_objective: h,
                optimal_objective: best.objective,
                ratio: h / best.objective,
                evaluated: best.evaluated,
            });
        }
    }
    Ok(rows)
}

pub fn cmd_oracle_compare(cfg: &ExperimentConfig) -> Result<Vec<OracleRow>, ExperimentError> {
    let rows = oracle_rows(cfg)?;
    create_dir(&cfg.output_dir)?;
    write_rows_csv(&cfg.output_dir.join("oracle_compare.csv"), &rows)?;
    Ok(rows)
}
