use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use multicloud::experiments::{
    cmd_evaluate, cmd_oracle_compare, cmd_partition, cmd_sweep_alpha, cmd_sweep_providers, cmd_synth, Algorithm,
    DataSource, ExperimentConfig, ExperimentError, InputFiles, SynthScenario,
};
use multicloud::{PhiMode, TerminationMode};

#[derive(Parser)]
#[command(name = "multicloud", version, about = "Propagation-aware multi-cloud hosting experiments")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON experiment config; flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, env = "MULTICLOUD_OUT_DIR")]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    alpha: Option<f64>,
    #[arg(long, global = true)]
    gamma: Option<f64>,
    #[arg(long, global = true)]
    eta: Option<f64>,
    /// Fraction of connections the heuristic may examine.
    #[arg(long, global = true)]
    budget: Option<f64>,
    #[arg(long, global = true, value_enum)]
    termination: Option<Termination>,
    #[arg(long, global = true, value_enum)]
    phi: Option<Phi>,
    #[arg(long, global = true)]
    replicates: Option<usize>,
    /// Synthetic scenario size.
    #[arg(long, global = true)]
    users: Option<usize>,
    /// Edge list; switches the data source to input files.
    #[arg(long, global = true, requires = "regions")]
    edges: Option<PathBuf>,
    #[arg(long, global = true)]
    regions: Option<PathBuf>,
    #[arg(long, global = true)]
    pricing: Option<PathBuf>,
    #[arg(long, global = true)]
    affinity: Option<PathBuf>,
    #[arg(long, global = true)]
    profiles: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Termination {
    GainThreshold,
    Budget,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum Phi {
    Exact,
    ThreeCase,
}

#[derive(Subcommand)]
enum Command {
    /// Partition one scenario and write the assignment, report and telemetry.
    Partition {
        #[arg(long, default_value = "heuristic")]
        algorithm: String,
    },
    /// Metrics per alpha, algorithm and cloud count.
    SweepAlpha {
        #[arg(long, value_delimiter = ',')]
        alphas: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',')]
        cloud_counts: Option<Vec<usize>>,
    },
    /// Metrics per number of available clouds at a fixed alpha.
    SweepProviders {
        #[arg(long, value_delimiter = ',')]
        cloud_counts: Option<Vec<usize>>,
    },
    /// Heuristic against exhaustive search on small random instances.
    OracleCompare {
        #[arg(long)]
        instances: Option<usize>,
        #[arg(long, value_delimiter = ',')]
        edge_counts: Option<Vec<usize>>,
    },
    /// Write the synthetic scenario as input files.
    Synth,
    /// Score an existing `user_label,cloud_label` assignment.
    Evaluate {
        #[arg(long)]
        assignment: PathBuf,
    },
}

fn build_config(c: &Common) -> Result<ExperimentConfig, ExperimentError> {
    let mut cfg = match &c.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(v) = &c.out {
        cfg.output_dir = v.clone();
    }
    if let Some(v) = c.seed {
        cfg.rng_seed = v;
    }
    if let Some(v) = c.alpha {
        cfg.alpha = v;
    }
    if let Some(v) = c.gamma {
        cfg.gamma = v;
    }
    if let Some(v) = c.eta {
        cfg.eta = v;
    }
    if let Some(v) = c.budget {
        cfg.touched_budget = v;
    }
    if let Some(v) = c.termination {
        cfg.termination = match v {
            Termination::GainThreshold => TerminationMode::GainThreshold,
            Termination::Budget => TerminationMode::Budget,
            Termination::Both => TerminationMode::Both,
        };
    }
    if let Some(v) = c.phi {
        cfg.phi = match v {
            Phi::Exact => PhiMode::Exact,
            Phi::ThreeCase => PhiMode::ThreeCase,
        };
    }
    if let Some(v) = c.replicates {
        cfg.replicates = v;
    }
    if let (Some(edges), Some(regions)) = (&c.edges, &c.regions) {
        let scale = match &cfg.data {
            DataSource::Files(f) => f.distance_scale_km,
            DataSource::Synth(s) => s.distance_scale_km,
        };
        cfg.data = DataSource::Files(InputFiles {
            edges: edges.clone(),
            regions: regions.clone(),
            pricing: c.pricing.clone(),
            affinity: c.affinity.clone(),
            profiles: c.profiles.clone(),
            distance_scale_km: scale,
        });
    } else if c.regions.is_some() || c.pricing.is_some() || c.affinity.is_some() || c.profiles.is_some() {
        return Err(ExperimentError::Config("input file flags need both --edges and --regions".into()));
    }
    if let Some(n) = c.users {
        match &mut cfg.data {
            DataSource::Synth(s) => s.n_users = n,
            DataSource::Files(_) => return Err(ExperimentError::Config("--users applies to synthetic data only".into())),
        }
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<serde_json::Value, ExperimentError> {
    let mut cfg = build_config(&cli.common)?;
    let out = |name: &str| cfg.output_dir.join(name).display().to_string();
    Ok(match cli.command {
        Command::Partition { algorithm } => {
            let report = cmd_partition(&cfg, Algorithm::parse(&algorithm)?)?;
            serde_json::to_value(report).expect("report serializes")
        }
        Command::Evaluate { assignment } => {
            serde_json::to_value(cmd_evaluate(&cfg, &assignment)?).expect("report serializes")
        }
        Command::SweepAlpha { alphas, cloud_counts } => {
            if let Some(a) = alphas {
                cfg.alphas = a;
            }
            if let Some(k) = cloud_counts {
                cfg.cloud_counts = k;
            }
            let rows = cmd_sweep_alpha(&cfg)?;
            json!({ "rows": rows.len(), "output": out("sweep_alpha.csv") })
        }
        Command::SweepProviders { cloud_counts } => {
            if let Some(k) = cloud_counts {
                cfg.cloud_counts = k;
            }
            let rows = cmd_sweep_providers(&cfg)?;
            json!({ "rows": rows.len(), "output": out("sweep_providers.csv") })
        }
        Command::OracleCompare { instances, edge_counts } => {
            if let Some(n) = instances {
                cfg.oracle.instances = n;
            }
            if let Some(e) = edge_counts {
                cfg.oracle.edge_counts = e;
            }
            let rows = cmd_oracle_compare(&cfg)?;
            let mean = rows.iter().map(|r| r.ratio).sum::<f64>() / rows.len().max(1) as f64;
            json!({ "rows": rows.len(), "mean_ratio": mean, "output": out("oracle_compare.csv") })
        }
        Command::Synth => {
            if !matches!(cfg.data, DataSource::Synth(_)) {
                cfg.data = DataSource::Synth(SynthScenario::default());
            }
            let paths = cmd_synth(&cfg)?;
            json!({ "files": paths.iter().map(|p| p.display().to_string()).collect::<Vec<_>>() })
        }
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprintln!("{}", json!({ "error": "usage", "message": e.to_string().trim_end() }));
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::FAILURE
        }
    }
}
