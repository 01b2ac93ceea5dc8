use clap::{Args, Parser, Subcommand};
use gia_cli::{
    apply_overrides, inspect_plan, parse_config_file, run_attack, run_baseline, run_sweep,
    AttackConfig, CliError, Overrides, RunOutput, SweepAxis,
};
use gia_core::eval::BaselineMethod;
use gia_core::graph::{generate_sbm, write_graph_files, SbmConfig};
use std::path::PathBuf;
use std::process::ExitCode;

/// Black-box influence attacks on graph node classifiers.
#[derive(Parser)]
#[command(name = "gia", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonFlags {
    /// key = value configuration file
    #[arg(long)]
    config: Option<PathBuf>,

    /// untargeted | degrade | lure
    #[arg(long)]
    mode: Option<String>,

    #[arg(long)]
    target_label: Option<usize>,

    /// Node budget as a fraction of the graph size
    #[arg(long)]
    node_budget: Option<f64>,

    /// Feature budget as a fraction of the feature count
    #[arg(long)]
    feature_budget: Option<f64>,

    /// Fraction of highest-degree nodes excluded from the candidate pool
    #[arg(long)]
    degree_remove: Option<f64>,

    #[arg(long)]
    trials: Option<usize>,

    #[arg(long)]
    seed: Option<u64>,

    /// none | global-perturb | inconsistency
    #[arg(long)]
    ablation: Option<String>,

    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the influence attack over seeded trials and emit reports.
    Attack(CommonFlags),

    /// Run a heuristic baseline (random | degree | pagerank | betweenness).
    Baseline {
        #[command(flatten)]
        common: CommonFlags,

        #[arg(long)]
        method: String,
    },

    /// Sweep a budget axis, one attack run per value.
    Sweep {
        #[command(flatten)]
        common: CommonFlags,

        /// node_budget | feature_budget
        #[arg(long)]
        axis: String,

        /// Comma-separated ascending fractions, e.g. 0.01,0.02,0.05
        #[arg(long)]
        values: String,
    },

    /// Pretty-print a plan dump produced by an attack run.
    InspectPlan {
        #[arg(long)]
        plan: PathBuf,

        #[arg(long)]
        perturbations: Option<PathBuf>,
    },

    /// Generate a synthetic two-block dataset in the standard file formats.
    GenSbm {
        #[arg(long, default_value_t = 400)]
        nodes: usize,

        #[arg(long, default_value_t = 0)]
        seed: u64,

        #[arg(long, default_value_t = 0.05)]
        intra: f64,

        #[arg(long, default_value_t = 0.005)]
        inter: f64,

        #[arg(long, default_value_t = 32)]
        features: usize,

        #[arg(long, default_value_t = 8)]
        informative: usize,

        #[arg(long, default_value_t = 0.6)]
        on_prob: f64,

        #[arg(long, default_value_t = 0.4)]
        off_prob: f64,

        #[arg(long)]
        out_dir: PathBuf,
    },
}

fn load_config(common: &CommonFlags) -> Result<AttackConfig, CliError> {
    let mut cfg = match &common.config {
        Some(path) => parse_config_file(path)?,
        None => AttackConfig::sbm_default(400, PathBuf::from("reports")),
    };
    let ov = Overrides {
        mode: common.mode.clone(),
        target_label: common.target_label,
        node_budget: common.node_budget,
        feature_budget: common.feature_budget,
        degree_remove: common.degree_remove,
        trials: common.trials,
        seed: common.seed,
        ablation: common.ablation.clone(),
        out_dir: common.out_dir.clone(),
    };
    apply_overrides(&mut cfg, &ov)?;
    Ok(cfg)
}

fn report_outcome(out: &RunOutput) -> ExitCode {
    println!(
        "{} / {}: clean {:.4} ± {:.4}, attacked {:.4} ± {:.4} ({} trials, {} failed)",
        out.aggregate.mode,
        out.aggregate.method,
        out.aggregate.clean_accuracy_mean,
        out.aggregate.clean_accuracy_std,
        out.aggregate.attacked_accuracy_mean,
        out.aggregate.attacked_accuracy_std,
        out.aggregate.trials,
        out.aggregate.failed_trials
    );
    for (trial, err) in &out.failures {
        eprintln!("trial {trial} failed: {err}");
    }
    if out.failures.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    }
}

fn run() -> Result<ExitCode, CliError> {
    match Cli::parse().command {
        Command::Attack(common) => {
            let cfg = load_config(&common)?;
            Ok(report_outcome(&run_attack(cfg)?))
        }
        Command::Baseline { common, method } => {
            let cfg = load_config(&common)?;
            let method = BaselineMethod::parse(&method)
                .ok_or_else(|| CliError::Config(format!("unknown baseline '{method}'")))?;
            Ok(report_outcome(&run_baseline(cfg, method)?))
        }
        Command::Sweep {
            common,
            axis,
            values,
        } => {
            let cfg = load_config(&common)?;
            let axis = SweepAxis::parse(&axis)?;
            let values: Vec<f64> = values
                .split(',')
                .map(|v| {
                    v.trim()
                        .parse::<f64>()
                        .map_err(|_| CliError::Config(format!("bad sweep value '{v}'")))
                })
                .collect::<Result<_, _>>()?;
            let rows = run_sweep(cfg, axis, &values)?;
            for (v, mean, std) in rows {
                println!("{v},{mean:.4},{std:.4}");
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::InspectPlan {
            plan,
            perturbations,
        } => {
            print!("{}", inspect_plan(&plan, perturbations.as_deref())?);
            Ok(ExitCode::SUCCESS)
        }
        Command::GenSbm {
            nodes,
            seed,
            intra,
            inter,
            features,
            informative,
            on_prob,
            off_prob,
            out_dir,
        } => {
            let cfg = SbmConfig {
                block_sizes: vec![nodes / 2, nodes - nodes / 2],
                intra_p: intra,
                inter_p: inter,
                num_features: features,
                informative_features: informative,
                on_prob,
                off_prob,
                noise_prob: 0.5,
                seed,
            };
            let g = generate_sbm::<f64>(&cfg).map_err(|e| CliError::Config(e.to_string()))?;
            std::fs::create_dir_all(&out_dir)
                .map_err(|e| CliError::Io(format!("create {}: {e}", out_dir.display())))?;
            write_graph_files(
                &g,
                &out_dir.join("edges.tsv"),
                &out_dir.join("features.csv"),
                &out_dir.join("labels.csv"),
            )
            .map_err(|e| CliError::Io(e.to_string()))?;
            println!(
                "wrote {} nodes / {} edges to {}",
                g.num_nodes(),
                g.num_edges(),
                out_dir.display()
            );
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => code,
        Err(CliError::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
