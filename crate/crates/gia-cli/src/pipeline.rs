//! Trial loop: load → surrogate → attack → evaluate, with seeded isolation.

use crate::config::{Ablation, AttackConfig, BoundsPolicy, DatasetSource};
use crate::CliError;
use gia_core::error::Result as CoreResult;
use gia_core::eval::{
    baseline_global_perturbation, evaluate_attack, select_baseline_nodes, train_victim,
    BaselineMethod, Metrics, VictimConfig,
};
use gia_core::graph::{
    candidate_filter, generate_sbm, load_graph, load_splits, make_splits, propagation_operator,
    Graph, PropagationOperator, SplitAssignment,
};
use gia_core::influence::{
    build_global_perturbation_ablation, dump_plan, greedy_select, score_candidates,
    AttackContext, AttackPlan, PlanEntry,
};
use gia_core::perturb::{
    apply_perturbation, budget_from_fraction, dump_perturbations, FeaturePerturbation,
    PerturbationDomain,
};
use gia_core::rng::derive_seed;
use gia_core::surrogate::{propagate_features, train_surrogate, TrainConfig};
use serde::{Deserialize, Serialize};
use std::fs;
use std::io::Write;
use std::path::Path;

/// Which selection strategy a run uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Surrogate-guided influence attack.
    Influence,
    Baseline(BaselineMethod),
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Influence => "influence",
            Method::Baseline(b) => b.name(),
        }
    }
}

/// One trial's report record (a JSON line in `records.jsonl`).
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct TrialRecord {
    pub trial: usize,
    pub seed: u64,
    pub mode: String,
    pub method: String,
    pub b_n: usize,
    pub b_f: usize,
    pub degree_fraction: f64,
    pub clean_accuracy: f64,
    pub attacked_accuracy: f64,
    pub per_label_accuracy: Vec<f64>,
    pub misclassification_rate: Vec<f64>,
    pub clean_per_label_accuracy: Vec<f64>,
    pub clean_misclassification_rate: Vec<f64>,
    pub predicted_impact: usize,
}

/// Mean-and-spread summary over the successful trials.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Aggregate {
    pub mode: String,
    pub method: String,
    pub trials: usize,
    pub failed_trials: usize,
    pub clean_accuracy_mean: f64,
    pub clean_accuracy_std: f64,
    pub attacked_accuracy_mean: f64,
    pub attacked_accuracy_std: f64,
    pub predicted_impact_mean: f64,
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

pub fn aggregate_records(mode: &str, method: &str, trials: usize, records: &[TrialRecord]) -> Aggregate {
    let clean: Vec<f64> = records.iter().map(|r| r.clean_accuracy).collect();
    let attacked: Vec<f64> = records.iter().map(|r| r.attacked_accuracy).collect();
    let (clean_mean, clean_std) = mean_std(&clean);
    let (attacked_mean, attacked_std) = mean_std(&attacked);
    let impact_mean = if records.is_empty() {
        f64::NAN
    } else {
        records.iter().map(|r| r.predicted_impact as f64).sum::<f64>() / records.len() as f64
    };
    Aggregate {
        mode: mode.to_string(),
        method: method.to_string(),
        trials,
        failed_trials: trials - records.len(),
        clean_accuracy_mean: clean_mean,
        clean_accuracy_std: clean_std,
        attacked_accuracy_mean: attacked_mean,
        attacked_accuracy_std: attacked_std,
        predicted_impact_mean: impact_mean,
    }
}

/// Immutable per-run state shared by every trial.
pub struct RunEnv {
    pub cfg: AttackConfig,
    pub graph: Graph<f64>,
    pub op: PropagationOperator<f64>,
    pub propagated: ndarray::Array2<f64>,
    pub fixed_splits: Option<SplitAssignment>,
}

impl RunEnv {
    pub fn prepare(cfg: AttackConfig) -> Result<Self, CliError> {
        cfg.validate()?;
        let (graph, fixed_splits) = match &cfg.dataset {
            DatasetSource::Files {
                edges,
                features,
                labels,
                splits,
                feature_kind,
            } => {
                let g = load_graph::<f64>(edges, features, labels, *feature_kind)
                    .map_err(|e| CliError::Config(e.to_string()))?;
                let s = splits
                    .as_ref()
                    .map(|p| load_splits(p, g.num_nodes()))
                    .transpose()
                    .map_err(|e| CliError::Config(e.to_string()))?;
                (g, s)
            }
            DatasetSource::Sbm(sbm) => (
                generate_sbm::<f64>(sbm).map_err(|e| CliError::Config(e.to_string()))?,
                None,
            ),
        };
        if graph.num_labels() == 0 {
            return Err(CliError::Config("dataset has no labels".into()));
        }
        if let Some(t) = cfg.target_label {
            if t >= graph.num_labels() {
                return Err(CliError::Config(format!(
                    "target_label {t} out of range for {} labels",
                    graph.num_labels()
                )));
            }
        }
        let op = propagation_operator(&graph, cfg.depth)
            .map_err(|e| CliError::Config(e.to_string()))?;
        let propagated =
            propagate_features(&op, graph.features()).map_err(|e| CliError::Config(e.to_string()))?;
        Ok(RunEnv {
            cfg,
            graph,
            op,
            propagated,
            fixed_splits,
        })
    }

    pub fn node_budget(&self) -> usize {
        budget_from_fraction(self.cfg.node_budget_fraction, self.graph.num_nodes())
    }

    pub fn feature_budget(&self) -> usize {
        budget_from_fraction(self.cfg.feature_budget_fraction, self.graph.num_features())
    }

    pub fn domain(&self) -> CoreResult<PerturbationDomain<f64>> {
        let b_f = self.feature_budget();
        match self.cfg.bounds {
            BoundsPolicy::Binary => PerturbationDomain::binary(self.graph.num_features(), b_f),
            BoundsPolicy::GlobalMinMax => {
                PerturbationDomain::global_minmax(self.graph.features(), b_f)
            }
            BoundsPolicy::PerFeature => PerturbationDomain::per_feature(self.graph.features(), b_f),
        }
    }

    fn splits_for_trial(&self, trial: usize) -> CoreResult<SplitAssignment> {
        if let Some(s) = &self.fixed_splits {
            return Ok(s.clone());
        }
        make_splits(
            &self.graph,
            derive_seed(self.cfg.base_seed, trial as u64, "splits"),
        )
    }

    fn victim_cfg(&self, trial: usize) -> VictimConfig {
        VictimConfig {
            seed: derive_seed(self.cfg.base_seed, trial as u64, "victim"),
            ..self.cfg.victim.clone()
        }
    }

    fn surrogate_cfg(&self, trial: usize) -> TrainConfig {
        TrainConfig {
            seed: derive_seed(self.cfg.base_seed, trial as u64, "surrogate"),
            ..self.cfg.surrogate.clone()
        }
    }
}

/// The attack plan built by one trial, before evaluation.
pub struct TrialPlan {
    pub plan: AttackPlan<f64>,
    pub splits: SplitAssignment,
}

/// Builds the selection and perturbations for one trial with the given method.
pub fn build_trial_plan(env: &RunEnv, trial: usize, method: Method) -> CoreResult<TrialPlan> {
    let splits = env.splits_for_trial(trial)?;
    let dom = env.domain()?;
    let b_n = env.node_budget();
    let candidates = candidate_filter(&env.graph, env.cfg.degree_remove_fraction);

    let plan = match method {
        Method::Influence => {
            let surrogate = train_surrogate(
                &env.propagated,
                env.graph.labels(),
                &splits.train,
                env.graph.num_labels(),
                env.cfg.depth,
                &env.surrogate_cfg(trial),
            )?;
            let ctx = AttackContext::new(
                &surrogate,
                &env.op,
                env.graph.features(),
                &env.propagated,
                &dom,
                env.cfg.attack_mode(),
            )?;
            let scores = score_candidates(&ctx, &candidates);
            let mut plan = greedy_select(&scores, b_n);
            if env.cfg.ablation == Ablation::GlobalPerturbation {
                // Same selection, one shared perturbation pattern for everyone.
                let template = build_global_perturbation_ablation(&scores, &dom);
                for entry in &mut plan.entries {
                    entry.perturbation =
                        template.materialize(env.graph.features().row(entry.node), &dom);
                }
            }
            plan
        }
        Method::Baseline(b) => {
            let selected = select_baseline_nodes(
                b,
                &candidates,
                b_n,
                &env.graph,
                derive_seed(env.cfg.base_seed, trial as u64, "baseline-select"),
            );
            let template = baseline_global_perturbation(
                &env.graph,
                &splits,
                &dom,
                env.cfg.n_proxies,
                &env.victim_cfg(trial),
                derive_seed(env.cfg.base_seed, trial as u64, "proxies"),
            )?;
            let entries = selected
                .into_iter()
                .map(|node| PlanEntry {
                    node,
                    perturbation: template.materialize(env.graph.features().row(node), &dom),
                    affected: Vec::new(),
                })
                .collect();
            AttackPlan {
                entries,
                covered: Vec::new(),
                predicted_impact: 0,
            }
        }
    };
    Ok(TrialPlan { plan, splits })
}

/// Applies a plan to the clean feature matrix, re-validating every
/// perturbation at this boundary.
pub fn apply_plan(env: &RunEnv, plan: &AttackPlan<f64>) -> CoreResult<Graph<f64>> {
    let dom = env.domain()?;
    if plan.entries.len() > env.node_budget() {
        return Err(gia_core::Error::Perturbation(format!(
            "plan selects {} nodes, budget is {}",
            plan.entries.len(),
            env.node_budget()
        )));
    }
    let mut x = env.graph.features().clone();
    for entry in &plan.entries {
        x = apply_perturbation(
            &x,
            entry.node,
            &entry.perturbation,
            &dom,
            env.graph.feature_kind(),
        )?;
    }
    env.graph.with_features(x)
}

fn record_from_metrics(
    env: &RunEnv,
    trial: usize,
    method: Method,
    plan: &AttackPlan<f64>,
    clean: &Metrics,
    attacked: &Metrics,
) -> TrialRecord {
    TrialRecord {
        trial,
        seed: env.cfg.base_seed + trial as u64,
        mode: env.cfg.mode_name().to_string(),
        method: method.name().to_string(),
        b_n: env.node_budget(),
        b_f: env.feature_budget(),
        degree_fraction: env.cfg.degree_remove_fraction,
        clean_accuracy: clean.accuracy,
        attacked_accuracy: attacked.accuracy,
        per_label_accuracy: attacked.per_label_accuracy.clone(),
        misclassification_rate: attacked.misclassification_rate_toward.clone(),
        clean_per_label_accuracy: clean.per_label_accuracy.clone(),
        clean_misclassification_rate: clean.misclassification_rate_toward.clone(),
        predicted_impact: plan.predicted_impact,
    }
}

/// Runs one fully seeded trial: fresh splits, surrogate, victim; build the
/// plan, perturb, evaluate transfer.
pub fn run_trial(env: &RunEnv, trial: usize, method: Method) -> CoreResult<TrialRecord> {
    let TrialPlan { plan, splits } = build_trial_plan(env, trial, method)?;
    let victim = train_victim(&env.graph, &splits, &env.victim_cfg(trial))?;
    let attacked = apply_plan(env, &plan)?;
    let (clean_m, attacked_m) = evaluate_attack(&victim, &env.graph, &attacked, &splits)?;
    Ok(record_from_metrics(env, trial, method, &plan, &clean_m, &attacked_m))
}

/// Trial outcome paired with its plan, for callers that also dump artifacts.
pub fn run_trial_with_plan(
    env: &RunEnv,
    trial: usize,
    method: Method,
) -> CoreResult<(TrialRecord, AttackPlan<f64>)> {
    let TrialPlan { plan, splits } = build_trial_plan(env, trial, method)?;
    let victim = train_victim(&env.graph, &splits, &env.victim_cfg(trial))?;
    let attacked = apply_plan(env, &plan)?;
    let (clean_m, attacked_m) = evaluate_attack(&victim, &env.graph, &attacked, &splits)?;
    let record = record_from_metrics(env, trial, method, &plan, &clean_m, &attacked_m);
    Ok((record, plan))
}

/// Everything a run produced, including where it was written.
pub struct RunOutput {
    pub records: Vec<TrialRecord>,
    pub aggregate: Aggregate,
    pub failures: Vec<(usize, String)>,
}

fn write_reports(
    out_dir: &Path,
    env: &RunEnv,
    records: &[TrialRecord],
    plans: &[(usize, AttackPlan<f64>)],
    aggregate: &Aggregate,
) -> Result<(), CliError> {
    fs::create_dir_all(out_dir)
        .map_err(|e| CliError::Io(format!("create {}: {e}", out_dir.display())))?;

    let mut jsonl = String::new();
    for r in records {
        jsonl.push_str(&serde_json::to_string(r).expect("record serializes"));
        jsonl.push('\n');
    }
    write_text(&out_dir.join("records.jsonl"), &jsonl)?;
    write_text(
        &out_dir.join("aggregate.json"),
        &format!(
            "{}\n",
            serde_json::to_string_pretty(aggregate).expect("aggregate serializes")
        ),
    )?;

    let dom = env.domain().map_err(|e| CliError::Config(e.to_string()))?;
    for (trial, plan) in plans {
        let plan_path = out_dir.join(format!("plan_trial{trial}.csv"));
        dump_plan(
            &plan_path,
            plan,
            env.cfg.mode_name(),
            env.node_budget(),
            env.feature_budget(),
        )
        .map_err(|e| CliError::Io(e.to_string()))?;
        let pert_path = out_dir.join(format!("perturbations_trial{trial}.csv"));
        let rows: Vec<(usize, &FeaturePerturbation<f64>, ndarray::ArrayView1<f64>)> = plan
            .entries
            .iter()
            .map(|e| (e.node, &e.perturbation, env.graph.features().row(e.node)))
            .collect();
        dump_perturbations(&pert_path, &rows).map_err(|e| CliError::Io(e.to_string()))?;
        // Budget re-validation at the emission boundary.
        for entry in &plan.entries {
            entry
                .perturbation
                .validate(
                    env.graph.features().row(entry.node),
                    &dom,
                    env.graph.feature_kind(),
                )
                .map_err(|e| CliError::Io(format!("emitted plan violates contract: {e}")))?;
        }
    }
    Ok(())
}

fn write_text(path: &Path, contents: &str) -> Result<(), CliError> {
    let mut f = fs::File::create(path)
        .map_err(|e| CliError::Io(format!("create {}: {e}", path.display())))?;
    f.write_all(contents.as_bytes())
        .map_err(|e| CliError::Io(format!("write {}: {e}", path.display())))
}

/// The full trial loop for one method; writes reports under `out_dir`.
pub fn run_method(env: &RunEnv, method: Method, out_dir: &Path) -> Result<RunOutput, CliError> {
    let mut records = Vec::new();
    let mut plans = Vec::new();
    let mut failures = Vec::new();
    for trial in 0..env.cfg.trials {
        match run_trial_with_plan(env, trial, method) {
            Ok((record, plan)) => {
                plans.push((trial, plan));
                records.push(record);
            }
            Err(e) => failures.push((trial, e.to_string())),
        }
    }
    let aggregate = aggregate_records(
        env.cfg.mode_name(),
        method.name(),
        env.cfg.trials,
        &records,
    );
    write_reports(out_dir, env, &records, &plans, &aggregate)?;
    Ok(RunOutput {
        records,
        aggregate,
        failures,
    })
}

/// `attack` entry point.
pub fn run_attack(cfg: AttackConfig) -> Result<RunOutput, CliError> {
    let out_dir = cfg.out_dir.clone();
    let env = RunEnv::prepare(cfg)?;
    run_method(&env, Method::Influence, &out_dir)
}

/// `baseline` entry point.
pub fn run_baseline(cfg: AttackConfig, method: BaselineMethod) -> Result<RunOutput, CliError> {
    let out_dir = cfg.out_dir.join(method.name());
    let env = RunEnv::prepare(cfg)?;
    run_method(&env, Method::Baseline(method), &out_dir)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    NodeBudget,
    FeatureBudget,
}

impl SweepAxis {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        match s {
            "node_budget" | "node-budget" => Ok(SweepAxis::NodeBudget),
            "feature_budget" | "feature-budget" => Ok(SweepAxis::FeatureBudget),
            other => Err(CliError::Config(format!("unknown sweep axis '{other}'"))),
        }
    }
}

/// One `run_attack` per budget value (shared base seed); returns the CSV rows
/// `(value, mean_accuracy, stddev)` and writes `sweep.csv`.
pub fn run_sweep(
    cfg: AttackConfig,
    axis: SweepAxis,
    values: &[f64],
) -> Result<Vec<(f64, f64, f64)>, CliError> {
    if values.is_empty() {
        return Err(CliError::Config("sweep needs at least one value".into()));
    }
    if values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(CliError::Config(
            "sweep values must be sorted ascending".into(),
        ));
    }
    let out_root = cfg.out_dir.clone();
    let mut rows = Vec::new();
    for &value in values {
        let mut sub = cfg.clone();
        match axis {
            SweepAxis::NodeBudget => sub.node_budget_fraction = value,
            SweepAxis::FeatureBudget => sub.feature_budget_fraction = value,
        }
        sub.out_dir = out_root.join(format!(
            "sweep_{}_{value}",
            match axis {
                SweepAxis::NodeBudget => "node_budget",
                SweepAxis::FeatureBudget => "feature_budget",
            }
        ));
        let out = run_attack(sub)?;
        rows.push((
            value,
            out.aggregate.attacked_accuracy_mean,
            out.aggregate.attacked_accuracy_std,
        ));
    }
    let mut csv = String::from("value,mean_accuracy,stddev\n");
    for (v, m, s) in &rows {
        csv.push_str(&format!("{v},{m},{s}\n"));
    }
    fs::create_dir_all(&out_root)
        .map_err(|e| CliError::Io(format!("create {}: {e}", out_root.display())))?;
    write_text(&out_root.join("sweep.csv"), &csv)?;
    Ok(rows)
}

/// Human-readable rendering of a plan dump and its perturbation file.
pub fn inspect_plan(plan_path: &Path, perturbations_path: Option<&Path>) -> Result<String, CliError> {
    let text = fs::read_to_string(plan_path)
        .map_err(|e| CliError::Io(format!("read {}: {e}", plan_path.display())))?;
    let mut out = String::new();
    let mut selected = 0usize;
    for line in text.lines() {
        if let Some(rest) = line.strip_prefix('#') {
            out.push_str(&format!("summary:{rest}\n"));
        } else if line.starts_with("node,") || line.trim().is_empty() {
            continue;
        } else {
            let mut parts = line.splitn(3, ',');
            let node = parts.next().unwrap_or("?");
            let count = parts.next().unwrap_or("0");
            let affected = parts.next().unwrap_or("");
            out.push_str(&format!(
                "  target {node}: {count} affected [{affected}]\n"
            ));
            selected += 1;
        }
    }
    out.push_str(&format!("selected nodes: {selected}\n"));
    if let Some(p) = perturbations_path {
        let text = fs::read_to_string(p)
            .map_err(|e| CliError::Io(format!("read {}: {e}", p.display())))?;
        let edits = text.lines().skip(1).filter(|l| !l.trim().is_empty()).count();
        out.push_str(&format!("feature edits: {edits}\n"));
        for line in text.lines().skip(1).take(10) {
            out.push_str(&format!("  {line}\n"));
        }
        if edits > 10 {
            out.push_str("  ...\n");
        }
    }
    Ok(out)
}
