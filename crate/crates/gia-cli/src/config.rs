//! Run configuration: a flat `key = value` file with CLI flag overrides.

use crate::CliError;
use gia_core::eval::VictimConfig;
use gia_core::graph::{FeatureKind, SbmConfig};
use gia_core::influence::{AttackMode, AttackModeKind};
use gia_core::surrogate::TrainConfig;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundsPolicy {
    Binary,
    GlobalMinMax,
    PerFeature,
}

impl BoundsPolicy {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        match s {
            "binary" => Ok(BoundsPolicy::Binary),
            "global" | "global-minmax" => Ok(BoundsPolicy::GlobalMinMax),
            "per-feature" => Ok(BoundsPolicy::PerFeature),
            other => Err(CliError::Config(format!("unknown bounds policy '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ablation {
    None,
    GlobalPerturbation,
    Inconsistency,
}

impl Ablation {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        match s {
            "none" => Ok(Ablation::None),
            "global-perturb" | "global_perturbation" => Ok(Ablation::GlobalPerturbation),
            "inconsistency" => Ok(Ablation::Inconsistency),
            other => Err(CliError::Config(format!("unknown ablation '{other}'"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Ablation::None => "none",
            Ablation::GlobalPerturbation => "global-perturb",
            Ablation::Inconsistency => "inconsistency",
        }
    }
}

/// Where the graph comes from.
#[derive(Debug, Clone)]
pub enum DatasetSource {
    Files {
        edges: PathBuf,
        features: PathBuf,
        labels: PathBuf,
        splits: Option<PathBuf>,
        feature_kind: FeatureKind,
    },
    Sbm(SbmConfig),
}

/// Full run configuration.
#[derive(Debug, Clone)]
pub struct AttackConfig {
    pub dataset: DatasetSource,
    pub mode_kind: AttackModeKind,
    pub target_label: Option<usize>,
    pub node_budget_fraction: f64,
    pub feature_budget_fraction: f64,
    pub degree_remove_fraction: f64,
    pub bounds: BoundsPolicy,
    pub depth: usize,
    pub trials: usize,
    pub base_seed: u64,
    pub ablation: Ablation,
    pub n_proxies: usize,
    pub surrogate: TrainConfig,
    pub victim: VictimConfig,
    pub out_dir: PathBuf,
}

impl AttackConfig {
    /// Synthetic two-block defaults; file paths switch the source.
    pub fn sbm_default(nodes: usize, out_dir: PathBuf) -> Self {
        AttackConfig {
            dataset: DatasetSource::Sbm(SbmConfig::two_block(nodes, 0)),
            mode_kind: AttackModeKind::Untargeted,
            target_label: None,
            node_budget_fraction: 0.01,
            feature_budget_fraction: 0.02,
            degree_remove_fraction: 0.10,
            bounds: BoundsPolicy::Binary,
            depth: 2,
            trials: 1,
            base_seed: 0,
            ablation: Ablation::None,
            n_proxies: 20,
            surrogate: TrainConfig::default(),
            victim: VictimConfig::default(),
            out_dir,
        }
    }

    pub fn attack_mode(&self) -> AttackMode {
        AttackMode {
            kind: self.mode_kind,
            target_label: self.target_label,
            consistency: self.ablation != Ablation::Inconsistency,
            global_perturbation: self.ablation == Ablation::GlobalPerturbation,
        }
    }

    pub fn mode_name(&self) -> &'static str {
        match self.mode_kind {
            AttackModeKind::Untargeted => "untargeted",
            AttackModeKind::DegradeLabel => "degrade",
            AttackModeKind::LureLabel => "lure",
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        for (name, f) in [
            ("node_budget", self.node_budget_fraction),
            ("feature_budget", self.feature_budget_fraction),
        ] {
            if !(f > 0.0 && f < 1.0) {
                return Err(CliError::Config(format!(
                    "{name} fraction {f} outside (0, 1)"
                )));
            }
        }
        if !(0.0..1.0).contains(&self.degree_remove_fraction) {
            return Err(CliError::Config(format!(
                "degree_remove fraction {} outside [0, 1)",
                self.degree_remove_fraction
            )));
        }
        if self.trials == 0 {
            return Err(CliError::Config("trials must be at least 1".into()));
        }
        if self.depth == 0 {
            return Err(CliError::Config("depth must be at least 1".into()));
        }
        match self.mode_kind {
            AttackModeKind::DegradeLabel | AttackModeKind::LureLabel => {
                if self.target_label.is_none() {
                    return Err(CliError::Config(
                        "label-oriented mode needs target_label".into(),
                    ));
                }
            }
            AttackModeKind::Untargeted => {}
        }
        Ok(())
    }
}

pub fn parse_mode(s: &str) -> Result<AttackModeKind, CliError> {
    match s {
        "untargeted" => Ok(AttackModeKind::Untargeted),
        "degrade" | "type1" | "type-1" => Ok(AttackModeKind::DegradeLabel),
        "lure" | "type2" | "type-2" => Ok(AttackModeKind::LureLabel),
        other => Err(CliError::Config(format!("unknown mode '{other}'"))),
    }
}

fn parse_kv(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut map = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::Config(format!("line {}: expected 'key = value'", idx + 1))
        })?;
        let value = value.trim().trim_matches('"');
        map.insert(key.trim().to_string(), value.to_string());
    }
    Ok(map)
}

fn get_f64(map: &BTreeMap<String, String>, key: &str) -> Result<Option<f64>, CliError> {
    map.get(key)
        .map(|v| {
            v.parse::<f64>()
                .map_err(|_| CliError::Config(format!("{key}: '{v}' is not a number")))
        })
        .transpose()
}

fn get_usize(map: &BTreeMap<String, String>, key: &str) -> Result<Option<usize>, CliError> {
    map.get(key)
        .map(|v| {
            v.parse::<usize>()
                .map_err(|_| CliError::Config(format!("{key}: '{v}' is not an integer")))
        })
        .transpose()
}

fn get_u64(map: &BTreeMap<String, String>, key: &str) -> Result<Option<u64>, CliError> {
    map.get(key)
        .map(|v| {
            v.parse::<u64>()
                .map_err(|_| CliError::Config(format!("{key}: '{v}' is not an integer")))
        })
        .transpose()
}

fn get_bool(map: &BTreeMap<String, String>, key: &str) -> Result<Option<bool>, CliError> {
    map.get(key)
        .map(|v| match v.as_str() {
            "true" | "1" | "yes" => Ok(true),
            "false" | "0" | "no" => Ok(false),
            other => Err(CliError::Config(format!("{key}: '{other}' is not a bool"))),
        })
        .transpose()
}

/// Reads a config file. Keys mirror the struct fields; unknown keys are
/// rejected so typos fail fast.
pub fn parse_config_file(path: &Path) -> Result<AttackConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let map = parse_kv(&text)?;

    const KNOWN: &[&str] = &[
        "dataset", "edges", "features", "labels", "splits", "feature_kind", "sbm_nodes",
        "sbm_blocks", "sbm_intra", "sbm_inter", "sbm_features", "sbm_informative", "sbm_on",
        "sbm_off", "sbm_noise", "mode", "target_label", "node_budget", "feature_budget",
        "degree_remove", "bounds", "depth", "trials", "seed", "ablation", "n_proxies",
        "surrogate_lr", "surrogate_epochs", "surrogate_weight_decay", "surrogate_bias",
        "victim_hidden", "victim_lr", "victim_weight_decay", "victim_epochs", "victim_patience",
        "out_dir",
    ];
    for key in map.keys() {
        if !KNOWN.contains(&key.as_str()) {
            return Err(CliError::Config(format!("unknown config key '{key}'")));
        }
    }

    let out_dir = PathBuf::from(map.get("out_dir").cloned().unwrap_or_else(|| "reports".into()));
    let dataset = match map.get("dataset").map(String::as_str) {
        Some("files") => {
            let need = |key: &str| -> Result<PathBuf, CliError> {
                map.get(key)
                    .map(PathBuf::from)
                    .ok_or_else(|| CliError::Config(format!("files dataset needs '{key}'")))
            };
            DatasetSource::Files {
                edges: need("edges")?,
                features: need("features")?,
                labels: need("labels")?,
                splits: map.get("splits").map(PathBuf::from),
                feature_kind: FeatureKind::parse(
                    map.get("feature_kind").map(String::as_str).unwrap_or("binary"),
                )
                .map_err(|e| CliError::Config(e.to_string()))?,
            }
        }
        Some("sbm") | None => {
            let nodes = get_usize(&map, "sbm_nodes")?.unwrap_or(400);
            let blocks = get_usize(&map, "sbm_blocks")?.unwrap_or(2);
            let size = nodes / blocks;
            let mut sizes = vec![size; blocks];
            if let Some(last) = sizes.last_mut() {
                *last += nodes - size * blocks;
            }
            DatasetSource::Sbm(SbmConfig {
                block_sizes: sizes,
                intra_p: get_f64(&map, "sbm_intra")?.unwrap_or(0.05),
                inter_p: get_f64(&map, "sbm_inter")?.unwrap_or(0.005),
                num_features: get_usize(&map, "sbm_features")?.unwrap_or(32),
                informative_features: get_usize(&map, "sbm_informative")?.unwrap_or(8),
                on_prob: get_f64(&map, "sbm_on")?.unwrap_or(0.6),
                off_prob: get_f64(&map, "sbm_off")?.unwrap_or(0.4),
                noise_prob: get_f64(&map, "sbm_noise")?.unwrap_or(0.5),
                seed: 0,
            })
        }
        Some(other) => {
            return Err(CliError::Config(format!("unknown dataset '{other}'")));
        }
    };

    let mut cfg = AttackConfig {
        dataset,
        mode_kind: parse_mode(map.get("mode").map(String::as_str).unwrap_or("untargeted"))?,
        target_label: get_usize(&map, "target_label")?,
        node_budget_fraction: get_f64(&map, "node_budget")?.unwrap_or(0.01),
        feature_budget_fraction: get_f64(&map, "feature_budget")?.unwrap_or(0.02),
        degree_remove_fraction: get_f64(&map, "degree_remove")?.unwrap_or(0.10),
        bounds: BoundsPolicy::parse(map.get("bounds").map(String::as_str).unwrap_or("binary"))?,
        depth: get_usize(&map, "depth")?.unwrap_or(2),
        trials: get_usize(&map, "trials")?.unwrap_or(1),
        base_seed: get_u64(&map, "seed")?.unwrap_or(0),
        ablation: Ablation::parse(map.get("ablation").map(String::as_str).unwrap_or("none"))?,
        n_proxies: get_usize(&map, "n_proxies")?.unwrap_or(20),
        surrogate: TrainConfig {
            learning_rate: get_f64(&map, "surrogate_lr")?.unwrap_or(0.2),
            epochs: get_usize(&map, "surrogate_epochs")?.unwrap_or(300),
            weight_decay: get_f64(&map, "surrogate_weight_decay")?.unwrap_or(5e-4),
            seed: 0,
            use_bias: get_bool(&map, "surrogate_bias")?.unwrap_or(true),
        },
        victim: VictimConfig {
            hidden: get_usize(&map, "victim_hidden")?.unwrap_or(16),
            learning_rate: get_f64(&map, "victim_lr")?.unwrap_or(0.01),
            weight_decay: get_f64(&map, "victim_weight_decay")?.unwrap_or(5e-4),
            max_epochs: get_usize(&map, "victim_epochs")?.unwrap_or(300),
            patience: get_usize(&map, "victim_patience")?.unwrap_or(30),
            seed: 0,
        },
        out_dir,
    };
    // The SBM graph seed follows the run seed unless the dataset pins one.
    if let DatasetSource::Sbm(ref mut sbm) = cfg.dataset {
        sbm.seed = gia_core::rng::derive_seed(cfg.base_seed, 0, "sbm-graph");
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Flag overrides applied on top of a parsed config.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub mode: Option<String>,
    pub target_label: Option<usize>,
    pub node_budget: Option<f64>,
    pub feature_budget: Option<f64>,
    pub degree_remove: Option<f64>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub ablation: Option<String>,
    pub out_dir: Option<PathBuf>,
}

pub fn apply_overrides(cfg: &mut AttackConfig, ov: &Overrides) -> Result<(), CliError> {
    if let Some(m) = &ov.mode {
        cfg.mode_kind = parse_mode(m)?;
    }
    if let Some(t) = ov.target_label {
        cfg.target_label = Some(t);
    }
    if let Some(v) = ov.node_budget {
        cfg.node_budget_fraction = v;
    }
    if let Some(v) = ov.feature_budget {
        cfg.feature_budget_fraction = v;
    }
    if let Some(v) = ov.degree_remove {
        cfg.degree_remove_fraction = v;
    }
    if let Some(v) = ov.trials {
        cfg.trials = v;
    }
    if let Some(v) = ov.seed {
        cfg.base_seed = v;
        if let DatasetSource::Sbm(ref mut sbm) = cfg.dataset {
            sbm.seed = gia_core::rng::derive_seed(v, 0, "sbm-graph");
        }
    }
    if let Some(a) = &ov.ablation {
        cfg.ablation = Ablation::parse(a)?;
    }
    if let Some(d) = &ov.out_dir {
        cfg.out_dir = d.clone();
    }
    cfg.validate()
}
