//! Scratch: acceptance-relevant battery across SBM graph instances.

use gia_cli::{Ablation, AttackConfig, DatasetSource, Method, RunEnv};
use gia_core::eval::BaselineMethod;
use gia_core::influence::AttackModeKind;
use std::path::PathBuf;

fn base_cfg(graph_seed: u64) -> AttackConfig {
    let mut cfg = AttackConfig::sbm_default(400, PathBuf::from("/tmp/battery"));
    cfg.node_budget_fraction = 0.01;
    cfg.feature_budget_fraction = 0.10;
    cfg.degree_remove_fraction = 0.10;
    cfg.trials = 10;
    cfg.n_proxies = 5;
    if let DatasetSource::Sbm(ref mut sbm) = cfg.dataset {
        sbm.on_prob = 0.51;
        sbm.off_prob = 0.49;
        sbm.noise_prob = 0.0;
        sbm.seed = graph_seed;
    }
    cfg
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn main() {
    for graph_seed in [2128142103570135161u64, 123, 7, 42, 999] {
        // Untargeted + random baseline.
        let env = RunEnv::prepare(base_cfg(graph_seed)).unwrap();
        let (mut c, mut a, mut r) = (vec![], vec![], vec![]);
        for t in 0..10 {
            let ri = gia_cli::run_trial(&env, t, Method::Influence).unwrap();
            c.push(ri.clean_accuracy);
            a.push(ri.attacked_accuracy);
            r.push(
                gia_cli::run_trial(&env, t, Method::Baseline(BaselineMethod::Random))
                    .unwrap()
                    .attacked_accuracy,
            );
        }
        println!(
            "graph={graph_seed} untargeted: clean={:.4} attacked={:.4} drop={:.2} random={:.4} beats_random={}",
            mean(&c), mean(&a), (mean(&c) - mean(&a)) * 100.0, mean(&r), mean(&a) < mean(&r)
        );

        // Type-I / Type-II directions.
        let mut cfg = base_cfg(graph_seed);
        cfg.mode_kind = AttackModeKind::DegradeLabel;
        cfg.target_label = Some(1);
        let env = RunEnv::prepare(cfg).unwrap();
        let (mut od, mut td) = (vec![], vec![]);
        for t in 0..10 {
            let ri = gia_cli::run_trial(&env, t, Method::Influence).unwrap();
            od.push(ri.clean_accuracy - ri.attacked_accuracy);
            td.push(ri.clean_per_label_accuracy[1] - ri.per_label_accuracy[1]);
        }
        let mut cfg = base_cfg(graph_seed);
        cfg.mode_kind = AttackModeKind::LureLabel;
        cfg.target_label = Some(1);
        let env = RunEnv::prepare(cfg).unwrap();
        let (mut mc, mut ma) = (vec![], vec![]);
        for t in 0..10 {
            let ri = gia_cli::run_trial(&env, t, Method::Influence).unwrap();
            mc.push(ri.clean_misclassification_rate[1]);
            ma.push(ri.misclassification_rate[1]);
        }
        println!(
            "graph={graph_seed} typeI: target_drop={:.2} overall_drop={:.2} ok={} | typeII: toward {:.4}->{:.4} ok={}",
            mean(&td) * 100.0, mean(&od) * 100.0, mean(&td) > mean(&od),
            mean(&mc), mean(&ma), mean(&ma) > mean(&mc)
        );

        // Ablation ordering.
        let mut envs = vec![];
        for ab in [Ablation::None, Ablation::Inconsistency, Ablation::GlobalPerturbation] {
            let mut cfg = base_cfg(graph_seed);
            cfg.ablation = ab;
            envs.push(RunEnv::prepare(cfg).unwrap());
        }
        let mut rows = vec![];
        for t in 0..10 {
            let mut row = [0.0f64; 3];
            for (k, env) in envs.iter().enumerate() {
                row[k] = gia_cli::run_trial(env, t, Method::Influence)
                    .unwrap()
                    .attacked_accuracy;
            }
            rows.push(row);
        }
        let viol = rows
            .iter()
            .filter(|r| !(r[0] <= r[1] + 1e-12 && r[1] <= r[2] + 1e-12))
            .count();
        println!(
            "graph={graph_seed} ablation: means {:.4} {:.4} {:.4} per-trial violations={viol}",
            mean(&rows.iter().map(|r| r[0]).collect::<Vec<_>>()),
            mean(&rows.iter().map(|r| r[1]).collect::<Vec<_>>()),
            mean(&rows.iter().map(|r| r[2]).collect::<Vec<_>>()),
        );
    }
}
