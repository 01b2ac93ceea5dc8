//! Scratch: surrogate fit regime vs transfer.

use gia_cli::{AttackConfig, DatasetSource, Method, RunEnv};
use std::path::PathBuf;

fn main() {
    let trials = 16;
    for (on, off) in [
        (0.56, 0.44),
        (0.55, 0.45),
        (0.54, 0.46),
        (0.53, 0.47),
        (0.52, 0.48),
        (0.51, 0.49),
    ] {
    for (epochs, lr, wd) in [
        (300usize, 0.2, 5e-4),
        (1000, 0.2, 0.0),
    ] {
        let mut cfg = AttackConfig::sbm_default(400, PathBuf::from("/tmp/tune"));
        cfg.feature_budget_fraction = 0.10;
        cfg.trials = trials;
        cfg.surrogate.epochs = epochs;
        cfg.surrogate.learning_rate = lr;
        cfg.surrogate.weight_decay = wd;
        if let DatasetSource::Sbm(ref mut sbm) = cfg.dataset {
            sbm.on_prob = on;
            sbm.off_prob = off;
            sbm.noise_prob = 0.0;
            sbm.seed = 123;
        }
        let env = RunEnv::prepare(cfg).unwrap();
        let mut clean = 0.0;
        let mut attacked = 0.0;
        let mut impact = 0.0;
        for t in 0..trials {
            let r = gia_cli::run_trial(&env, t, Method::Influence).unwrap();
            clean += r.clean_accuracy;
            attacked += r.attacked_accuracy;
            impact += r.predicted_impact as f64;
        }
        println!(
            "on={on} off={off} epochs={epochs} lr={lr} wd={wd}: clean={:.4} attacked={:.4} drop={:.2}pts impact={:.1}",
            clean / trials as f64,
            attacked / trials as f64,
            (clean - attacked) / trials as f64 * 100.0,
            impact / trials as f64
        );
    }
    }
}
