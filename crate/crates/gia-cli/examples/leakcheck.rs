//! Scratch: victim accuracy with zero feature signal.

use gia_cli::{AttackConfig, DatasetSource, RunEnv};
use gia_core::eval::{train_victim, victim_predict};
use gia_core::graph::make_splits;
use std::path::PathBuf;

fn main() {
    for (on, off, intra, inter) in [
        (0.5, 0.5, 0.05, 0.005),
        (0.6, 0.4, 0.05, 0.005),
        (0.5, 0.5, 0.02, 0.002),
        (0.6, 0.4, 0.02, 0.002),
    ] {
        let mut cfg = AttackConfig::sbm_default(400, PathBuf::from("/tmp/leak"));
        if let DatasetSource::Sbm(ref mut sbm) = cfg.dataset {
            sbm.on_prob = on;
            sbm.off_prob = off;
            sbm.intra_p = intra;
            sbm.inter_p = inter;
            sbm.seed = 7;
        }
        let env = RunEnv::prepare(cfg).unwrap();
        let mut accs = Vec::new();
        for t in 0..3u64 {
            let splits = make_splits(&env.graph, 1000 + t).unwrap();
            let vcfg = gia_core::eval::VictimConfig {
                seed: t,
                ..Default::default()
            };
            let victim = train_victim(&env.graph, &splits, &vcfg).unwrap();
            let preds = victim_predict(&victim, &env.graph);
            let acc = splits
                .test
                .iter()
                .filter(|&&i| Some(preds[i]) == env.graph.label_of(i))
                .count() as f64
                / splits.test.len() as f64;
            accs.push(acc);
        }
        println!(
            "on={on} off={off} intra={intra} inter={inter}: test acc {:?}",
            accs
        );
    }
}
