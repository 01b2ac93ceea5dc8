//! Scratch: anchor-based SBM features — heterogeneous signal density.

use gia_cli::{AttackConfig, DatasetSource, Method, RunEnv};
use gia_core::eval::BaselineMethod;
use gia_core::graph::{generate_sbm, FeatureKind, Graph, SbmConfig};
use gia_core::rng::rng_from;
use ndarray::Array2;
use rand::Rng;
use std::path::PathBuf;

fn anchor_graph(q: f64, on: f64, off: f64, noise: f64, seed: u64) -> Graph<f64> {
    // Structure from the standard generator, features rebuilt with anchors.
    let cfg = SbmConfig::two_block(400, seed);
    let base = generate_sbm::<f64>(&cfg).unwrap();
    let mut rng = rng_from(seed ^ 0xA17C);
    let n = base.num_nodes();
    let d = 32usize;
    let inf = 8usize;
    let mut x = Array2::<f64>::zeros((n, d));
    for node in 0..n {
        let block = base.label_of(node).unwrap();
        let anchored = rng.gen_bool(q);
        for f in 0..d {
            let p = if f < inf {
                if anchored {
                    let owned = (f * 2 / inf) == block;
                    if owned { on } else { off }
                } else {
                    0.5
                }
            } else {
                noise
            };
            if rng.gen_bool(p) {
                x[(node, f)] = 1.0;
            }
        }
    }
    Graph::new(
        x,
        base.edges().to_vec(),
        base.labels().to_vec(),
        2,
        FeatureKind::Binary,
    )
    .unwrap()
}

fn main() {
    let trials = 8;
    for (q, on, off, noise) in [
        (0.10, 0.9, 0.1, 0.5),
        (0.20, 0.9, 0.1, 0.5),
        (0.30, 0.9, 0.1, 0.5),
        (0.10, 0.95, 0.05, 0.0),
        (0.20, 0.95, 0.05, 0.0),
        (0.15, 0.9, 0.1, 0.0),
    ] {
        let mut cfg = AttackConfig::sbm_default(400, PathBuf::from("/tmp/anchor"));
        cfg.feature_budget_fraction = 0.10;
        cfg.trials = trials;
        cfg.n_proxies = 3;
        if let DatasetSource::Sbm(ref mut sbm) = cfg.dataset {
            sbm.seed = 123;
        }
        let mut env = RunEnv::prepare(cfg).unwrap();
        // Swap in the anchor features (same structure).
        let g = anchor_graph(q, on, off, noise, 123);
        env.propagated = gia_core::surrogate::propagate_features(&env.op, g.features()).unwrap();
        env.graph = g;

        for method in [Method::Influence, Method::Baseline(BaselineMethod::Random)] {
            let mut clean = 0.0;
            let mut attacked = 0.0;
            let mut impact = 0.0;
            for t in 0..trials {
                let r = gia_cli::run_trial(&env, t, method).unwrap();
                clean += r.clean_accuracy;
                attacked += r.attacked_accuracy;
                impact += r.predicted_impact as f64;
            }
            println!(
                "q={q} on={on} off={off} noise={noise} {}: clean={:.4} attacked={:.4} drop={:.2}pts impact={:.1}",
                method.name(),
                clean / trials as f64,
                attacked / trials as f64,
                (clean - attacked) / trials as f64 * 100.0,
                impact / trials as f64
            );
        }
    }
}
