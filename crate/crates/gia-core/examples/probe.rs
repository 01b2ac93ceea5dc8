//! Scratch probe for score distributions on synthetic graphs.

use gia_core::graph::{
    candidate_filter, generate_sbm, make_splits, propagation_operator, SbmConfig,
};
use gia_core::influence::{score_candidate, AttackContext, AttackMode};
use gia_core::perturb::PerturbationDomain;
use gia_core::surrogate::{propagate_features, train_surrogate, TrainConfig};

fn main() {
    for (on, off) in [(0.8, 0.2), (0.7, 0.3), (0.65, 0.35), (0.6, 0.4), (0.55, 0.45)] {
        for (n, seed, bf) in [(400usize, 0u64, 3usize), (400, 1, 3)] {
            let mut cfg = SbmConfig::two_block(n, seed);
            cfg.on_prob = on;
            cfg.off_prob = off;
            probe(&cfg, n, seed, bf, on, off);
        }
    }
}

fn probe(cfg: &SbmConfig, n: usize, seed: u64, bf: usize, on: f64, off: f64) {
    {
        let g = generate_sbm::<f64>(cfg).unwrap();
        let splits = make_splits(&g, 1).unwrap();
        let op = propagation_operator(&g, 2).unwrap();
        let s = propagate_features(&op, g.features()).unwrap();
        let tcfg = TrainConfig {
            seed: 2,
            ..TrainConfig::default()
        };
        let model = train_surrogate(&s, g.labels(), &splits.train, 2, 2, &tcfg).unwrap();
        let dom = PerturbationDomain::binary(g.num_features(), bf).unwrap();

        for mode in [
            AttackMode::untargeted(),
            AttackMode::degrade_label(1),
            AttackMode::lure_label(0),
        ] {
            let ctx = AttackContext::new(&model, &op, g.features(), &s, &dom, mode).unwrap();
            let candidates = candidate_filter(&g, 0.1);
            let scores: Vec<usize> = candidates
                .iter()
                .map(|&i| score_candidate(&ctx, i).score)
                .collect();
            let nonzero = scores.iter().filter(|&&s| s > 0).count();
            let max = scores.iter().max().copied().unwrap_or(0);
            let total: usize = scores.iter().sum();
            println!(
                "on={on} off={off} n={n} seed={seed} bf={bf} mode={:?}: candidates={} nonzero={} max={} total={}",
                mode.kind,
                candidates.len(),
                nonzero,
                max,
                total
            );
        }
    }
}
