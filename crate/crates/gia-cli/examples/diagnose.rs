//! Scratch: where do surrogate flips fail to transfer?

use gia_cli::{build_trial_plan, AttackConfig, DatasetSource, Method, RunEnv};
use gia_core::eval::{train_victim, victim_predict, VictimConfig};
use gia_core::rng::derive_seed;
use std::path::PathBuf;

fn main() {
    let mut cfg = AttackConfig::sbm_default(400, PathBuf::from("/tmp/diag"));
    cfg.feature_budget_fraction = 0.10;
    if let DatasetSource::Sbm(ref mut sbm) = cfg.dataset {
        sbm.on_prob = 0.51;
        sbm.off_prob = 0.49;
        sbm.noise_prob = 0.0;
        sbm.seed = 123;
    }
    let env = RunEnv::prepare(cfg).unwrap();

    for t in 0..3 {
        let tp = build_trial_plan(&env, t, Method::Influence).unwrap();
        let vcfg = VictimConfig {
            seed: derive_seed(env.cfg.base_seed, t as u64, "victim"),
            ..env.cfg.victim.clone()
        };
        let victim = train_victim(&env.graph, &tp.splits, &vcfg).unwrap();
        let clean_preds = victim_predict(&victim, &env.graph);
        let attacked = gia_cli::apply_plan(&env, &tp.plan).unwrap();
        let att_preds = victim_predict(&victim, &attacked);

        let surrogate_clean_acc = {
            // surrogate clean labels vs victim clean labels agreement
            let op = &env.op;
            let s = gia_core::surrogate::propagate_features(op, env.graph.features()).unwrap();
            let scfg = gia_core::surrogate::TrainConfig {
                seed: derive_seed(env.cfg.base_seed, t as u64, "surrogate"),
                ..env.cfg.surrogate.clone()
            };
            let model = gia_core::surrogate::train_surrogate(
                &s, env.graph.labels(), &tp.splits.train, 2, 2, &scfg).unwrap();
            let preds = gia_core::surrogate::predict_all(&model, &s);
            let agree = (0..env.graph.num_nodes())
                .filter(|&i| preds[i].label == clean_preds[i])
                .count();
            agree as f64 / env.graph.num_nodes() as f64
        };

        let mut affected_total = 0;
        let mut victim_agrees_clean = 0; // victim clean pred == surrogate clean pred? approx via label
        let mut flipped_on_victim = 0;
        let mut changed_on_victim = 0;
        for entry in &tp.plan.entries {
            for &j in &entry.affected {
                affected_total += 1;
                if clean_preds[j] != att_preds[j] {
                    changed_on_victim += 1;
                }
                if clean_preds[j] == env.graph.label_of(j).unwrap() {
                    victim_agrees_clean += 1;
                }
                if clean_preds[j] == env.graph.label_of(j).unwrap()
                    && att_preds[j] != env.graph.label_of(j).unwrap()
                {
                    flipped_on_victim += 1;
                }
            }
        }
        // global collateral: nodes changed anywhere
        let global_changed = (0..env.graph.num_nodes())
            .filter(|&i| clean_preds[i] != att_preds[i])
            .count();
        let test_changed = tp.splits.test.iter().filter(|&&i| clean_preds[i] != att_preds[i]).count();
        let test_newly_wrong = tp.splits.test.iter().filter(|&&i| {
            clean_preds[i] == env.graph.label_of(i).unwrap() && att_preds[i] != env.graph.label_of(i).unwrap()
        }).count();
        let test_newly_right = tp.splits.test.iter().filter(|&&i| {
            clean_preds[i] != env.graph.label_of(i).unwrap() && att_preds[i] == env.graph.label_of(i).unwrap()
        }).count();
        println!(
            "trial {t}: impact={} affected_total={affected_total} victim_clean_correct_on_affected={victim_agrees_clean} changed_on_victim={changed_on_victim} newly_wrong_on_affected={flipped_on_victim} | surrogate/victim clean agreement={surrogate_clean_acc:.3} | global_changed={global_changed} test_changed={test_changed} test_newly_wrong={test_newly_wrong} test_newly_right={test_newly_right}",
            tp.plan.predicted_impact
        );
    }
}
