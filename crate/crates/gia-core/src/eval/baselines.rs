//! Heuristic target-selection baselines and their shared perturbation
//! template built from proxy-model feature gradients.

use super::{column_mean_over, feature_gradient, train_victim, VictimConfig};
use crate::error::Result;
use crate::graph::{Graph, SplitAssignment};
use crate::perturb::{GlobalPerturbation, PerturbationDomain, SnapDirection};
use crate::rng::rng_from;
use crate::scalar::Scalar;
use ndarray::Array2;
use rand::seq::SliceRandom;
use rayon::prelude::*;
use std::collections::VecDeque;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaselineMethod {
    Random,
    Degree,
    PageRank,
    Betweenness,
}

impl BaselineMethod {
    pub fn name(&self) -> &'static str {
        match self {
            BaselineMethod::Random => "random",
            BaselineMethod::Degree => "degree",
            BaselineMethod::PageRank => "pagerank",
            BaselineMethod::Betweenness => "betweenness",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "random" => Some(BaselineMethod::Random),
            "degree" => Some(BaselineMethod::Degree),
            "pagerank" => Some(BaselineMethod::PageRank),
            "betweenness" => Some(BaselineMethod::Betweenness),
            _ => None,
        }
    }
}

/// Power iteration on `p ← d·(A D^{-1})·p + (1−d)/N` with damping 0.85,
/// uniform teleportation and the raw adjacency, to an L1 tolerance of 1e-8.
pub fn pagerank_scores<F: Scalar>(graph: &Graph<F>) -> Vec<f64> {
    let n = graph.num_nodes();
    if n == 0 {
        return Vec::new();
    }
    let damping = 0.85;
    let teleport = (1.0 - damping) / n as f64;
    let degrees = graph.degrees();
    let mut p = vec![1.0 / n as f64; n];
    for _ in 0..10_000 {
        let mut next = vec![teleport; n];
        for (j, &pj) in p.iter().enumerate() {
            if degrees[j] == 0 {
                continue;
            }
            let share = damping * pj / degrees[j] as f64;
            for &i in graph.neighbors(j) {
                next[i] += share;
            }
        }
        let diff: f64 = next.iter().zip(&p).map(|(a, b)| (a - b).abs()).sum();
        p = next;
        if diff < 1e-8 {
            break;
        }
    }
    p
}

/// Exact betweenness centrality over ordered node pairs (Brandes' dependency
/// accumulation; unweighted shortest paths).
pub fn betweenness_centrality<F: Scalar>(graph: &Graph<F>) -> Vec<f64> {
    let n = graph.num_nodes();
    let mut centrality = vec![0.0f64; n];
    for s in 0..n {
        let mut stack: Vec<usize> = Vec::new();
        let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut sigma = vec![0.0f64; n];
        let mut dist = vec![-1i64; n];
        sigma[s] = 1.0;
        dist[s] = 0;
        let mut queue = VecDeque::new();
        queue.push_back(s);
        while let Some(v) = queue.pop_front() {
            stack.push(v);
            for &w in graph.neighbors(v) {
                if dist[w] < 0 {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
                if dist[w] == dist[v] + 1 {
                    sigma[w] += sigma[v];
                    preds[w].push(v);
                }
            }
        }
        let mut delta = vec![0.0f64; n];
        while let Some(w) = stack.pop() {
            for &v in &preds[w] {
                delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
            }
            if w != s {
                centrality[w] += delta[w];
            }
        }
    }
    centrality
}

/// Top `node_budget` candidates by the chosen centrality (ties by lower node
/// id); Random draws a seeded uniform sample instead.
pub fn select_baseline_nodes<F: Scalar>(
    method: BaselineMethod,
    candidates: &[usize],
    node_budget: usize,
    graph: &Graph<F>,
    seed: u64,
) -> Vec<usize> {
    let budget = node_budget.min(candidates.len());
    match method {
        BaselineMethod::Random => {
            let mut pool = candidates.to_vec();
            pool.shuffle(&mut rng_from(seed));
            let mut picked: Vec<usize> = pool.into_iter().take(budget).collect();
            picked.sort_unstable();
            picked
        }
        BaselineMethod::Degree => {
            rank_by(candidates, budget, |v| graph.degree(v) as f64)
        }
        BaselineMethod::PageRank => {
            let scores = pagerank_scores(graph);
            rank_by(candidates, budget, |v| scores[v])
        }
        BaselineMethod::Betweenness => {
            let scores = betweenness_centrality(graph);
            rank_by(candidates, budget, |v| scores[v])
        }
    }
}

fn rank_by(candidates: &[usize], budget: usize, metric: impl Fn(usize) -> f64) -> Vec<usize> {
    let mut ranked: Vec<usize> = candidates.to_vec();
    ranked.sort_by(|&a, &b| {
        metric(b)
            .partial_cmp(&metric(a))
            .expect("finite centrality")
            .then(a.cmp(&b))
    });
    ranked.truncate(budget);
    ranked.sort_unstable();
    ranked
}

/// Trains `n_proxies` victim-architecture models on the training split,
/// averages the gradient of the test-split loss with respect to the feature
/// matrix, and keeps the `B_f` features with the largest mean |gradient|.
/// Directions follow gradient ascent; magnitudes snap per node at
/// application time.
pub fn baseline_global_perturbation<F: Scalar>(
    graph: &Graph<F>,
    splits: &SplitAssignment,
    dom: &PerturbationDomain<F>,
    n_proxies: usize,
    proxy_cfg: &VictimConfig,
    seed: u64,
) -> Result<GlobalPerturbation> {
    let grads: Vec<Array2<F>> = (0..n_proxies)
        .into_par_iter()
        .map(|p| {
            let cfg = VictimConfig {
                seed: crate::rng::derive_seed(seed, p as u64, "proxy"),
                ..proxy_cfg.clone()
            };
            let victim = train_victim(graph, splits, &cfg)?;
            feature_gradient(&victim, graph, &splits.test)
        })
        .collect::<Result<_>>()?;

    let mut avg = Array2::<F>::zeros(grads[0].dim());
    for g in &grads {
        avg = avg + g;
    }
    let scale = F::one() / crate::scalar::fl::<F>(n_proxies as f64);
    avg.mapv_inplace(|v| v * scale);

    let per_feature = column_mean_over(&avg, &splits.test);
    let mut ranked: Vec<usize> = (0..per_feature.len()).collect();
    ranked.sort_by(|&a, &b| {
        per_feature[b]
            .abs()
            .partial_cmp(&per_feature[a].abs())
            .expect("finite gradients")
            .then(a.cmp(&b))
    });
    ranked.truncate(dom.feature_budget);
    ranked.sort_unstable();

    let entries = ranked
        .into_iter()
        .map(|d| {
            let dir = if per_feature[d] >= F::zero() {
                SnapDirection::Upper
            } else {
                SnapDirection::Lower
            };
            (d, dir)
        })
        .collect();
    Ok(GlobalPerturbation { entries })
}
