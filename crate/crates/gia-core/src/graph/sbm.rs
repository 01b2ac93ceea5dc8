//! Stochastic block model generator for desk-scale experiments.

use super::{FeatureKind, Graph};
use crate::error::{Error, Result};
use crate::rng::rng_from;
use crate::scalar::Scalar;
use ndarray::Array2;
use rand::Rng;

/// Community-structured random graph with binary features. The first
/// `informative_features` bits carry block identity: each block owns a
/// contiguous chunk of them and samples owned bits with `on_prob`, foreign
/// bits with `off_prob`. Remaining bits are pure noise.
#[derive(Debug, Clone)]
pub struct SbmConfig {
    pub block_sizes: Vec<usize>,
    pub intra_p: f64,
    pub inter_p: f64,
    pub num_features: usize,
    pub informative_features: usize,
    pub on_prob: f64,
    pub off_prob: f64,
    pub noise_prob: f64,
    pub seed: u64,
}

impl SbmConfig {
    /// Two blocks of `n / 2` nodes with the settings used throughout the
    /// synthetic experiments.
    pub fn two_block(n: usize, seed: u64) -> Self {
        SbmConfig {
            block_sizes: vec![n / 2, n - n / 2],
            intra_p: 0.05,
            inter_p: 0.005,
            num_features: 32,
            informative_features: 8,
            on_prob: 0.8,
            off_prob: 0.2,
            noise_prob: 0.5,
            seed,
        }
    }
}

pub fn generate_sbm<F: Scalar>(cfg: &SbmConfig) -> Result<Graph<F>> {
    let k = cfg.block_sizes.len();
    if k == 0 {
        return Err(Error::Config("SBM needs at least one block".into()));
    }
    if cfg.informative_features > cfg.num_features {
        return Err(Error::Config(
            "informative feature count exceeds feature count".into(),
        ));
    }
    for p in [
        cfg.intra_p,
        cfg.inter_p,
        cfg.on_prob,
        cfg.off_prob,
        cfg.noise_prob,
    ] {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Config(format!("probability {p} outside [0, 1]")));
        }
    }

    let n: usize = cfg.block_sizes.iter().sum();
    let mut block_of = Vec::with_capacity(n);
    for (b, &size) in cfg.block_sizes.iter().enumerate() {
        block_of.extend(std::iter::repeat(b).take(size));
    }

    let mut rng = rng_from(cfg.seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            let p = if block_of[u] == block_of[v] {
                cfg.intra_p
            } else {
                cfg.inter_p
            };
            if rng.gen_bool(p) {
                edges.push((u, v));
            }
        }
    }

    // Block b owns informative bits [b*inf/k, (b+1)*inf/k).
    let owner_of_bit = |d: usize| d * k / cfg.informative_features.max(1);
    let mut features = Array2::<F>::zeros((n, cfg.num_features));
    for node in 0..n {
        for d in 0..cfg.num_features {
            let p = if d < cfg.informative_features {
                if owner_of_bit(d) == block_of[node] {
                    cfg.on_prob
                } else {
                    cfg.off_prob
                }
            } else {
                cfg.noise_prob
            };
            if rng.gen_bool(p) {
                features[(node, d)] = F::one();
            }
        }
    }

    let labels = block_of.iter().map(|&b| Some(b)).collect();
    Graph::new(features, edges, labels, k, FeatureKind::Binary)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generation_is_deterministic() {
        let cfg = SbmConfig::two_block(60, 5);
        let a = generate_sbm::<f64>(&cfg).unwrap();
        let b = generate_sbm::<f64>(&cfg).unwrap();
        assert_eq!(a.edges(), b.edges());
        assert_eq!(a.features(), b.features());
    }

    #[test]
    fn blocks_set_labels_and_density() {
        let cfg = SbmConfig {
            block_sizes: vec![50, 50],
            intra_p: 0.2,
            inter_p: 0.01,
            num_features: 8,
            informative_features: 4,
            on_prob: 0.9,
            off_prob: 0.1,
            noise_prob: 0.5,
            seed: 11,
        };
        let g = generate_sbm::<f64>(&cfg).unwrap();
        assert_eq!(g.num_labels(), 2);
        assert_eq!(g.label_of(0), Some(0));
        assert_eq!(g.label_of(99), Some(1));

        let (mut intra, mut inter) = (0usize, 0usize);
        for &(u, v) in g.edges() {
            if (u < 50) == (v < 50) {
                intra += 1;
            } else {
                inter += 1;
            }
        }
        assert!(intra > inter, "intra {intra} should dominate inter {inter}");
    }

    #[test]
    fn informative_bits_separate_blocks() {
        let cfg = SbmConfig::two_block(200, 3);
        let g = generate_sbm::<f64>(&cfg).unwrap();
        // Bit 0 is owned by block 0: it should be on far more often there.
        let on_rate = |range: std::ops::Range<usize>| {
            range.clone().map(|i| g.features()[(i, 0)]).sum::<f64>() / range.len() as f64
        };
        assert!(on_rate(0..100) > 0.6);
        assert!(on_rate(100..200) < 0.4);
    }
}
