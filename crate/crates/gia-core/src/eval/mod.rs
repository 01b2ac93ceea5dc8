//! Victim model, heuristic baselines and transfer metrics.

mod baselines;

pub use baselines::{
    baseline_global_perturbation, betweenness_centrality, pagerank_scores, select_baseline_nodes,
    BaselineMethod,
};

use crate::error::{Error, Result};
use crate::graph::{normalized_adjacency, Graph, SparseSym, SplitAssignment};
use crate::rng::rng_from;
use crate::scalar::{fl, Scalar};
use crate::surrogate::argmax;
use ndarray::{Array1, Array2, Axis};
use rand::Rng;

/// Two-layer graph convolution victim: `Â · ReLU(Â X W1) · W2`.
#[derive(Debug, Clone, PartialEq)]
pub struct VictimGcn<F> {
    pub w1: Array2<F>,
    pub w2: Array2<F>,
}

impl<F: Scalar> VictimGcn<F> {
    pub fn hidden(&self) -> usize {
        self.w1.ncols()
    }

    /// Forward pass given a precomputed normalized adjacency.
    pub fn forward(&self, hat_a: &SparseSym<F>, features: &Array2<F>) -> Array2<F> {
        let ax = hat_a.mul_dense(features);
        let mut h = ax.dot(&self.w1);
        h.mapv_inplace(|v| v.max(F::zero()));
        hat_a.mul_dense(&h).dot(&self.w2)
    }
}

/// Victim training settings.
#[derive(Debug, Clone)]
pub struct VictimConfig {
    pub hidden: usize,
    pub learning_rate: f64,
    pub weight_decay: f64,
    pub max_epochs: usize,
    pub patience: usize,
    pub seed: u64,
}

impl Default for VictimConfig {
    fn default() -> Self {
        VictimConfig {
            hidden: 16,
            learning_rate: 0.01,
            weight_decay: 5e-4,
            max_epochs: 300,
            patience: 30,
            seed: 0,
        }
    }
}

fn glorot<F: Scalar>(rows: usize, cols: usize, rng: &mut impl Rng) -> Array2<F> {
    let limit = (6.0 / (rows + cols) as f64).sqrt();
    let mut w = Array2::<F>::zeros((rows, cols));
    w.mapv_inplace(|_| fl(rng.gen_range(-limit..limit)));
    w
}

struct Adam<F> {
    m: Array2<F>,
    v: Array2<F>,
    t: i32,
}

impl<F: Scalar> Adam<F> {
    fn new(rows: usize, cols: usize) -> Self {
        Adam {
            m: Array2::zeros((rows, cols)),
            v: Array2::zeros((rows, cols)),
            t: 0,
        }
    }

    fn step(&mut self, w: &mut Array2<F>, grad: &Array2<F>, lr: F) {
        let b1 = fl::<F>(0.9);
        let b2 = fl::<F>(0.999);
        let eps = fl::<F>(1e-8);
        self.t += 1;
        let bc1 = F::one() - b1.powi(self.t);
        let bc2 = F::one() - b2.powi(self.t);
        for ((m, v), (w, g)) in self
            .m
            .iter_mut()
            .zip(self.v.iter_mut())
            .zip(w.iter_mut().zip(grad.iter()))
        {
            *m = b1 * *m + (F::one() - b1) * *g;
            *v = b2 * *v + (F::one() - b2) * *g * *g;
            let m_hat = *m / bc1;
            let v_hat = *v / bc2;
            *w = *w - lr * m_hat / (v_hat.sqrt() + eps);
        }
    }
}

fn softmax_rows_inplace<F: Scalar>(m: &mut Array2<F>) {
    for mut row in m.rows_mut() {
        let max = row.iter().copied().fold(F::neg_infinity(), F::max);
        let mut sum = F::zero();
        for v in row.iter_mut() {
            *v = (*v - max).exp();
            sum += *v;
        }
        for v in row.iter_mut() {
            *v = *v / sum;
        }
    }
}

/// Full-batch training with adaptive-moment updates and patience-based early
/// stopping on validation accuracy; returns the weights of the best
/// validation epoch. Evasion evaluation never retrains this model.
pub fn train_victim<F: Scalar>(
    graph: &Graph<F>,
    splits: &SplitAssignment,
    cfg: &VictimConfig,
) -> Result<VictimGcn<F>> {
    if splits.train.is_empty() {
        return Err(Error::Config("empty training split".into()));
    }
    let k = graph.num_labels();
    if k == 0 {
        return Err(Error::Config("victim needs a labeled graph".into()));
    }
    let mut train_labels = Vec::with_capacity(splits.train.len());
    for &i in &splits.train {
        train_labels.push(graph.label_of(i).ok_or_else(|| {
            Error::Config(format!("training node {i} has no label"))
        })?);
    }

    let hat_a = normalized_adjacency(graph);
    let ax = hat_a.mul_dense(graph.features());
    let d = graph.num_features();
    let n = graph.num_nodes();

    let mut rng = rng_from(cfg.seed);
    let mut w1 = glorot::<F>(d, cfg.hidden, &mut rng);
    let mut w2 = glorot::<F>(cfg.hidden, k, &mut rng);
    let mut opt1 = Adam::new(d, cfg.hidden);
    let mut opt2 = Adam::new(cfg.hidden, k);
    let lr = fl::<F>(cfg.learning_rate);
    let wd = fl::<F>(cfg.weight_decay);
    let two = fl::<F>(2.0);

    let val_accuracy = |model: &VictimGcn<F>| -> f64 {
        if splits.validation.is_empty() {
            return 0.0;
        }
        let logits = model.forward(&hat_a, graph.features());
        let mut correct = 0usize;
        for &i in &splits.validation {
            let pred = argmax(logits.row(i).as_slice().expect("contiguous"));
            if Some(pred) == graph.label_of(i) {
                correct += 1;
            }
        }
        correct as f64 / splits.validation.len() as f64
    };

    let mut best = VictimGcn {
        w1: w1.clone(),
        w2: w2.clone(),
    };
    let mut best_val = -1.0f64;
    let mut since_improvement = 0usize;

    for epoch in 0..cfg.max_epochs {
        // Forward with cached pre-activations.
        let z1 = ax.dot(&w1);
        let h1 = z1.mapv(|v| v.max(F::zero()));
        let h2 = hat_a.mul_dense(&h1);
        let logits = h2.dot(&w2);

        // Loss gradient restricted to training rows.
        let mut probs = logits.clone();
        softmax_rows_inplace(&mut probs);
        let inv_n = F::one() / fl::<F>(splits.train.len() as f64);
        let mut g = Array2::<F>::zeros((n, k));
        let mut loss = F::zero();
        for (&i, &y) in splits.train.iter().zip(&train_labels) {
            loss -= probs[(i, y)].max(fl(1e-300)).ln();
            for c in 0..k {
                let target = if c == y { F::one() } else { F::zero() };
                g[(i, c)] = (probs[(i, c)] - target) * inv_n;
            }
        }
        loss = loss * inv_n;
        let reg: F = w1.iter().map(|v| *v * *v).sum::<F>()
            + w2.iter().map(|v| *v * *v).sum::<F>();
        loss = loss + wd * reg;
        if !loss.is_finite() {
            return Err(Error::Training {
                epoch,
                loss: loss.to_f64().unwrap_or(f64::NAN),
            });
        }

        let grad_w2 = h2.t().dot(&g) + &w2.mapv(|v| two * wd * v);
        let dh2 = g.dot(&w2.t());
        let dh1 = hat_a.mul_dense(&dh2);
        let dz1 =
            ndarray::Zip::from(&dh1)
                .and(&z1)
                .map_collect(|&u, &z| if z > F::zero() { u } else { F::zero() });
        let grad_w1 = ax.t().dot(&dz1) + &w1.mapv(|v| two * wd * v);

        opt1.step(&mut w1, &grad_w1, lr);
        opt2.step(&mut w2, &grad_w2, lr);

        let candidate = VictimGcn {
            w1: w1.clone(),
            w2: w2.clone(),
        };
        let acc = val_accuracy(&candidate);
        if acc > best_val {
            best_val = acc;
            best = candidate;
            since_improvement = 0;
        } else {
            since_improvement += 1;
            if since_improvement >= cfg.patience {
                break;
            }
        }
    }

    Ok(best)
}

/// Forward pass then argmax per node (lowest index wins ties).
pub fn victim_predict<F: Scalar>(victim: &VictimGcn<F>, graph: &Graph<F>) -> Vec<usize> {
    let hat_a = normalized_adjacency(graph);
    let logits = victim.forward(&hat_a, graph.features());
    logits
        .rows()
        .into_iter()
        .map(|r| argmax(r.as_slice().expect("contiguous logits")))
        .collect()
}

/// Test-split quality measures.
#[derive(Debug, Clone, PartialEq)]
pub struct Metrics {
    pub accuracy: f64,
    pub per_label_accuracy: Vec<f64>,
    /// Fraction of test nodes predicted as each label whose true label differs.
    pub misclassification_rate_toward: Vec<f64>,
    pub n_test: usize,
}

/// Metrics over the test split from a full per-node prediction vector.
pub fn compute_metrics<F: Scalar>(
    graph: &Graph<F>,
    splits: &SplitAssignment,
    predictions: &[usize],
) -> Result<Metrics> {
    let k = graph.num_labels();
    let mut correct = 0usize;
    let mut label_total = vec![0usize; k];
    let mut label_correct = vec![0usize; k];
    let mut lured = vec![0usize; k];
    for &i in &splits.test {
        let truth = graph
            .label_of(i)
            .ok_or_else(|| Error::Config(format!("test node {i} has no label")))?;
        let pred = predictions[i];
        label_total[truth] += 1;
        if pred == truth {
            correct += 1;
            label_correct[truth] += 1;
        } else {
            lured[pred] += 1;
        }
    }
    let n_test = splits.test.len();
    if n_test == 0 {
        return Err(Error::Config("empty test split".into()));
    }
    Ok(Metrics {
        accuracy: correct as f64 / n_test as f64,
        per_label_accuracy: (0..k)
            .map(|c| {
                if label_total[c] == 0 {
                    0.0
                } else {
                    label_correct[c] as f64 / label_total[c] as f64
                }
            })
            .collect(),
        misclassification_rate_toward: (0..k)
            .map(|c| lured[c] as f64 / n_test as f64)
            .collect(),
        n_test,
    })
}

/// Evasion evaluation: the victim was trained once on the clean graph; both
/// graphs are scored on the test split with identical weights.
pub fn evaluate_attack<F: Scalar>(
    victim: &VictimGcn<F>,
    clean: &Graph<F>,
    attacked: &Graph<F>,
    splits: &SplitAssignment,
) -> Result<(Metrics, Metrics)> {
    if !clean.same_structure(attacked) {
        return Err(Error::Contract(
            "attacked graph differs from the clean graph in structure".into(),
        ));
    }
    let clean_metrics = compute_metrics(clean, splits, &victim_predict(victim, clean))?;
    let attacked_metrics = compute_metrics(attacked, splits, &victim_predict(victim, attacked))?;
    Ok((clean_metrics, attacked_metrics))
}

/// Mean gradient of the test-split cross-entropy with respect to every
/// feature entry, for one trained victim.
pub(crate) fn feature_gradient<F: Scalar>(
    victim: &VictimGcn<F>,
    graph: &Graph<F>,
    test_nodes: &[usize],
) -> Result<Array2<F>> {
    let hat_a = normalized_adjacency(graph);
    let ax = hat_a.mul_dense(graph.features());
    let z1 = ax.dot(&victim.w1);
    let h1 = z1.mapv(|v| v.max(F::zero()));
    let h2 = hat_a.mul_dense(&h1);
    let logits = h2.dot(&victim.w2);

    let n = graph.num_nodes();
    let k = graph.num_labels();
    let mut probs = logits;
    softmax_rows_inplace(&mut probs);
    let inv_n = F::one() / fl::<F>(test_nodes.len() as f64);
    let mut g = Array2::<F>::zeros((n, k));
    for &i in test_nodes {
        let y = graph
            .label_of(i)
            .ok_or_else(|| Error::Config(format!("test node {i} has no label")))?;
        for c in 0..k {
            let target = if c == y { F::one() } else { F::zero() };
            g[(i, c)] = (probs[(i, c)] - target) * inv_n;
        }
    }

    let dh2 = g.dot(&victim.w2.t());
    let dh1 = hat_a.mul_dense(&dh2);
    let dz1 = ndarray::Zip::from(&dh1)
        .and(&z1)
        .map_collect(|&u, &z| if z > F::zero() { u } else { F::zero() });
    Ok(hat_a.mul_dense(&dz1.dot(&victim.w1.t())))
}

pub(crate) fn column_mean_over<F: Scalar>(m: &Array2<F>, rows: &[usize]) -> Array1<F> {
    let mut out = Array1::<F>::zeros(m.ncols());
    for &r in rows {
        out = out + &m.index_axis(Axis(0), r);
    }
    out.mapv(|v| v / fl::<F>(rows.len().max(1) as f64))
}
