//! Linear surrogate: feature propagation plus multinomial logistic regression.
//!
//! With the L-step operator `P = Â^L` and propagated features `S = P·X`, node
//! j's logits are `S_j·W + b`. Because the map is linear in X, perturbing node
//! i's features by ε shifts node j's logits by exactly `α_ij · (ε·W)`.

use crate::error::{Error, Result};
use crate::graph::PropagationOperator;
use crate::perturb::FeaturePerturbation;
use crate::scalar::{fl, Scalar};
use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::Rng;
use std::fs;
use std::io::Write;
use std::path::Path;

/// Training hyperparameters for the surrogate.
#[derive(Debug, Clone)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub weight_decay: f64,
    pub seed: u64,
    pub use_bias: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.2,
            epochs: 300,
            weight_decay: 5e-4,
            seed: 0,
            use_bias: true,
        }
    }
}

/// Effective linear weights of the trained surrogate.
#[derive(Debug, Clone)]
pub struct SurrogateModel<F> {
    weights: Array2<F>,
    bias: Array1<F>,
    depth: usize,
    trained_on: String,
}

/// A node's predicted label with its logits.
#[derive(Debug, Clone)]
pub struct Prediction<F> {
    pub node: usize,
    pub label: usize,
    pub logits: Array1<F>,
}

/// First index of the maximum: deterministic lowest-index tie-break.
pub fn argmax<F: PartialOrd + Copy>(values: &[F]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

/// `S = Â^L · X`: each row mixes the feature rows reachable within L hops.
pub fn propagate_features<F: Scalar>(
    op: &PropagationOperator<F>,
    features: &Array2<F>,
) -> Result<Array2<F>> {
    if features.nrows() != op.num_nodes() {
        return Err(Error::Dimension(format!(
            "{} feature rows for {} nodes",
            features.nrows(),
            op.num_nodes()
        )));
    }
    Ok(op.powered().mul_dense(features))
}

fn softmax_rows<F: Scalar>(logits: &Array2<F>) -> Array2<F> {
    let mut out = logits.clone();
    for mut row in out.rows_mut() {
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
    out
}

/// Cross-entropy (mean over rows) plus `weight_decay · ‖W‖²`.
pub(crate) fn ce_loss<F: Scalar>(
    s_rows: &Array2<F>,
    labels: &[usize],
    w: &Array2<F>,
    bias: &Array1<F>,
    weight_decay: F,
) -> F {
    let logits = s_rows.dot(w) + bias;
    let probs = softmax_rows(&logits);
    let mut loss = F::zero();
    for (r, &y) in labels.iter().enumerate() {
        loss -= probs[(r, y)].max(fl(1e-300)).ln();
    }
    loss = loss / fl(labels.len() as f64);
    let reg: F = w.iter().map(|v| *v * *v).sum();
    loss + weight_decay * reg
}

/// Analytic gradient of [`ce_loss`] with respect to `W` and the bias.
pub(crate) fn ce_grad<F: Scalar>(
    s_rows: &Array2<F>,
    labels: &[usize],
    w: &Array2<F>,
    bias: &Array1<F>,
    weight_decay: F,
) -> (Array2<F>, Array1<F>) {
    let n = fl::<F>(labels.len() as f64);
    let logits = s_rows.dot(w) + bias;
    let mut g = softmax_rows(&logits);
    for (r, &y) in labels.iter().enumerate() {
        g[(r, y)] -= F::one();
    }
    g.mapv_inplace(|v| v / n);
    let two = fl::<F>(2.0);
    let grad_w = s_rows.t().dot(&g) + &w.mapv(|v| two * weight_decay * v);
    let grad_b = g.sum_axis(Axis(0));
    (grad_w, grad_b)
}

/// Full-batch gradient descent on the propagated training rows.
pub fn train_surrogate<F: Scalar>(
    propagated: &Array2<F>,
    labels: &[Option<usize>],
    train_set: &[usize],
    num_labels: usize,
    depth: usize,
    cfg: &TrainConfig,
) -> Result<SurrogateModel<F>> {
    if cfg.epochs == 0 {
        return Err(Error::Config("epochs must be at least 1".into()));
    }
    if cfg.learning_rate <= 0.0 {
        return Err(Error::Config("learning rate must be positive".into()));
    }
    if train_set.is_empty() {
        return Err(Error::Config("empty training set".into()));
    }
    let mut train_labels = Vec::with_capacity(train_set.len());
    for &i in train_set {
        match labels.get(i).copied().flatten() {
            Some(l) => train_labels.push(l),
            None => {
                return Err(Error::Config(format!("training node {i} has no label")));
            }
        }
    }

    let d = propagated.ncols();
    let s_train = propagated.select(Axis(0), train_set);
    let mut rng = crate::rng::rng_from(cfg.seed);
    let mut w = Array2::<F>::zeros((d, num_labels));
    w.mapv_inplace(|_| fl(rng.gen_range(-0.01..0.01)));
    let mut bias = Array1::<F>::zeros(num_labels);

    let lr = fl::<F>(cfg.learning_rate);
    let wd = fl::<F>(cfg.weight_decay);
    for epoch in 0..cfg.epochs {
        let (grad_w, grad_b) = ce_grad(&s_train, &train_labels, &w, &bias, wd);
        w = w - grad_w.mapv(|v| v * lr);
        if cfg.use_bias {
            bias = bias - grad_b.mapv(|v| v * lr);
        }
        let loss = ce_loss(&s_train, &train_labels, &w, &bias, wd);
        if !loss.is_finite() {
            return Err(Error::Training {
                epoch,
                loss: loss.to_f64().unwrap_or(f64::NAN),
            });
        }
    }

    Ok(SurrogateModel {
        weights: w,
        bias,
        depth,
        trained_on: format!("train[{}] seed {}", train_set.len(), cfg.seed),
    })
}

impl<F: Scalar> SurrogateModel<F> {
    pub fn from_parts(weights: Array2<F>, bias: Array1<F>, depth: usize) -> Self {
        SurrogateModel {
            weights,
            bias,
            depth,
            trained_on: "handcrafted".into(),
        }
    }

    pub fn weights(&self) -> &Array2<F> {
        &self.weights
    }

    pub fn bias(&self) -> &Array1<F> {
        &self.bias
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn num_labels(&self) -> usize {
        self.weights.ncols()
    }

    pub fn trained_on(&self) -> &str {
        &self.trained_on
    }

    /// Logits for every node given propagated features.
    pub fn logits_all(&self, propagated: &Array2<F>) -> Array2<F> {
        propagated.dot(&self.weights) + &self.bias
    }

    pub fn logits_row(&self, propagated_row: ArrayView1<F>) -> Array1<F> {
        propagated_row.dot(&self.weights) + &self.bias
    }

    /// Logit shift caused by a sparse feature perturbation: `ε · W`.
    pub fn logit_delta(&self, eps: &FeaturePerturbation<F>) -> Array1<F> {
        let mut delta = Array1::zeros(self.num_labels());
        for &(d, v) in eps.entries() {
            delta = delta + &self.weights.row(d).mapv(|w| w * v);
        }
        delta
    }
}

/// Labels every node by argmax logit (lowest index wins ties).
pub fn predict_all<F: Scalar>(
    model: &SurrogateModel<F>,
    propagated: &Array2<F>,
) -> Vec<Prediction<F>> {
    let logits = model.logits_all(propagated);
    logits
        .rows()
        .into_iter()
        .enumerate()
        .map(|(node, row)| Prediction {
            node,
            label: argmax(row.as_slice().expect("contiguous logits")),
            logits: row.to_owned(),
        })
        .collect()
}

/// Logits of node `j` after perturbing node `i`'s features by `eps`,
/// computed incrementally as `clean_logits(j) + α_ij · (ε·W)`.
pub fn perturbed_logits<F: Scalar>(
    model: &SurrogateModel<F>,
    op: &PropagationOperator<F>,
    features: ArrayView2<F>,
    i: usize,
    eps: &FeaturePerturbation<F>,
    j: usize,
) -> Array1<F> {
    let d = features.ncols();
    let mut s_j = Array1::<F>::zeros(d);
    for &(k, alpha) in op.powered().row(j) {
        for c in 0..d {
            s_j[c] += alpha * features[(k, c)];
        }
    }
    let clean = model.logits_row(s_j.view());
    let alpha_ij = op.weight(i, j);
    if alpha_ij == F::zero() || eps.is_empty() {
        return clean;
    }
    clean + &model.logit_delta(eps).mapv(|v| v * alpha_ij)
}

/// Writes the model as CSV: header `D,K,L`, one row of W per line, bias last.
pub fn save_model<F: Scalar>(model: &SurrogateModel<F>, path: &Path) -> Result<()> {
    let (d, k) = model.weights.dim();
    let mut out = String::new();
    out.push_str(&format!("{},{},{}\n", d, k, model.depth));
    for row in model.weights.rows() {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    let cells: Vec<String> = model.bias.iter().map(|v| format!("{v:e}")).collect();
    out.push_str(&cells.join(","));
    out.push('\n');
    let mut f = fs::File::create(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    f.write_all(out.as_bytes())
        .map_err(|e| Error::io(path.display().to_string(), e))
}

pub fn load_model<F: Scalar>(path: &Path) -> Result<SurrogateModel<F>> {
    let text =
        fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| Error::Parse {
        path: path.display().to_string(),
        line: 1,
        msg: "empty model file".into(),
    })?;
    let dims: Vec<usize> = header
        .split(',')
        .map(|t| t.trim().parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::Parse {
            path: path.display().to_string(),
            line: 1,
            msg: format!("bad header '{header}'"),
        })?;
    if dims.len() != 3 {
        return Err(Error::Parse {
            path: path.display().to_string(),
            line: 1,
            msg: "header must be 'D,K,L'".into(),
        });
    }
    let (d, k, depth) = (dims[0], dims[1], dims[2]);
    let mut parse_row = |expected: usize| -> Result<Vec<F>> {
        let (idx, line) = lines.next().ok_or_else(|| Error::Parse {
            path: path.display().to_string(),
            line: 0,
            msg: "model file truncated".into(),
        })?;
        let row: Vec<F> = line
            .split(',')
            .map(|t| t.trim().parse::<f64>().map(fl::<F>))
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::Parse {
                path: path.display().to_string(),
                line: idx + 1,
                msg: "non-numeric weight".into(),
            })?;
        if row.len() != expected {
            return Err(Error::Parse {
                path: path.display().to_string(),
                line: idx + 1,
                msg: format!("{} values, expected {expected}", row.len()),
            });
        }
        Ok(row)
    };
    let mut flat = Vec::with_capacity(d * k);
    for _ in 0..d {
        flat.extend(parse_row(k)?);
    }
    let bias = Array1::from_vec(parse_row(k)?);
    let weights = Array2::from_shape_vec((d, k), flat)
        .map_err(|e| Error::Dimension(format!("model shape: {e}")))?;
    Ok(SurrogateModel {
        weights,
        bias,
        depth,
        trained_on: format!("loaded from {}", path.display()),
    })
}
