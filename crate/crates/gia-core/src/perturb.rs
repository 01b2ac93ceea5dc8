//! Box-constrained, cardinality-limited margin maximization.
//!
//! For one (candidate, neighbor, label-pair) the margin objective is linear
//! with independent per-coordinate box constraints, so the optimum is reached
//! at a bound for every coordinate and the cardinality limit reduces to
//! keeping the largest positive per-coordinate gains.

use crate::error::{Error, Result};
use crate::graph::{FeatureKind, PropagationOperator};
use crate::scalar::Scalar;
use crate::surrogate::{argmax, SurrogateModel};
use ndarray::{Array1, Array2, ArrayView1};
use std::fs;
use std::io::Write;
use std::path::Path;

/// Per-feature bounds and the per-node feature budget `B_f`.
#[derive(Debug, Clone)]
pub struct PerturbationDomain<F> {
    pub lb: Array1<F>,
    pub ub: Array1<F>,
    pub feature_budget: usize,
}

/// `max(1, ⌊fraction · total⌋)`, shared by node and feature budgets.
pub fn budget_from_fraction(fraction: f64, total: usize) -> usize {
    ((fraction * total as f64 + 1e-9).floor() as usize).max(1)
}

impl<F: Scalar> PerturbationDomain<F> {
    pub fn new(lb: Array1<F>, ub: Array1<F>, feature_budget: usize) -> Result<Self> {
        if lb.len() != ub.len() {
            return Err(Error::Dimension("bound vectors differ in length".into()));
        }
        if feature_budget == 0 {
            return Err(Error::Config("feature budget must be at least 1".into()));
        }
        for (l, u) in lb.iter().zip(ub.iter()) {
            if l > u {
                return Err(Error::Config(format!("lower bound {l} above upper {u}")));
            }
        }
        Ok(PerturbationDomain {
            lb,
            ub,
            feature_budget,
        })
    }

    /// Bounds 0/1 on every feature.
    pub fn binary(num_features: usize, feature_budget: usize) -> Result<Self> {
        Self::new(
            Array1::zeros(num_features),
            Array1::ones(num_features),
            feature_budget,
        )
    }

    /// One global [min, max] over all entries of the feature matrix.
    pub fn global_minmax(features: &Array2<F>, feature_budget: usize) -> Result<Self> {
        let mut lo = F::infinity();
        let mut hi = F::neg_infinity();
        for v in features.iter() {
            lo = lo.min(*v);
            hi = hi.max(*v);
        }
        if !lo.is_finite() || !hi.is_finite() {
            return Err(Error::Config("feature matrix has no finite bounds".into()));
        }
        let d = features.ncols();
        Self::new(
            Array1::from_elem(d, lo),
            Array1::from_elem(d, hi),
            feature_budget,
        )
    }

    /// Per-column [min, max].
    pub fn per_feature(features: &Array2<F>, feature_budget: usize) -> Result<Self> {
        let d = features.ncols();
        let mut lb = Array1::from_elem(d, F::infinity());
        let mut ub = Array1::from_elem(d, F::neg_infinity());
        for row in features.rows() {
            for (c, v) in row.iter().enumerate() {
                lb[c] = lb[c].min(*v);
                ub[c] = ub[c].max(*v);
            }
        }
        Self::new(lb, ub, feature_budget)
    }

    pub fn num_features(&self) -> usize {
        self.lb.len()
    }
}

/// Sparse per-feature deltas on one node's feature row.
#[derive(Debug, Clone, PartialEq)]
pub struct FeaturePerturbation<F> {
    entries: Vec<(usize, F)>,
}

impl<F: Scalar> FeaturePerturbation<F> {
    pub fn empty() -> Self {
        FeaturePerturbation {
            entries: Vec::new(),
        }
    }

    /// Entries are sorted and must name distinct features.
    pub fn new(mut entries: Vec<(usize, F)>) -> Result<Self> {
        entries.sort_unstable_by_key(|&(d, _)| d);
        for pair in entries.windows(2) {
            if pair[0].0 == pair[1].0 {
                return Err(Error::Perturbation(format!(
                    "duplicate feature {}",
                    pair[0].0
                )));
            }
        }
        Ok(FeaturePerturbation { entries })
    }

    pub fn entries(&self) -> &[(usize, F)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn delta_for(&self, feature: usize) -> F {
        match self.entries.binary_search_by_key(&feature, |&(d, _)| d) {
            Ok(pos) => self.entries[pos].1,
            Err(_) => F::zero(),
        }
    }

    /// Checks budget, box bounds and (for binary graphs) exact 0/1 landing
    /// against the row this perturbation targets.
    pub fn validate(
        &self,
        row: ArrayView1<F>,
        dom: &PerturbationDomain<F>,
        kind: FeatureKind,
    ) -> Result<()> {
        if self.entries.len() > dom.feature_budget {
            return Err(Error::Perturbation(format!(
                "{} entries exceed feature budget {}",
                self.entries.len(),
                dom.feature_budget
            )));
        }
        let tol = crate::scalar::fl::<F>(1e-9);
        for &(d, delta) in &self.entries {
            if d >= row.len() {
                return Err(Error::Perturbation(format!("feature {d} out of range")));
            }
            let new = row[d] + delta;
            if kind == FeatureKind::Binary {
                if new != F::zero() && new != F::one() {
                    return Err(Error::Perturbation(format!(
                        "feature {d} lands on non-binary value {new}"
                    )));
                }
            } else if new < dom.lb[d] - tol || new > dom.ub[d] + tol {
                return Err(Error::Perturbation(format!(
                    "feature {d} lands on {new} outside [{}, {}]",
                    dom.lb[d], dom.ub[d]
                )));
            }
        }
        Ok(())
    }
}

/// `ω_d = α_ij · (w_dc − w_dĉ)`: per-feature margin coefficients for flipping
/// neighbor `j` from `c_hat` to `c` by editing candidate `i`.
pub fn margin_coefficients<F: Scalar>(
    model: &SurrogateModel<F>,
    op: &PropagationOperator<F>,
    i: usize,
    j: usize,
    c: usize,
    c_hat: usize,
) -> Result<Array1<F>> {
    if c == c_hat {
        return Err(Error::Argument(
            "target label equals the current prediction".into(),
        ));
    }
    let alpha = op.weight(i, j);
    let w = model.weights();
    let mut omega = Array1::zeros(w.nrows());
    if alpha == F::zero() {
        return Ok(omega);
    }
    for d in 0..w.nrows() {
        omega[d] = alpha * (w[(d, c)] - w[(d, c_hat)]);
    }
    Ok(omega)
}

/// Exact optimum of the box-constrained margin LP without the cardinality
/// limit: every coordinate snaps to the bound its coefficient points at.
/// Returns the full delta vector and the per-coordinate gains `ω_d · ε_d`.
pub fn solve_box_lp<F: Scalar>(
    omega: &Array1<F>,
    x_row: ArrayView1<F>,
    dom: &PerturbationDomain<F>,
) -> (Array1<F>, Array1<F>) {
    assert_eq!(omega.len(), x_row.len(), "coefficient/feature mismatch");
    assert_eq!(omega.len(), dom.num_features(), "domain dimension mismatch");
    let d = omega.len();
    let mut eps = Array1::zeros(d);
    let mut gains = Array1::zeros(d);
    for k in 0..d {
        eps[k] = if omega[k] > F::zero() {
            dom.ub[k] - x_row[k]
        } else {
            dom.lb[k] - x_row[k]
        };
        gains[k] = omega[k] * eps[k];
    }
    (eps, gains)
}

/// Keeps the `B_f` strictly positive gains that contribute most (ties go to
/// the lower feature index). Exact under the cardinality constraint because
/// the objective is separable.
pub fn restrict_topk<F: Scalar>(
    gains: &Array1<F>,
    eps_full: &Array1<F>,
    dom: &PerturbationDomain<F>,
) -> FeaturePerturbation<F> {
    let mut positive: Vec<usize> = (0..gains.len())
        .filter(|&d| gains[d] > F::zero())
        .collect();
    positive.sort_by(|&a, &b| {
        gains[b]
            .partial_cmp(&gains[a])
            .expect("finite gains")
            .then(a.cmp(&b))
    });
    positive.truncate(dom.feature_budget);
    positive.sort_unstable();
    FeaturePerturbation {
        entries: positive.into_iter().map(|d| (d, eps_full[d])).collect(),
    }
}

/// Optimal restricted perturbation of candidate `i` for neighbor `j`, with a
/// verified prediction flip.
#[derive(Debug, Clone)]
pub struct PairwiseSolution<F> {
    pub candidate: usize,
    pub neighbor: usize,
    pub source_label: usize,
    pub target_label: usize,
    pub perturbation: FeaturePerturbation<F>,
    /// Gains of the kept features, parallel to the perturbation entries.
    pub kept_gains: Vec<F>,
    /// Margin `logit_c − logit_ĉ` after applying the restricted perturbation.
    pub objective: F,
    pub flips: bool,
}

/// Solves the restricted LP for every admissible target label and returns the
/// solution with the largest restricted objective among those whose argmax
/// actually moves to the target (a third label overtaking both is rejected).
pub fn optimal_pair_perturbation<F: Scalar>(
    model: &SurrogateModel<F>,
    op: &PropagationOperator<F>,
    clean_logits_j: ArrayView1<F>,
    x_row_i: ArrayView1<F>,
    i: usize,
    j: usize,
    target_labels: &[usize],
    dom: &PerturbationDomain<F>,
) -> Option<PairwiseSolution<F>> {
    let alpha = op.weight(i, j);
    if alpha == F::zero() {
        return None;
    }
    let c_hat = argmax(clean_logits_j.as_slice().expect("contiguous logits"));
    let mut best: Option<PairwiseSolution<F>> = None;
    for &c in target_labels {
        if c == c_hat {
            continue;
        }
        let omega = margin_coefficients(model, op, i, j, c, c_hat).expect("c != c_hat");
        let (eps_full, gains) = solve_box_lp(&omega, x_row_i, dom);
        let pert = restrict_topk(&gains, &eps_full, dom);
        if pert.is_empty() {
            continue;
        }
        let shifted = &clean_logits_j.to_owned() + &model.logit_delta(&pert).mapv(|v| v * alpha);
        let flipped = argmax(shifted.as_slice().expect("contiguous logits")) == c;
        if !flipped {
            continue;
        }
        let objective = shifted[c] - shifted[c_hat];
        let better = match &best {
            None => true,
            Some(b) => objective > b.objective,
        };
        if better {
            let kept_gains = pert.entries().iter().map(|&(d, _)| gains[d]).collect();
            best = Some(PairwiseSolution {
                candidate: i,
                neighbor: j,
                source_label: c_hat,
                target_label: c,
                perturbation: pert,
                kept_gains,
                objective,
                flips: true,
            });
        }
    }
    best
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SnapDirection {
    Upper,
    Lower,
}

/// A bound-direction perturbation pattern shared across nodes; deltas are
/// materialized per node against that node's own feature row.
#[derive(Debug, Clone)]
pub struct GlobalPerturbation {
    pub entries: Vec<(usize, SnapDirection)>,
}

impl GlobalPerturbation {
    /// Concrete deltas for one node; bound-resident features drop out.
    pub fn materialize<F: Scalar>(
        &self,
        x_row: ArrayView1<F>,
        dom: &PerturbationDomain<F>,
    ) -> FeaturePerturbation<F> {
        let mut entries = Vec::new();
        for &(d, dir) in &self.entries {
            let delta = match dir {
                SnapDirection::Upper => dom.ub[d] - x_row[d],
                SnapDirection::Lower => dom.lb[d] - x_row[d],
            };
            if delta != F::zero() {
                entries.push((d, delta));
            }
        }
        entries.sort_unstable_by_key(|&(d, _)| d);
        FeaturePerturbation { entries }
    }
}

/// Merges the per-neighbor optima of one candidate into a single perturbation:
/// the `B_f` most frequent features keep their most frequent bound direction.
/// Ties fall back to larger summed gain, then lower index / upper bound.
pub fn aggregate_final_perturbation<F: Scalar>(
    solutions: &[&PairwiseSolution<F>],
    dom: &PerturbationDomain<F>,
    x_row: ArrayView1<F>,
) -> FeaturePerturbation<F> {
    #[derive(Default, Clone)]
    struct Tally {
        up_count: usize,
        down_count: usize,
        up_gain: f64,
        down_gain: f64,
    }
    let mut tally: std::collections::BTreeMap<usize, Tally> = std::collections::BTreeMap::new();
    for sol in solutions {
        for (&(d, delta), &gain) in sol.perturbation.entries().iter().zip(&sol.kept_gains) {
            let t = tally.entry(d).or_default();
            let g = gain.to_f64().unwrap_or(0.0).abs();
            if delta > F::zero() {
                t.up_count += 1;
                t.up_gain += g;
            } else {
                t.down_count += 1;
                t.down_gain += g;
            }
        }
    }

    let mut ranked: Vec<(usize, usize, f64)> = tally
        .iter()
        .map(|(&d, t)| (d, t.up_count + t.down_count, t.up_gain + t.down_gain))
        .collect();
    ranked.sort_by(|a, b| {
        b.1.cmp(&a.1)
            .then(b.2.partial_cmp(&a.2).expect("finite gain sums"))
            .then(a.0.cmp(&b.0))
    });
    ranked.truncate(dom.feature_budget);

    let mut entries = Vec::with_capacity(ranked.len());
    for (d, _, _) in ranked {
        let t = &tally[&d];
        let snap_up = match t.up_count.cmp(&t.down_count) {
            std::cmp::Ordering::Greater => true,
            std::cmp::Ordering::Less => false,
            std::cmp::Ordering::Equal => t.up_gain >= t.down_gain,
        };
        let delta = if snap_up {
            dom.ub[d] - x_row[d]
        } else {
            dom.lb[d] - x_row[d]
        };
        entries.push((d, delta));
    }
    entries.sort_unstable_by_key(|&(d, _)| d);
    FeaturePerturbation { entries }
}

/// Returns a copy of the feature matrix with row `i` perturbed. Violations of
/// the budget or bounds are errors, never silently clamped.
pub fn apply_perturbation<F: Scalar>(
    features: &Array2<F>,
    i: usize,
    eps: &FeaturePerturbation<F>,
    dom: &PerturbationDomain<F>,
    kind: FeatureKind,
) -> Result<Array2<F>> {
    if i >= features.nrows() {
        return Err(Error::NodeIndex {
            index: i,
            num_nodes: features.nrows(),
        });
    }
    eps.validate(features.row(i), dom, kind)?;
    let mut out = features.clone();
    for &(d, delta) in eps.entries() {
        out[(i, d)] = out[(i, d)] + delta;
    }
    Ok(out)
}

/// Audit dump: one `node,feature,delta,new_value` row per perturbed feature.
pub fn dump_perturbations<F: Scalar>(
    path: &Path,
    rows: &[(usize, &FeaturePerturbation<F>, ArrayView1<F>)],
) -> Result<()> {
    let mut out = String::from("node,feature,delta,new_value\n");
    for (node, eps, x_row) in rows {
        for &(d, delta) in eps.entries() {
            let new = x_row[d] + delta;
            out.push_str(&format!("{node},{d},{delta:e},{new:e}\n"));
        }
    }
    let mut f = fs::File::create(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    f.write_all(out.as_bytes())
        .map_err(|e| Error::io(path.display().to_string(), e))
}
