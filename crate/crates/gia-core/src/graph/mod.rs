//! Graph representation, degree-based candidate filtering and dataset splits.

mod io;
mod propagation;
mod sbm;

pub use io::{load_graph, load_splits, write_graph_files};
pub use propagation::{
    normalized_adjacency, propagation_operator, PropagationOperator, SparseSym,
};
pub use sbm::{generate_sbm, SbmConfig};

use crate::error::{Error, Result};
use crate::rng::rng_from;
use crate::scalar::Scalar;
use ndarray::Array2;
use rand::seq::SliceRandom;

/// Value domain of the feature matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureKind {
    /// Every feature is exactly 0 or 1.
    Binary,
    /// Integer-valued features with known bounds.
    BoundedDiscrete,
    /// Real-valued features.
    Continuous,
}

impl FeatureKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "binary" => Ok(FeatureKind::Binary),
            "discrete" | "bounded-discrete" => Ok(FeatureKind::BoundedDiscrete),
            "continuous" => Ok(FeatureKind::Continuous),
            other => Err(Error::Config(format!("unknown feature kind '{other}'"))),
        }
    }
}

/// Undirected attributed graph: the attack substrate.
///
/// Edges are stored canonically as `(u, v)` with `u < v`, deduplicated, with
/// no self-loops (self-loops enter only during normalization).
#[derive(Debug, Clone)]
pub struct Graph<F> {
    num_nodes: usize,
    edges: Vec<(usize, usize)>,
    neighbors: Vec<Vec<usize>>,
    features: Array2<F>,
    labels: Vec<Option<usize>>,
    num_labels: usize,
    feature_kind: FeatureKind,
}

impl<F: Scalar> Graph<F> {
    pub fn new(
        features: Array2<F>,
        edges: Vec<(usize, usize)>,
        labels: Vec<Option<usize>>,
        num_labels: usize,
        feature_kind: FeatureKind,
    ) -> Result<Self> {
        let num_nodes = features.nrows();
        if labels.len() != num_nodes {
            return Err(Error::Dimension(format!(
                "{} labels for {} nodes",
                labels.len(),
                num_nodes
            )));
        }
        for lab in labels.iter().flatten() {
            if *lab >= num_labels {
                return Err(Error::Label {
                    label: *lab,
                    num_labels,
                });
            }
        }
        if feature_kind == FeatureKind::Binary {
            let zero = F::zero();
            let one = F::one();
            if let Some(bad) = features.iter().find(|v| **v != zero && **v != one) {
                return Err(Error::Config(format!(
                    "binary feature matrix contains non-binary value {bad}"
                )));
            }
        }

        let mut canon: Vec<(usize, usize)> = Vec::with_capacity(edges.len());
        for (u, v) in edges {
            if u >= num_nodes {
                return Err(Error::NodeIndex {
                    index: u,
                    num_nodes,
                });
            }
            if v >= num_nodes {
                return Err(Error::NodeIndex {
                    index: v,
                    num_nodes,
                });
            }
            if u == v {
                return Err(Error::Contract(format!("self-loop on node {u}")));
            }
            canon.push((u.min(v), u.max(v)));
        }
        canon.sort_unstable();
        canon.dedup();

        let mut neighbors = vec![Vec::new(); num_nodes];
        for &(u, v) in &canon {
            neighbors[u].push(v);
            neighbors[v].push(u);
        }
        for list in &mut neighbors {
            list.sort_unstable();
        }

        Ok(Graph {
            num_nodes,
            edges: canon,
            neighbors,
            features,
            labels,
            num_labels,
            feature_kind,
        })
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn num_features(&self) -> usize {
        self.features.ncols()
    }

    pub fn num_labels(&self) -> usize {
        self.num_labels
    }

    pub fn feature_kind(&self) -> FeatureKind {
        self.feature_kind
    }

    pub fn features(&self) -> &Array2<F> {
        &self.features
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn neighbors(&self, node: usize) -> &[usize] {
        &self.neighbors[node]
    }

    /// Raw degree, without self-loops.
    pub fn degree(&self, node: usize) -> usize {
        self.neighbors[node].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.neighbors.iter().map(Vec::len).collect()
    }

    pub fn labels(&self) -> &[Option<usize>] {
        &self.labels
    }

    pub fn label_of(&self, node: usize) -> Option<usize> {
        self.labels[node]
    }

    pub fn labeled_nodes(&self) -> Vec<usize> {
        (0..self.num_nodes)
            .filter(|&i| self.labels[i].is_some())
            .collect()
    }

    /// Same structure and labels, different feature matrix. Used to build the
    /// attacked graph from the clean one.
    pub fn with_features(&self, features: Array2<F>) -> Result<Self> {
        if features.dim() != self.features.dim() {
            return Err(Error::Dimension(format!(
                "feature matrix {:?} does not match graph {:?}",
                features.dim(),
                self.features.dim()
            )));
        }
        let mut g = self.clone();
        g.features = features;
        Ok(g)
    }

    pub fn same_structure(&self, other: &Self) -> bool {
        self.num_nodes == other.num_nodes && self.edges == other.edges
    }
}

/// The `(1 - fraction)`-quantile of a degree multiset: the cut used by
/// [`candidate_filter`].
pub fn degree_threshold(degrees: &[usize], remove_top_fraction: f64) -> usize {
    assert!(
        (0.0..1.0).contains(&remove_top_fraction),
        "remove_top_fraction must lie in [0, 1)"
    );
    let mut sorted = degrees.to_vec();
    sorted.sort_unstable();
    // Nudge before ceil so exact quantile positions survive float rounding.
    let k = ((1.0 - remove_top_fraction) * sorted.len() as f64 - 1e-9)
        .ceil()
        .max(1.0) as usize;
    sorted[k - 1]
}

/// Keeps nodes whose raw degree is at or below the `(1 - fraction)`-quantile
/// degree. Ties at the threshold are kept, so the removed share can fall
/// slightly short of the request.
pub fn candidate_filter<F: Scalar>(graph: &Graph<F>, remove_top_fraction: f64) -> Vec<usize> {
    let n = graph.num_nodes();
    if n == 0 {
        return Vec::new();
    }
    let threshold = degree_threshold(&graph.degrees(), remove_top_fraction);
    (0..n).filter(|&i| graph.degree(i) <= threshold).collect()
}

/// Disjoint train/validation/test node sets at a 3:1:1 ratio.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitAssignment {
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
    pub test: Vec<usize>,
    pub seed: u64,
}

impl SplitAssignment {
    pub fn len(&self) -> usize {
        self.train.len() + self.validation.len() + self.test.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Seeded shuffle of the labeled nodes followed by a 3:1:1 partition
/// (integer arithmetic, remainder goes to the test set).
pub fn make_splits<F: Scalar>(graph: &Graph<F>, seed: u64) -> Result<SplitAssignment> {
    let mut nodes = graph.labeled_nodes();
    if nodes.is_empty() {
        return Err(Error::Config("cannot split an unlabeled graph".into()));
    }
    let mut rng = rng_from(seed);
    nodes.shuffle(&mut rng);

    let m = nodes.len();
    let n_train = m * 3 / 5;
    let n_val = m / 5;
    let mut train: Vec<usize> = nodes[..n_train].to_vec();
    let mut validation: Vec<usize> = nodes[n_train..n_train + n_val].to_vec();
    let mut test: Vec<usize> = nodes[n_train + n_val..].to_vec();
    train.sort_unstable();
    validation.sort_unstable();
    test.sort_unstable();

    Ok(SplitAssignment {
        train,
        validation,
        test,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;

    fn graph_with_edges(n: usize, edges: &[(usize, usize)]) -> Graph<f64> {
        Graph::new(
            Array2::zeros((n, 2)),
            edges.to_vec(),
            vec![Some(0); n],
            1,
            FeatureKind::Continuous,
        )
        .unwrap()
    }

    #[test]
    fn reversed_duplicate_edges_collapse() {
        let g = graph_with_edges(3, &[(0, 1), (1, 0), (1, 2)]);
        assert_eq!(g.edges(), &[(0, 1), (1, 2)]);
    }

    #[test]
    fn edgeless_graph_is_fine() {
        let g = graph_with_edges(2, &[]);
        assert_eq!(g.num_edges(), 0);
        assert_eq!(g.degree(0), 0);
    }

    #[test]
    fn self_loop_is_rejected() {
        let err = Graph::<f64>::new(
            Array2::zeros((2, 1)),
            vec![(1, 1)],
            vec![None, None],
            0,
            FeatureKind::Continuous,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Contract(_)));
    }

    #[test]
    fn endpoint_out_of_range_is_rejected() {
        let err = Graph::<f64>::new(
            Array2::zeros((2, 1)),
            vec![(0, 5)],
            vec![None, None],
            0,
            FeatureKind::Continuous,
        )
        .unwrap_err();
        assert!(matches!(err, Error::NodeIndex { index: 5, .. }));
    }

    #[test]
    fn label_out_of_range_is_rejected() {
        let err = Graph::<f64>::new(
            Array2::zeros((2, 1)),
            vec![],
            vec![Some(3), None],
            2,
            FeatureKind::Continuous,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Label { label: 3, .. }));
    }

    #[test]
    fn binary_kind_rejects_fractional_values() {
        let mut x = Array2::<f64>::zeros((2, 2));
        x[(1, 1)] = 0.5;
        let err = Graph::new(x, vec![], vec![None, None], 0, FeatureKind::Binary).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn filter_keeps_everyone_on_uniform_degrees() {
        // 4-cycle: all degrees equal.
        let g = graph_with_edges(4, &[(0, 1), (1, 2), (2, 3), (0, 3)]);
        assert_eq!(candidate_filter(&g, 0.1), vec![0, 1, 2, 3]);
    }

    #[test]
    fn threshold_cuts_at_the_quantile() {
        let degrees: Vec<usize> = (1..=10).collect();
        assert_eq!(degree_threshold(&degrees, 0.3), 7);
        assert_eq!(degree_threshold(&degrees, 0.1), 9);
        assert_eq!(degree_threshold(&degrees, 0.0), 10);
    }

    #[test]
    fn filter_keeps_ties_at_the_threshold() {
        // Star with 4 leaves: degrees [4, 1, 1, 1, 1]. Removing the top 20%
        // cuts at degree 1 and drops only the hub.
        let g = graph_with_edges(5, &[(0, 1), (0, 2), (0, 3), (0, 4)]);
        assert_eq!(candidate_filter(&g, 0.2), vec![1, 2, 3, 4]);
    }

    #[test]
    fn filter_zero_fraction_keeps_all() {
        let g = graph_with_edges(5, &[(0, 1), (1, 2), (2, 3), (3, 4)]);
        assert_eq!(candidate_filter(&g, 0.0).len(), 5);
    }

    #[test]
    fn filter_is_monotone_in_fraction() {
        let mut edges = Vec::new();
        for i in 1..20usize {
            edges.push((0, i));
        }
        for i in 2..8usize {
            edges.push((1, i));
        }
        let g = graph_with_edges(20, &edges);
        let mut prev: Option<Vec<usize>> = None;
        for f in [0.0, 0.1, 0.2, 0.3, 0.5, 0.8] {
            let cur = candidate_filter(&g, f);
            if let Some(p) = prev {
                assert!(cur.iter().all(|v| p.contains(v)), "fraction {f} grew the set");
            }
            prev = Some(cur);
        }
    }

    #[test]
    fn splits_follow_three_one_one() {
        let g = graph_with_edges(5, &[]);
        let s = make_splits(&g, 1).unwrap();
        assert_eq!(
            (s.train.len(), s.validation.len(), s.test.len()),
            (3, 1, 1)
        );
    }

    #[test]
    fn splits_are_deterministic_and_disjoint() {
        let g = graph_with_edges(50, &[]);
        let a = make_splits(&g, 7).unwrap();
        let b = make_splits(&g, 7).unwrap();
        assert_eq!(a, b);
        let c = make_splits(&g, 8).unwrap();
        assert_ne!(a, c);

        let mut all: Vec<usize> = a
            .train
            .iter()
            .chain(&a.validation)
            .chain(&a.test)
            .copied()
            .collect();
        all.sort_unstable();
        all.dedup();
        assert_eq!(all.len(), 50);
    }

    #[test]
    fn split_sizes_match_floor_partition() {
        let g = graph_with_edges(2485, &[]);
        let s = make_splits(&g, 0).unwrap();
        assert_eq!(
            (s.train.len(), s.validation.len(), s.test.len()),
            (1491, 497, 497)
        );
    }

    #[test]
    fn unlabeled_graph_cannot_split() {
        let g = Graph::<f64>::new(
            Array2::zeros((3, 1)),
            vec![],
            vec![None, None, None],
            0,
            FeatureKind::Continuous,
        )
        .unwrap();
        assert!(make_splits(&g, 0).is_err());
    }
}
