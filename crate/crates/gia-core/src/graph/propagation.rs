//! Symmetric normalization and the L-step propagation operator.

use super::Graph;
use crate::error::{Error, Result};
use crate::scalar::{fl, Scalar};
use ndarray::{Array1, Array2};

/// Row-indexed sparse symmetric matrix with explicit nonzero lists.
///
/// Columns within each row are sorted. All stored entries are nonnegative.
#[derive(Debug, Clone)]
pub struct SparseSym<F> {
    n: usize,
    rows: Vec<Vec<(usize, F)>>,
}

impl<F: Scalar> SparseSym<F> {
    pub fn from_rows(n: usize, mut rows: Vec<Vec<(usize, F)>>) -> Self {
        for row in &mut rows {
            row.sort_unstable_by_key(|&(j, _)| j);
        }
        SparseSym { n, rows }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn row(&self, i: usize) -> &[(usize, F)] {
        &self.rows[i]
    }

    /// Entry `(i, j)`, zero when not stored.
    pub fn get(&self, i: usize, j: usize) -> F {
        match self.rows[i].binary_search_by_key(&j, |&(c, _)| c) {
            Ok(pos) => self.rows[i][pos].1,
            Err(_) => F::zero(),
        }
    }

    /// Sparse-sparse product; keeps strictly positive results only (all
    /// operands here are nonnegative, so nothing cancels).
    pub fn matmul(&self, other: &SparseSym<F>) -> SparseSym<F> {
        assert_eq!(self.n, other.n, "sparse product dimension mismatch");
        let mut acc: Vec<F> = vec![F::zero(); self.n];
        let mut touched: Vec<usize> = Vec::new();
        let mut rows = Vec::with_capacity(self.n);
        for i in 0..self.n {
            for &(k, a) in &self.rows[i] {
                for &(j, b) in &other.rows[k] {
                    if acc[j] == F::zero() {
                        touched.push(j);
                    }
                    acc[j] += a * b;
                }
            }
            touched.sort_unstable();
            let mut row = Vec::with_capacity(touched.len());
            for &j in &touched {
                if acc[j] > F::zero() {
                    row.push((j, acc[j]));
                }
                acc[j] = F::zero();
            }
            touched.clear();
            rows.push(row);
        }
        SparseSym { n: self.n, rows }
    }

    /// Sparse-dense product `self · x`.
    pub fn mul_dense(&self, x: &Array2<F>) -> Array2<F> {
        assert_eq!(self.n, x.nrows(), "sparse-dense dimension mismatch");
        let d = x.ncols();
        let mut out = Array2::zeros((self.n, d));
        for i in 0..self.n {
            for &(k, a) in &self.rows[i] {
                let src = x.row(k);
                let mut dst = out.row_mut(i);
                for c in 0..d {
                    dst[c] += a * src[c];
                }
            }
        }
        out
    }

    /// Sparse-vector product `self · v`.
    pub fn mul_vec(&self, v: &Array1<F>) -> Array1<F> {
        assert_eq!(self.n, v.len(), "sparse-vector dimension mismatch");
        let mut out = Array1::zeros(self.n);
        for i in 0..self.n {
            let mut s = F::zero();
            for &(k, a) in &self.rows[i] {
                s += a * v[k];
            }
            out[i] = s;
        }
        out
    }

    pub fn to_dense(&self) -> Array2<F> {
        let mut out = Array2::zeros((self.n, self.n));
        for i in 0..self.n {
            for &(j, v) in &self.rows[i] {
                out[(i, j)] = v;
            }
        }
        out
    }

    pub fn max_asymmetry(&self) -> F {
        let mut worst = F::zero();
        for i in 0..self.n {
            for &(j, v) in &self.rows[i] {
                let diff = (v - self.get(j, i)).abs();
                if diff > worst {
                    worst = diff;
                }
            }
        }
        worst
    }
}

/// `Â = D̃^{-1/2} (A + I) D̃^{-1/2}` with self-looped degrees `d̃ = deg + 1`.
/// An isolated node gets the single entry `Â_ii = 1`.
pub fn normalized_adjacency<F: Scalar>(graph: &Graph<F>) -> SparseSym<F> {
    let n = graph.num_nodes();
    let inv_sqrt: Vec<F> = (0..n)
        .map(|i| F::one() / fl::<F>((graph.degree(i) + 1) as f64).sqrt())
        .collect();
    let mut rows = Vec::with_capacity(n);
    for i in 0..n {
        let mut row: Vec<(usize, F)> = Vec::with_capacity(graph.degree(i) + 1);
        for &j in graph.neighbors(i) {
            row.push((j, inv_sqrt[i] * inv_sqrt[j]));
        }
        row.push((i, inv_sqrt[i] * inv_sqrt[i]));
        row.sort_unstable_by_key(|&(j, _)| j);
        rows.push(row);
    }
    SparseSym { n, rows }
}

/// One-step normalized adjacency together with its L-th power.
#[derive(Debug, Clone)]
pub struct PropagationOperator<F> {
    hat_a: SparseSym<F>,
    powered: SparseSym<F>,
    depth: usize,
}

impl<F: Scalar> PropagationOperator<F> {
    pub fn hat_a(&self) -> &SparseSym<F> {
        &self.hat_a
    }

    pub fn powered(&self) -> &SparseSym<F> {
        &self.powered
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn num_nodes(&self) -> usize {
        self.hat_a.n()
    }

    /// Propagation weight `α_ij` between nodes `i` and `j` at depth L.
    pub fn weight(&self, i: usize, j: usize) -> F {
        self.powered.get(i, j)
    }

    /// Nodes other than `i` whose logits depend on `i`'s features.
    pub fn receptive_neighbors(&self, i: usize) -> Vec<usize> {
        self.powered
            .row(i)
            .iter()
            .filter(|&&(j, v)| j != i && v > F::zero())
            .map(|&(j, _)| j)
            .collect()
    }
}

/// Builds `Â` and `Â^depth` by repeated sparse multiplication.
pub fn propagation_operator<F: Scalar>(
    graph: &Graph<F>,
    depth: usize,
) -> Result<PropagationOperator<F>> {
    if depth == 0 {
        return Err(Error::Config("propagation depth must be at least 1".into()));
    }
    let hat_a = normalized_adjacency(graph);
    let mut powered = hat_a.clone();
    for _ in 1..depth {
        powered = powered.matmul(&hat_a);
    }
    Ok(PropagationOperator {
        hat_a,
        powered,
        depth,
    })
}
