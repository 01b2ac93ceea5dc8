//! Dataset file formats.
//!
//! - edge file: one `u<TAB>v` pair per line, 0-based, `#` starts a comment
//! - feature file: CSV, row r = features of node r
//! - label file: CSV, one integer per line, blank line = unlabeled
//! - split file: CSV `node,split` with split in {train,val,test}

use super::{FeatureKind, Graph, SplitAssignment};
use crate::error::{Error, Result};
use crate::scalar::{fl, Scalar};
use ndarray::Array2;
use std::fs;
use std::io::Write;
use std::path::Path;

fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))
}

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.display().to_string(),
        line,
        msg: msg.into(),
    }
}

fn parse_edges(path: &Path) -> Result<Vec<(usize, usize)>> {
    let text = read_to_string(path)?;
    let mut edges = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split('\t');
        let u = parts
            .next()
            .and_then(|t| t.trim().parse::<usize>().ok())
            .ok_or_else(|| parse_err(path, idx + 1, format!("expected 'u<TAB>v', got '{raw}'")))?;
        let v = parts
            .next()
            .and_then(|t| t.trim().parse::<usize>().ok())
            .ok_or_else(|| parse_err(path, idx + 1, format!("expected 'u<TAB>v', got '{raw}'")))?;
        if parts.next().is_some() {
            return Err(parse_err(path, idx + 1, "trailing fields after edge pair"));
        }
        edges.push((u, v));
    }
    Ok(edges)
}

fn parse_features<F: Scalar>(path: &Path) -> Result<Array2<F>> {
    let text = read_to_string(path)?;
    let mut rows: Vec<Vec<F>> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let mut row = Vec::new();
        for field in line.split(',') {
            let value: f64 = field.trim().parse().map_err(|_| {
                parse_err(path, idx + 1, format!("non-numeric feature '{field}'"))
            })?;
            row.push(fl::<F>(value));
        }
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(parse_err(
                    path,
                    idx + 1,
                    format!("row has {} columns, expected {}", row.len(), first.len()),
                ));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(parse_err(path, 1, "empty feature file"));
    }
    let d = rows[0].len();
    let flat: Vec<F> = rows.into_iter().flatten().collect();
    let n = flat.len() / d;
    Array2::from_shape_vec((n, d), flat)
        .map_err(|e| parse_err(path, 0, format!("shape error: {e}")))
}

fn parse_labels(path: &Path) -> Result<Vec<Option<usize>>> {
    let text = read_to_string(path)?;
    let mut labels = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            labels.push(None);
            continue;
        }
        let value: usize = line
            .parse()
            .map_err(|_| parse_err(path, idx + 1, format!("non-integer label '{line}'")))?;
        labels.push(Some(value));
    }
    Ok(labels)
}

/// Loads and validates a graph from its three dataset files. Duplicate and
/// reversed-duplicate edges collapse; self-loops are dropped.
pub fn load_graph<F: Scalar>(
    edge_path: &Path,
    feature_path: &Path,
    label_path: &Path,
    feature_kind: FeatureKind,
) -> Result<Graph<F>> {
    let features = parse_features::<F>(feature_path)?;
    let n = features.nrows();
    let edges: Vec<(usize, usize)> = parse_edges(edge_path)?
        .into_iter()
        .filter(|(u, v)| u != v)
        .collect();
    let mut labels = parse_labels(label_path)?;
    if labels.len() > n {
        return Err(Error::Dimension(format!(
            "label file has {} rows for {} nodes",
            labels.len(),
            n
        )));
    }
    labels.resize(n, None);
    let num_labels = labels.iter().flatten().map(|l| l + 1).max().unwrap_or(0);
    Graph::new(features, edges, labels, num_labels, feature_kind)
}

/// Reads a `node,split` assignment. A `node,split` header line is allowed.
pub fn load_splits(path: &Path, num_nodes: usize) -> Result<SplitAssignment> {
    let text = read_to_string(path)?;
    let mut train = Vec::new();
    let mut validation = Vec::new();
    let mut test = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line == "node,split" {
            continue;
        }
        let (node_s, split_s) = line
            .split_once(',')
            .ok_or_else(|| parse_err(path, idx + 1, "expected 'node,split'"))?;
        let node: usize = node_s
            .trim()
            .parse()
            .map_err(|_| parse_err(path, idx + 1, format!("bad node id '{node_s}'")))?;
        if node >= num_nodes {
            return Err(Error::NodeIndex {
                index: node,
                num_nodes,
            });
        }
        match split_s.trim() {
            "train" => train.push(node),
            "val" => validation.push(node),
            "test" => test.push(node),
            other => return Err(parse_err(path, idx + 1, format!("bad split '{other}'"))),
        }
    }
    train.sort_unstable();
    validation.sort_unstable();
    test.sort_unstable();
    Ok(SplitAssignment {
        train,
        validation,
        test,
        seed: 0,
    })
}

/// Writes a graph back out in the dataset formats (used by the synthetic
/// generator so generated data flows through the same loader).
pub fn write_graph_files<F: Scalar>(
    graph: &Graph<F>,
    edge_path: &Path,
    feature_path: &Path,
    label_path: &Path,
) -> Result<()> {
    let mut edges = String::new();
    for &(u, v) in graph.edges() {
        edges.push_str(&format!("{u}\t{v}\n"));
    }
    write_file(edge_path, &edges)?;

    let mut feats = String::new();
    for row in graph.features().rows() {
        let cells: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
        feats.push_str(&cells.join(","));
        feats.push('\n');
    }
    write_file(feature_path, &feats)?;

    let mut labels = String::new();
    for lab in graph.labels() {
        match lab {
            Some(l) => labels.push_str(&format!("{l}\n")),
            None => labels.push('\n'),
        }
    }
    write_file(label_path, &labels)
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    let mut f = fs::File::create(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    f.write_all(contents.as_bytes())
        .map_err(|e| Error::io(path.display().to_string(), e))
}
