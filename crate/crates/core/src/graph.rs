//! Immutable sparse directed graph and the hyperlink-matrix view over it.
//!
//! A [`GraphHandle`] stores forward and reverse adjacency in CSR form. Rows of
//! the hyperlink matrix `W` follow from it directly: a node with out-degree
//! `d > 0` spreads weight `1/d` over its successors, a dangling node spreads
//! `1/n` over every node. Dangling rows are never materialized.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Dense node index in `[0, n)`.
pub type NodeId = usize;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphHandle {
    n: usize,
    out_offsets: Vec<usize>,
    out_targets: Vec<NodeId>,
    in_offsets: Vec<usize>,
    in_sources: Vec<NodeId>,
    dangling: Vec<NodeId>,
    is_dangling: Vec<bool>,
}

/// One row of the hyperlink matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HyperlinkRow<'a> {
    /// Weight `weight` on each successor.
    Links { successors: &'a [NodeId], weight: f64 },
    /// Dangling row: weight `weight = 1/n` on every node.
    Uniform { weight: f64, n: usize },
}

impl HyperlinkRow<'_> {
    pub fn total_weight(&self) -> f64 {
        match *self {
            HyperlinkRow::Links { successors, weight } => weight * successors.len() as f64,
            HyperlinkRow::Uniform { weight, n } => weight * n as f64,
        }
    }

    /// Weight this row places on node `j`.
    pub fn weight_to(&self, j: NodeId) -> f64 {
        match *self {
            HyperlinkRow::Links { successors, weight } => {
                if successors.binary_search(&j).is_ok() {
                    weight
                } else {
                    0.0
                }
            }
            HyperlinkRow::Uniform { weight, .. } => weight,
        }
    }
}

impl GraphHandle {
    /// Builds a graph from an edge iterator. Duplicate edges collapse; self-loops stay.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (NodeId, NodeId)>,
    {
        let mut pairs: Vec<(NodeId, NodeId)> = Vec::new();
        for (u, v) in edges {
            for id in [u, v] {
                if id >= n {
                    return Err(Error::Range { line: 0, id, n });
                }
            }
            pairs.push((u, v));
        }
        Ok(Self::from_checked_pairs(n, pairs))
    }

    fn from_checked_pairs(n: usize, mut pairs: Vec<(NodeId, NodeId)>) -> Self {
        pairs.sort_unstable();
        pairs.dedup();

        let mut out_offsets = vec![0usize; n + 1];
        for &(u, _) in &pairs {
            out_offsets[u + 1] += 1;
        }
        for i in 0..n {
            out_offsets[i + 1] += out_offsets[i];
        }
        let out_targets: Vec<NodeId> = pairs.iter().map(|&(_, v)| v).collect();

        let mut in_offsets = vec![0usize; n + 1];
        for &(_, v) in &pairs {
            in_offsets[v + 1] += 1;
        }
        for i in 0..n {
            in_offsets[i + 1] += in_offsets[i];
        }
        let mut cursor = in_offsets.clone();
        let mut in_sources = vec![0; pairs.len()];
        // pairs are sorted by source, so each in-list comes out sorted
        for &(u, v) in &pairs {
            in_sources[cursor[v]] = u;
            cursor[v] += 1;
        }

        let is_dangling: Vec<bool> = (0..n).map(|i| out_offsets[i] == out_offsets[i + 1]).collect();
        let dangling = (0..n).filter(|&i| is_dangling[i]).collect();

        Self {
            n,
            out_offsets,
            out_targets,
            in_offsets,
            in_sources,
            dangling,
            is_dangling,
        }
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.out_targets.len()
    }

    pub fn successors(&self, i: NodeId) -> &[NodeId] {
        &self.out_targets[self.out_offsets[i]..self.out_offsets[i + 1]]
    }

    pub fn predecessors(&self, i: NodeId) -> &[NodeId] {
        &self.in_sources[self.in_offsets[i]..self.in_offsets[i + 1]]
    }

    pub fn out_degree(&self, i: NodeId) -> usize {
        self.out_offsets[i + 1] - self.out_offsets[i]
    }

    pub fn dangling_nodes(&self) -> &[NodeId] {
        &self.dangling
    }

    pub fn is_dangling(&self, i: NodeId) -> bool {
        self.is_dangling[i]
    }

    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        (0..self.n).flat_map(move |u| self.successors(u).iter().map(move |&v| (u, v)))
    }

    pub fn hyperlink_row(&self, i: NodeId) -> HyperlinkRow<'_> {
        let d = self.out_degree(i);
        if d == 0 {
            HyperlinkRow::Uniform {
                weight: 1.0 / self.n as f64,
                n: self.n,
            }
        } else {
            HyperlinkRow::Links {
                successors: self.successors(i),
                weight: 1.0 / d as f64,
            }
        }
    }

    /// Returns a copy with one extra edge `u -> v`.
    pub fn with_edge(&self, u: NodeId, v: NodeId) -> Result<Self> {
        if u >= self.n || v >= self.n {
            return Err(Error::Range {
                line: 0,
                id: u.max(v),
                n: self.n,
            });
        }
        let mut pairs: Vec<_> = self.edges().collect();
        pairs.push((u, v));
        Ok(Self::from_checked_pairs(self.n, pairs))
    }

    /// `y = x W` for a row vector `x`; dangling mass is spread as one scalar.
    pub fn left_mul_hyperlink(&self, x: &[f64], y: &mut [f64]) {
        use rayon::prelude::*;

        let dangling_share: f64 = self.dangling.iter().map(|&i| x[i]).sum::<f64>() / self.n as f64;
        let inv_deg = |i: NodeId| 1.0 / self.out_degree(i) as f64;
        y.par_iter_mut().enumerate().with_min_len(1024).for_each(|(j, yj)| {
            let pulled: f64 = self.predecessors(j).iter().map(|&i| x[i] * inv_deg(i)).sum();
            *yj = pulled + dangling_share;
        });
    }

    /// Dense `W`. Only meant for small graphs (verification instruments).
    pub fn dense_hyperlink(&self) -> DMatrix<f64> {
        let n = self.n;
        let mut w = DMatrix::zeros(n, n);
        for i in 0..n {
            match self.hyperlink_row(i) {
                HyperlinkRow::Links { successors, weight } => {
                    for &j in successors {
                        w[(i, j)] = weight;
                    }
                }
                HyperlinkRow::Uniform { weight, .. } => {
                    for j in 0..n {
                        w[(i, j)] = weight;
                    }
                }
            }
        }
        w
    }
}

/// Parses the edge-list text format.
///
/// Lines are `u v` pairs of non-negative integers. Lines starting with `#`
/// and blank lines are skipped. An optional `n <count>` header fixes the node
/// count; otherwise it is one more than the largest id seen.
pub fn load_edge_list<R: BufRead>(reader: R) -> Result<GraphHandle> {
    let mut declared: Option<usize> = None;
    let mut pairs = Vec::new();
    let mut seen_edge = false;

    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut fields = trimmed.split_whitespace();
        let first = fields.next().unwrap_or_default();
        let second = fields.next();
        if fields.next().is_some() {
            return Err(Error::Parse {
                line: lineno,
                message: format!("expected two fields, got `{trimmed}`"),
            });
        }
        let second = second.ok_or_else(|| Error::Parse {
            line: lineno,
            message: format!("expected two fields, got `{trimmed}`"),
        })?;

        if first == "n" {
            if declared.is_some() || seen_edge {
                return Err(Error::Parse {
                    line: lineno,
                    message: "header `n <count>` must appear once, before any edge".into(),
                });
            }
            declared = Some(parse_id(second, lineno)?);
            continue;
        }
        let u = parse_id(first, lineno)?;
        let v = parse_id(second, lineno)?;
        if let Some(n) = declared {
            for id in [u, v] {
                if id >= n {
                    return Err(Error::Range { line: lineno, id, n });
                }
            }
        }
        seen_edge = true;
        pairs.push((u, v));
    }

    let n = declared.unwrap_or_else(|| pairs.iter().map(|&(u, v)| u.max(v) + 1).max().unwrap_or(0));
    Ok(GraphHandle::from_checked_pairs(n, pairs))
}

fn parse_id(token: &str, line: usize) -> Result<usize> {
    token.parse::<usize>().map_err(|_| Error::Parse {
        line,
        message: format!("`{token}` is not a non-negative integer"),
    })
}

/// Writes the header line and one `u v` line per edge, sorted, LF endings.
pub fn write_edge_list<W: Write>(g: &GraphHandle, mut out: W) -> Result<()> {
    writeln!(out, "n {}", g.node_count())?;
    for (u, v) in g.edges() {
        writeln!(out, "{u} {v}")?;
    }
    Ok(())
}

/// Optional sidecar mapping URLs to node ids, one `id url` pair per line.
///
/// Nothing in the analysis modules reads it; it exists so callers can label
/// output rows.
pub fn load_url_map<R: BufRead>(reader: R) -> Result<HashMap<NodeId, String>> {
    let mut map = HashMap::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let (id, url) = trimmed.split_once(char::is_whitespace).ok_or_else(|| Error::Parse {
            line: idx + 1,
            message: "expected `id url`".into(),
        })?;
        map.insert(parse_id(id, idx + 1)?, url.trim().to_string());
    }
    Ok(map)
}
