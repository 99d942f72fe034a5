//! Sparse rectangular restrictions of the hyperlink matrix.

use crate::graph::{GraphHandle, HyperlinkRow, NodeId};

/// The block of `W` with rows `row_nodes` and columns `col_nodes`.
///
/// Link rows are stored in CSR over local indices. Dangling rows keep their
/// uniform `1/n` weight on every column and are applied as a single scalar.
#[derive(Debug, Clone)]
pub struct SubBlock {
    row_nodes: Vec<NodeId>,
    col_nodes: Vec<NodeId>,
    offsets: Vec<usize>,
    entry_cols: Vec<usize>,
    weights: Vec<f64>,
    uniform_rows: Vec<usize>,
    uniform_weight: f64,
}

impl SubBlock {
    pub fn new(g: &GraphHandle, row_nodes: &[NodeId], col_nodes: &[NodeId]) -> Self {
        const NONE: usize = usize::MAX;
        let mut local = vec![NONE; g.node_count()];
        for (k, &v) in col_nodes.iter().enumerate() {
            local[v] = k;
        }
        let mut offsets = Vec::with_capacity(row_nodes.len() + 1);
        offsets.push(0);
        let mut entry_cols = Vec::new();
        let mut weights = Vec::new();
        let mut uniform_rows = Vec::new();
        for (r, &i) in row_nodes.iter().enumerate() {
            match g.hyperlink_row(i) {
                HyperlinkRow::Links { successors, weight } => {
                    for &j in successors {
                        if local[j] != NONE {
                            entry_cols.push(local[j]);
                            weights.push(weight);
                        }
                    }
                }
                HyperlinkRow::Uniform { .. } => uniform_rows.push(r),
            }
            offsets.push(entry_cols.len());
        }
        Self {
            row_nodes: row_nodes.to_vec(),
            col_nodes: col_nodes.to_vec(),
            offsets,
            entry_cols,
            weights,
            uniform_rows,
            uniform_weight: 1.0 / g.node_count() as f64,
        }
    }

    pub fn rows(&self) -> &[NodeId] {
        &self.row_nodes
    }

    pub fn cols(&self) -> &[NodeId] {
        &self.col_nodes
    }

    /// `y = x B` for a row vector `x` over the rows.
    pub fn left_mul(&self, x: &[f64], y: &mut [f64]) {
        let spread: f64 = self.uniform_rows.iter().map(|&r| x[r]).sum::<f64>() * self.uniform_weight;
        y.fill(spread);
        for (r, &xr) in x.iter().enumerate().take(self.row_nodes.len()) {
            if xr == 0.0 {
                continue;
            }
            for k in self.offsets[r]..self.offsets[r + 1] {
                y[self.entry_cols[k]] += xr * self.weights[k];
            }
        }
    }

    /// `y = B v` for a column vector `v` over the columns.
    pub fn right_mul(&self, v: &[f64], y: &mut [f64]) {
        let total: f64 = v.iter().sum::<f64>() * self.uniform_weight;
        for (r, yr) in y.iter_mut().enumerate() {
            *yr = (self.offsets[r]..self.offsets[r + 1])
                .map(|k| self.weights[k] * v[self.entry_cols[k]])
                .sum();
        }
        for &r in &self.uniform_rows {
            y[r] = total;
        }
    }

    /// `B 1`.
    pub fn row_sums(&self) -> Vec<f64> {
        let mut y = vec![0.0; self.row_nodes.len()];
        self.right_mul(&vec![1.0; self.col_nodes.len()], &mut y);
        y
    }
}
