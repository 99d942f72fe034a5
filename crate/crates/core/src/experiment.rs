//! Escape-link experiment: link a node trapped in a recurrent block to the
//! giant SCC and compare ranks and block mass before and after.

use std::collections::HashMap;
use std::io::BufRead;

use rayon::prelude::*;

use crate::bowtie::{BowtieAnalysis, BowtieLabel};
use crate::error::{Error, Result};
use crate::graph::{GraphHandle, NodeId};
use crate::pagerank::{pagerank, PageRankConfig};

/// Rank position of `node` under `scores`: one plus the number of nodes
/// scoring strictly higher, or equal with a smaller id.
pub fn rank_position(scores: &[f64], node: NodeId) -> usize {
    let s = scores[node];
    1 + scores
        .iter()
        .enumerate()
        .filter(|&(j, &v)| v > s || (v == s && j < node))
        .count()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExperimentRow {
    pub damping: f64,
    pub source_rank_before: usize,
    pub source_rank_after: usize,
    pub target_rank_before: usize,
    pub target_rank_after: usize,
    /// Mass of the source's original block node set.
    pub block_mass_before: f64,
    pub block_mass_after: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub source: NodeId,
    pub target: NodeId,
    pub block: Vec<NodeId>,
    pub rows: Vec<ExperimentRow>,
    /// Rank of the source by click count, when click data was supplied.
    pub click_rank: Option<usize>,
}

pub fn run_link_experiment(
    g: &GraphHandle,
    analysis: &BowtieAnalysis,
    source: NodeId,
    target: NodeId,
    dampings: &[f64],
    tolerance: f64,
    clicks: Option<&HashMap<NodeId, f64>>,
) -> Result<ExperimentReport> {
    let n = g.node_count();
    for (name, v) in [("source", source), ("target", target)] {
        if v >= n {
            return Err(Error::InvalidParameter(format!("{name} {v} is not a node (n = {n})")));
        }
    }
    let block_id = analysis.blocks.block_of[source]
        .ok_or_else(|| Error::InvalidParameter(format!("source {source} is not in a recurrent block")))?;
    if analysis.labeling.labels[target] != BowtieLabel::Scc {
        return Err(Error::InvalidParameter(format!(
            "target {target} is not in the giant SCC"
        )));
    }
    let block = analysis.blocks.recurrent_blocks[block_id].clone();
    let linked = g.with_edge(source, target)?;

    let rows = dampings
        .par_iter()
        .map(|&c| {
            let cfg = PageRankConfig::with_tolerance(c, tolerance);
            let before = pagerank(g, &cfg)?.values;
            let after = pagerank(&linked, &cfg)?.values;
            let mass = |pi: &[f64]| block.iter().map(|&v| pi[v]).sum::<f64>();
            Ok(ExperimentRow {
                damping: c,
                source_rank_before: rank_position(&before, source),
                source_rank_after: rank_position(&after, source),
                target_rank_before: rank_position(&before, target),
                target_rank_after: rank_position(&after, target),
                block_mass_before: mass(&before),
                block_mass_after: mass(&after),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let click_rank = clicks.map(|counts| {
        let scores: Vec<f64> = (0..n).map(|v| counts.get(&v).copied().unwrap_or(0.0)).collect();
        rank_position(&scores, source)
    });

    Ok(ExperimentReport {
        source,
        target,
        block,
        rows,
        click_rank,
    })
}

/// Reads `node_id,clicks` lines. A non-numeric first line is taken as a
/// header; blank lines and `#` comments are skipped.
pub fn load_clicks<R: BufRead>(reader: R) -> Result<HashMap<NodeId, f64>> {
    let mut map = HashMap::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let parse_err = |message: String| Error::Parse { line: idx + 1, message };
        let (id, count) = trimmed
            .split_once(',')
            .ok_or_else(|| parse_err("expected `node_id,clicks`".into()))?;
        let id = id.trim();
        let count = count.trim();
        if map.is_empty() && id.parse::<NodeId>().is_err() && count.parse::<f64>().is_err() {
            continue;
        }
        let id: NodeId = id.parse().map_err(|_| parse_err(format!("invalid node id {id:?}")))?;
        let count: f64 = count
            .parse()
            .ok()
            .filter(|v: &f64| v.is_finite() && *v >= 0.0)
            .ok_or_else(|| parse_err(format!("invalid click count {count:?}")))?;
        map.insert(id, count);
    }
    Ok(map)
}
