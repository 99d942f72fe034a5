//! Strongly connected components, bow-tie labels, the extended SCC and the
//! recurrent/transient block structure of the hyperlink matrix.

use std::collections::VecDeque;
use std::fmt;

use crate::graph::{GraphHandle, NodeId};

/// Partition of the nodes into maximal strongly connected components.
///
/// Components are numbered by their smallest member; member lists are sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Components {
    pub component_of: Vec<usize>,
    pub members: Vec<Vec<NodeId>>,
}

impl Components {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// Iterative Tarjan, linear in nodes plus edges.
pub fn strongly_connected_components(g: &GraphHandle) -> Components {
    const UNVISITED: usize = usize::MAX;
    let n = g.node_count();
    let mut index = vec![UNVISITED; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<NodeId> = Vec::new();
    let mut raw: Vec<Vec<NodeId>> = Vec::new();
    let mut next_index = 0usize;
    // (node, position in its successor list)
    let mut call: Vec<(NodeId, usize)> = Vec::new();

    for root in 0..n {
        if index[root] != UNVISITED {
            continue;
        }
        call.push((root, 0));
        index[root] = next_index;
        low[root] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root] = true;

        while let Some(&mut (v, ref mut pos)) = call.last_mut() {
            let succ = g.successors(v);
            if *pos < succ.len() {
                let w = succ[*pos];
                *pos += 1;
                if index[w] == UNVISITED {
                    index[w] = next_index;
                    low[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            call.pop();
            if let Some(&(parent, _)) = call.last() {
                low[parent] = low[parent].min(low[v]);
            }
            if low[v] == index[v] {
                let mut comp = Vec::new();
                loop {
                    let w = stack.pop().expect("tarjan stack underflow");
                    on_stack[w] = false;
                    comp.push(w);
                    if w == v {
                        break;
                    }
                }
                comp.sort_unstable();
                raw.push(comp);
            }
        }
    }

    raw.sort_unstable_by_key(|c| c[0]);
    let mut component_of = vec![0; n];
    for (id, comp) in raw.iter().enumerate() {
        for &v in comp {
            component_of[v] = id;
        }
    }
    Components {
        component_of,
        members: raw,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BowtieLabel {
    In,
    Scc,
    Out,
    Other,
}

impl BowtieLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            BowtieLabel::In => "IN",
            BowtieLabel::Scc => "SCC",
            BowtieLabel::Out => "OUT",
            BowtieLabel::Other => "OTHER",
        }
    }
}

impl fmt::Display for BowtieLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BowtieLabeling {
    pub labels: Vec<BowtieLabel>,
    pub giant_scc_id: usize,
}

impl BowtieLabeling {
    pub fn nodes_with(&self, label: BowtieLabel) -> Vec<NodeId> {
        (0..self.labels.len()).filter(|&i| self.labels[i] == label).collect()
    }

    pub fn count(&self, label: BowtieLabel) -> usize {
        self.labels.iter().filter(|&&l| l == label).count()
    }
}

/// Giant SCC is the largest component; ties go to the smallest minimum id,
/// which is the lowest component number.
pub fn bowtie_labeling(g: &GraphHandle, comps: &Components) -> BowtieLabeling {
    let n = g.node_count();
    let giant_scc_id = comps
        .members
        .iter()
        .enumerate()
        .max_by(|(ia, a), (ib, b)| a.len().cmp(&b.len()).then(ib.cmp(ia)))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let mut labels = vec![BowtieLabel::Other; n];
    if n == 0 {
        return BowtieLabeling { labels, giant_scc_id };
    }
    let giant = &comps.members[giant_scc_id];
    let forward = reach(n, giant, |v| g.successors(v));
    let backward = reach(n, giant, |v| g.predecessors(v));
    for v in 0..n {
        labels[v] = if comps.component_of[v] == giant_scc_id {
            BowtieLabel::Scc
        } else if backward[v] {
            BowtieLabel::In
        } else if forward[v] {
            BowtieLabel::Out
        } else {
            BowtieLabel::Other
        };
    }
    BowtieLabeling { labels, giant_scc_id }
}

fn reach<'a, F>(n: usize, seeds: &[NodeId], next: F) -> Vec<bool>
where
    F: Fn(NodeId) -> &'a [NodeId],
{
    let mut seen = vec![false; n];
    let mut queue: VecDeque<NodeId> = VecDeque::new();
    for &s in seeds {
        if !seen[s] {
            seen[s] = true;
            queue.push_back(s);
        }
    }
    while let Some(v) = queue.pop_front() {
        for &w in next(v) {
            if !seen[w] {
                seen[w] = true;
                queue.push_back(w);
            }
        }
    }
    seen
}

/// Component of the `W`-graph (dangling rows linked to every node) that
/// contains the giant SCC, as a membership mask.
///
/// A dangling node reaches everything under `W`. So if the giant SCC reaches
/// any dangling node, the component is everything that reaches the giant SCC
/// or a dangling node; otherwise `W` adds no path out of the giant SCC's
/// forward closure and the component is the giant SCC itself.
pub fn extended_scc(g: &GraphHandle, comps: &Components, labels: &BowtieLabeling) -> Vec<bool> {
    let n = g.node_count();
    if n == 0 {
        return Vec::new();
    }
    let giant = &comps.members[labels.giant_scc_id];
    let forward = reach(n, giant, |v| g.successors(v));
    let hits_dangling = g.dangling_nodes().iter().any(|&d| forward[d]);
    if !hits_dangling {
        let mut mask = vec![false; n];
        for &v in giant {
            mask[v] = true;
        }
        return mask;
    }
    let mut seeds: Vec<NodeId> = giant.clone();
    seeds.extend_from_slice(g.dangling_nodes());
    reach(n, &seeds, |v| g.predecessors(v))
}

/// Dead-end blocks and the giant transient block of `W`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockDecomposition {
    /// Closed communicating classes of `W`, sorted by smallest member.
    pub recurrent_blocks: Vec<Vec<NodeId>>,
    /// Every node outside the recurrent blocks, sorted.
    pub transient_set: Vec<NodeId>,
    /// Recurrent blocks in order followed by the transient set.
    pub permutation: Vec<NodeId>,
    /// For each node, the recurrent block holding it.
    pub block_of: Vec<Option<usize>>,
}

impl BlockDecomposition {
    pub fn block_count(&self) -> usize {
        self.recurrent_blocks.len()
    }

    pub fn block_sizes(&self) -> Vec<usize> {
        self.recurrent_blocks.iter().map(Vec::len).collect()
    }
}

/// Recurrent blocks are the SCCs that no `W` row leaves: components without
/// dangling members whose out-edges all stay inside. Dangling rows reach every
/// node, so when no such component exists `W` is irreducible and the whole
/// node set forms the single recurrent block.
pub fn block_decomposition(g: &GraphHandle, comps: &Components) -> BlockDecomposition {
    let n = g.node_count();
    let mut recurrent: Vec<Vec<NodeId>> = comps
        .members
        .iter()
        .filter(|members| {
            let id = comps.component_of[members[0]];
            members
                .iter()
                .all(|&v| !g.is_dangling(v) && g.successors(v).iter().all(|&w| comps.component_of[w] == id))
        })
        .cloned()
        .collect();
    if recurrent.is_empty() && n > 0 {
        recurrent.push((0..n).collect());
    }

    let mut block_of = vec![None; n];
    for (b, members) in recurrent.iter().enumerate() {
        for &v in members {
            block_of[v] = Some(b);
        }
    }
    let transient_set: Vec<NodeId> = (0..n).filter(|&v| block_of[v].is_none()).collect();
    let permutation = recurrent
        .iter()
        .flatten()
        .copied()
        .chain(transient_set.iter().copied())
        .collect();
    BlockDecomposition {
        recurrent_blocks: recurrent,
        transient_set,
        permutation,
        block_of,
    }
}

/// Everything the mass-accounting modules need about one graph's structure.
#[derive(Debug, Clone)]
pub struct BowtieAnalysis {
    pub components: Components,
    pub labeling: BowtieLabeling,
    pub escc: Vec<bool>,
    /// OUT nodes outside the extended SCC.
    pub pure_out: Vec<bool>,
    pub blocks: BlockDecomposition,
    /// Extended-SCC nodes labelled OUT that also reach a recurrent block along
    /// plain links; they sit in the transient block by the merge rule.
    pub mixed: Vec<bool>,
}

impl BowtieAnalysis {
    pub fn new(g: &GraphHandle) -> Self {
        let components = strongly_connected_components(g);
        let labeling = bowtie_labeling(g, &components);
        let escc = extended_scc(g, &components, &labeling);
        let n = g.node_count();
        let pure_out: Vec<bool> = (0..n)
            .map(|v| labeling.labels[v] == BowtieLabel::Out && !escc[v])
            .collect();
        let blocks = block_decomposition(g, &components);
        let recurrent_nodes: Vec<NodeId> = blocks.recurrent_blocks.iter().flatten().copied().collect();
        let to_dead_end = reach(n, &recurrent_nodes, |v| g.predecessors(v));
        let mixed = (0..n)
            .map(|v| {
                escc[v] && labeling.labels[v] == BowtieLabel::Out && blocks.block_of[v].is_none() && to_dead_end[v]
            })
            .collect();
        Self {
            components,
            labeling,
            escc,
            pure_out,
            blocks,
            mixed,
        }
    }

    pub fn node_count(&self) -> usize {
        self.escc.len()
    }

    pub fn escc_nodes(&self) -> Vec<NodeId> {
        mask_to_nodes(&self.escc)
    }

    pub fn pure_out_nodes(&self) -> Vec<NodeId> {
        mask_to_nodes(&self.pure_out)
    }

    pub fn summary(&self) -> BowtieSummary {
        let count = |mask: &[bool]| mask.iter().filter(|&&b| b).count();
        let comps_within = |pred: &dyn Fn(NodeId) -> bool| {
            self.components
                .members
                .iter()
                .filter(|m| m.iter().all(|&v| pred(v)))
                .count()
        };
        BowtieSummary {
            total_nodes: self.node_count(),
            scc: self.labeling.count(BowtieLabel::Scc),
            in_: self.labeling.count(BowtieLabel::In),
            out: self.labeling.count(BowtieLabel::Out),
            other: self.labeling.count(BowtieLabel::Other),
            escc: count(&self.escc),
            pure_out: count(&self.pure_out),
            sccs_in_out: comps_within(&|v| self.labeling.labels[v] == BowtieLabel::Out),
            sccs_in_pure_out: comps_within(&|v| self.pure_out[v]),
            recurrent_blocks: self.blocks.block_count(),
        }
    }
}

pub(crate) fn mask_to_nodes(mask: &[bool]) -> Vec<NodeId> {
    (0..mask.len()).filter(|&i| mask[i]).collect()
}

/// Component size table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BowtieSummary {
    pub total_nodes: usize,
    pub scc: usize,
    pub in_: usize,
    pub out: usize,
    pub other: usize,
    pub escc: usize,
    pub pure_out: usize,
    pub sccs_in_out: usize,
    pub sccs_in_pure_out: usize,
    pub recurrent_blocks: usize,
}
