//! Shared graph generators and dense reference computations.
#![allow(dead_code)]

use bowtie_core::graph::{GraphHandle, NodeId};
use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const SET_SIZE: usize = 20;

/// A graph with a strongly connected core, an acyclic IN feeding it,
/// dangling nodes linked only from IN and the core, and an OUT region of
/// transient chains and closed dead-ends.
pub fn bowtie_graph(seed: u64) -> GraphHandle {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // the core must outgrow every dead-end to be the giant SCC
    let n_core = rng.gen_range(5..=60);
    let n_in = if rng.gen_bool(0.3) { 0 } else { rng.gen_range(1..=30) };
    let n_dn = rng.gen_range(0..=40);
    let n_dead = rng.gen_range(1..=6);
    let dead_sizes: Vec<usize> = (0..n_dead).map(|_| rng.gen_range(1..=4)).collect();
    let n_chain = rng.gen_range(0..=30);
    let n_out = n_chain + dead_sizes.iter().sum::<usize>();
    let n = n_core + n_in + n_dn + n_out;

    // ids: core, IN, DN, OUT chains, dead-ends; shuffled at the end
    let core: Vec<NodeId> = (0..n_core).collect();
    let ins: Vec<NodeId> = (n_core..n_core + n_in).collect();
    let dn: Vec<NodeId> = (n_core + n_in..n_core + n_in + n_dn).collect();
    let chain_start = n_core + n_in + n_dn;
    let chains: Vec<NodeId> = (chain_start..chain_start + n_chain).collect();
    let mut dead_blocks = Vec::new();
    let mut next = chain_start + n_chain;
    for &size in &dead_sizes {
        dead_blocks.push((next..next + size).collect::<Vec<_>>());
        next += size;
    }
    assert_eq!(next, n);

    let mut edges = Vec::new();
    for k in 0..n_core {
        edges.push((core[k], core[(k + 1) % n_core]));
    }
    let extra = rng.gen_range(0..=2 * n_core);
    for _ in 0..extra {
        edges.push((*core.choose(&mut rng).unwrap(), *core.choose(&mut rng).unwrap()));
    }
    for (k, &v) in ins.iter().enumerate() {
        // IN node k links to the core or to an earlier IN node
        let earlier = &ins[..k];
        let t = if earlier.is_empty() || rng.gen_bool(0.6) {
            *core.choose(&mut rng).unwrap()
        } else {
            *earlier.choose(&mut rng).unwrap()
        };
        edges.push((v, t));
        for _ in 0..rng.gen_range(0..3) {
            edges.push((v, *core.choose(&mut rng).unwrap()));
        }
    }
    let inscc: Vec<NodeId> = core.iter().chain(&ins).copied().collect();
    for &d in &dn {
        edges.push((*core.choose(&mut rng).unwrap(), d));
        if rng.gen_bool(0.3) {
            edges.push((*inscc.choose(&mut rng).unwrap(), d));
        }
    }
    let dead_nodes: Vec<NodeId> = dead_blocks.iter().flatten().copied().collect();
    for block in &dead_blocks {
        for k in 0..block.len() {
            edges.push((block[k], block[(k + 1) % block.len()]));
        }
        if block.len() > 2 && rng.gen_bool(0.5) {
            edges.push((block[0], block[2]));
        }
    }
    // every OUT node gets an in-link from the core or from an earlier chain node,
    // and every chain node links forward
    for (k, &v) in chains.iter().enumerate() {
        let source = if k == 0 || rng.gen_bool(0.5) {
            *core.choose(&mut rng).unwrap()
        } else {
            chains[rng.gen_range(0..k)]
        };
        edges.push((source, v));
        let later: Vec<NodeId> = chains[k + 1..].iter().chain(&dead_nodes).copied().collect();
        for _ in 0..rng.gen_range(1..=3) {
            edges.push((v, *later.choose(&mut rng).unwrap()));
        }
    }
    for block in &dead_blocks {
        let source = if chains.is_empty() || rng.gen_bool(0.5) {
            *core.choose(&mut rng).unwrap()
        } else {
            *chains.choose(&mut rng).unwrap()
        };
        edges.push((source, block[0]));
    }
    let out_nodes: Vec<NodeId> = chains.iter().chain(&dead_nodes).copied().collect();
    if rng.gen_bool(0.5) {
        for _ in 0..rng.gen_range(1..=n_core) {
            edges.push((*core.choose(&mut rng).unwrap(), *out_nodes.choose(&mut rng).unwrap()));
        }
    }

    let mut perm: Vec<NodeId> = (0..n).collect();
    perm.shuffle(&mut rng);
    GraphHandle::from_edges(n, edges.into_iter().map(|(a, b)| (perm[a], perm[b]))).unwrap()
}

pub fn bowtie_set() -> Vec<GraphHandle> {
    (0..SET_SIZE as u64).map(|s| bowtie_graph(1000 + s)).collect()
}

/// Arbitrary sparse digraph with a controllable share of dangling nodes.
pub fn random_graph(seed: u64, n: usize) -> GraphHandle {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        if rng.gen_bool(0.2) {
            continue;
        }
        for _ in 0..rng.gen_range(1..=3) {
            edges.push((u, rng.gen_range(0..n)));
        }
    }
    GraphHandle::from_edges(n, edges).unwrap()
}

pub fn dense_pagerank(g: &GraphHandle, c: f64) -> Vec<f64> {
    let n = g.node_count();
    let w = g.dense_hyperlink();
    let a = (DMatrix::identity(n, n) - w * c).transpose();
    let b = DVector::from_element(n, (1.0 - c) / n as f64);
    a.lu().solve(&b).unwrap().iter().copied().collect()
}

pub fn restrict(w: &DMatrix<f64>, rows: &[NodeId], cols: &[NodeId]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols.len(), |i, j| w[(rows[i], cols[j])])
}

/// `(1-c) γ u [I - cT]⁻¹ 1` by dense solve.
pub fn dense_block_mass(g: &GraphHandle, nodes: &[NodeId], c: f64) -> f64 {
    let w = g.dense_hyperlink();
    let t = restrict(&w, nodes, nodes);
    let m = nodes.len();
    let x = (DMatrix::identity(m, m) - t * c)
        .lu()
        .solve(&DVector::from_element(m, 1.0))
        .unwrap();
    (1.0 - c) * x.sum() / g.node_count() as f64
}

/// Largest eigenvalue modulus of the block `T`.
pub fn dense_spectral_radius(g: &GraphHandle, nodes: &[NodeId]) -> f64 {
    let t = restrict(&g.dense_hyperlink(), nodes, nodes);
    t.complex_eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// The IN+SCC closed form evaluated by dense inversion.
pub fn dense_inscc(g: &GraphHandle, inscc: &[NodeId], dn: &[NodeId], c: f64) -> Vec<f64> {
    let n = g.node_count() as f64;
    let w = g.dense_hyperlink();
    let p = restrict(&w, inscc, inscc);
    let s = restrict(&w, inscc, dn);
    let m = inscc.len();
    let alpha = m as f64 / n;
    let beta = dn.len() as f64 / n;
    let u = DMatrix::from_element(1, m, 1.0 / m as f64);
    let s_one = if dn.is_empty() {
        DMatrix::zeros(m, 1)
    } else {
        &s * DMatrix::from_element(dn.len(), 1, 1.0)
    };
    let kappa = c * c * alpha / (1.0 - c * beta);
    let k = (1.0 - c) * alpha / (1.0 - c * beta);
    let op = DMatrix::identity(m, m) - p * c - &s_one * &u * kappa;
    let inv = op.try_inverse().unwrap();
    (u * inv * k).iter().copied().collect()
}

pub fn l1_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

pub fn gather(x: &[f64], nodes: &[NodeId]) -> Vec<f64> {
    nodes.iter().map(|&v| x[v]).collect()
}
