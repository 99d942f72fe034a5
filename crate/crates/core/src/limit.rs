//! The `c -> 1` limit of PageRank and numerical instruments for the two
//! singular-perturbation expansions it rests on.
//!
//! As the damping factor tends to one, all PageRank mass drains out of the
//! transient block into the dead-ends. Block `i` ends up with mass
//! `n_i/n + (1/n) 1ᵀ[I - T]⁻¹ R_i 1`: its fair share plus whatever uniform
//! restarts inside the transient block eventually deliver to it. Within the
//! block that mass is spread according to the block's own stationary law.

use nalgebra::{DMatrix, DVector};

use crate::block::SubBlock;
use crate::bowtie::{strongly_connected_components, BlockDecomposition};
use crate::error::{Error, Result};
use crate::graph::{GraphHandle, NodeId};
use crate::solve::{fixed_point, stationary_left, SolverOptions};

/// Largest matrix accepted by [`laurent_check`].
pub const LAURENT_MAX_DIM: usize = 20;
/// Largest matrix accepted by [`aggregated_chain_limit`].
pub const AGGREGATION_MAX_DIM: usize = 30;
/// `μ C 1` below this is treated as a vanishing perturbation.
pub const PERTURBATION_GUARD: f64 = 1e-13;

/// Stationary distribution of the restriction of `W` to a closed block.
pub fn block_stationary(g: &GraphHandle, block: &[NodeId]) -> Result<Vec<f64>> {
    check_closed_block(g, block)?;
    let op = SubBlock::new(g, block, block);
    let opts = SolverOptions {
        tolerance: 1e-14,
        ..SolverOptions::default()
    };
    stationary_left(
        "block stationary distribution",
        block.len(),
        |x, y| op.left_mul(x, y),
        opts,
    )
}

fn check_closed_block(g: &GraphHandle, block: &[NodeId]) -> Result<()> {
    if block.is_empty() {
        return Err(Error::Structural("empty block".into()));
    }
    if block.len() == g.node_count() {
        return Ok(());
    }
    let mut member = vec![false; g.node_count()];
    for &v in block {
        member[v] = true;
    }
    for &v in block {
        if g.is_dangling(v) {
            return Err(Error::Structural(format!("block is not closed: node {v} is dangling")));
        }
        if let Some(&w) = g.successors(v).iter().find(|&&w| !member[w]) {
            return Err(Error::Structural(format!(
                "block is not closed: edge {v} -> {w} leaves it"
            )));
        }
    }
    let mut sorted = block.to_vec();
    sorted.sort_unstable();
    let sorted = &sorted;
    let sub = GraphHandle::from_edges(
        sorted.len(),
        sorted.iter().enumerate().flat_map(|(k, &v)| {
            let local = move |w: NodeId| sorted.binary_search(&w).expect("closed block");
            g.successors(v).iter().map(move |&w| (k, local(w)))
        }),
    )?;
    if strongly_connected_components(&sub).len() != 1 {
        return Err(Error::Structural("block is not strongly connected".into()));
    }
    Ok(())
}

/// `(1/n) 1ᵀ[I - T]⁻¹ R_i 1` for each recurrent block `i`.
pub fn absorption_weights(g: &GraphHandle, blocks: &BlockDecomposition) -> Result<Vec<f64>> {
    let m = blocks.block_count();
    let trans = &blocks.transient_set;
    if trans.is_empty() {
        return Ok(vec![0.0; m]);
    }
    let n = g.node_count() as f64;
    let t = SubBlock::new(g, trans, trans);
    let b = vec![1.0 / n; trans.len()];
    let x = fixed_point(
        "transient resolvent",
        |x, y| t.left_mul(x, y),
        &b,
        None,
        SolverOptions::default(),
    )?;
    Ok(blocks
        .recurrent_blocks
        .iter()
        .map(|block| {
            let r = SubBlock::new(g, trans, block);
            r.row_sums().iter().zip(&x).map(|(a, b)| a * b).sum()
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct LimitReport {
    pub block_sizes: Vec<usize>,
    /// `n_i / n`.
    pub fair_shares: Vec<f64>,
    pub absorption_weights: Vec<f64>,
    /// Fair share plus absorption weight.
    pub block_masses: Vec<f64>,
    pub block_stationary: Vec<Vec<f64>>,
    /// Limit vector over all nodes; exactly zero on transient states.
    pub vector: Vec<f64>,
}

pub fn limit_vector(g: &GraphHandle, blocks: &BlockDecomposition) -> Result<LimitReport> {
    let n = g.node_count();
    let weights = absorption_weights(g, blocks)?;
    let block_sizes = blocks.block_sizes();
    let fair_shares: Vec<f64> = block_sizes.iter().map(|&s| s as f64 / n as f64).collect();
    let block_masses: Vec<f64> = fair_shares.iter().zip(&weights).map(|(f, w)| f + w).collect();
    let mut vector = vec![0.0; n];
    let mut block_stationary_all = Vec::with_capacity(blocks.block_count());
    for (block, &mass) in blocks.recurrent_blocks.iter().zip(&block_masses) {
        let dist = block_stationary(g, block)?;
        for (&v, &p) in block.iter().zip(&dist) {
            vector[v] = mass * p;
        }
        block_stationary_all.push(dist);
    }
    Ok(LimitReport {
        block_sizes,
        fair_shares,
        absorption_weights: weights,
        block_masses,
        block_stationary: block_stationary_all,
        vector,
    })
}

/// Dense stationary distribution of an irreducible stochastic matrix.
pub fn dense_stationary(a: &DMatrix<f64>) -> Result<DVector<f64>> {
    let n = a.nrows();
    // μ (I - A) = 0 with the last equation replaced by μ 1 = 1
    let mut m = (DMatrix::identity(n, n) - a).transpose();
    for j in 0..n {
        m[(n - 1, j)] = 1.0;
    }
    let mut rhs = DVector::zeros(n);
    rhs[n - 1] = 1.0;
    m.lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Structural("stationary system is singular".into()))
}

fn pattern_components(a: &DMatrix<f64>) -> Result<crate::bowtie::Components> {
    let n = a.nrows();
    let g = GraphHandle::from_edges(
        n,
        (0..n).flat_map(|i| (0..n).filter(move |&j| a[(i, j)] > 0.0).map(move |j| (i, j))),
    )?;
    Ok(strongly_connected_components(&g))
}

fn check_square(a: &DMatrix<f64>, c: &DMatrix<f64>, cap: usize) -> Result<()> {
    if !a.is_square() || a.shape() != c.shape() {
        return Err(Error::InvalidParameter(
            "A and C must be square and the same size".into(),
        ));
    }
    if a.nrows() == 0 || a.nrows() > cap {
        return Err(Error::InvalidParameter(format!(
            "matrix dimension {} outside 1..={cap}",
            a.nrows()
        )));
    }
    Ok(())
}

fn check_stochastic(a: &DMatrix<f64>) -> Result<()> {
    for i in 0..a.nrows() {
        let row = a.row(i);
        if row.iter().any(|&v| v < 0.0) || (row.sum() - 1.0).abs() > 1e-12 {
            return Err(Error::Structural(format!("row {i} of A is not stochastic")));
        }
    }
    Ok(())
}

/// One row of the leading-term error table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaurentRow {
    pub epsilon: f64,
    /// `|ε[I - A + εC]⁻¹ - X₋₁|_∞` with `X₋₁ = 1μ / (μC1)`.
    pub error: f64,
    /// `error / |X₋₁|_∞`.
    pub relative_error: f64,
}

fn inf_norm(m: &DMatrix<f64>) -> f64 {
    (0..m.nrows())
        .map(|i| m.row(i).iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Measures how well `X₋₁ / ε` approximates `[I - (A - εC)]⁻¹` on a grid of ε.
pub fn laurent_check(a: &DMatrix<f64>, c: &DMatrix<f64>, epsilons: &[f64]) -> Result<Vec<LaurentRow>> {
    check_square(a, c, LAURENT_MAX_DIM)?;
    check_stochastic(a)?;
    let n = a.nrows();
    if pattern_components(a)?.len() != 1 {
        return Err(Error::Structural("A is not irreducible".into()));
    }
    let mu = dense_stationary(a)?;
    let leak = (mu.transpose() * c * DVector::from_element(n, 1.0))[0];
    if leak.abs() < PERTURBATION_GUARD {
        return Err(Error::Domain(format!(
            "μC1 = {leak:e} vanishes; the leading Laurent term is undefined"
        )));
    }
    let x_minus1 = DVector::from_element(n, 1.0) * mu.transpose() / leak;
    let scale = inf_norm(&x_minus1);

    epsilons
        .iter()
        .map(|&eps| {
            if eps.is_nan() || eps <= 0.0 {
                return Err(Error::InvalidParameter(format!("ε must be positive, got {eps}")));
            }
            let perturbed = a - c * eps;
            for i in 0..n {
                let row = perturbed.row(i);
                if row.iter().any(|&v| v < -1e-15) || row.sum() > 1.0 + 1e-12 {
                    return Err(Error::Domain(format!(
                        "A - εC is not substochastic at ε = {eps} (row {i})"
                    )));
                }
            }
            let inv = (DMatrix::identity(n, n) - perturbed)
                .try_inverse()
                .ok_or_else(|| Error::Structural(format!("I - A + εC singular at ε = {eps}")))?;
            let error = inf_norm(&(inv * eps - &x_minus1));
            Ok(LaurentRow {
                epsilon: eps,
                error,
                relative_error: error / scale,
            })
        })
        .collect()
}

/// Limit of the stationary law of `A + εC` as `ε -> 0` via the aggregated chain.
///
/// `A` is stochastic with closed classes `A_1..A_m` and a transient block `E`.
/// With `μ_i` the class stationary laws and `φ_i = [I - E]⁻¹ L_i 1` the
/// absorption probabilities, `M` stacks the `μ_i`, `B` stacks indicator
/// columns over `φ_i`, and `D = M C B` generates the aggregated chain. The
/// aggregated law `ν` solves `ν(D + I) = ν`, and the limit is `ν_i μ_i` on
/// class `i`, zero on transient states. Output is in `A`'s index order.
pub fn aggregated_chain_limit(a: &DMatrix<f64>, c: &DMatrix<f64>) -> Result<Vec<f64>> {
    check_square(a, c, AGGREGATION_MAX_DIM)?;
    check_stochastic(a)?;
    let n = a.nrows();
    let comps = pattern_components(a)?;
    let classes: Vec<Vec<usize>> = comps
        .members
        .iter()
        .filter(|members| {
            members
                .iter()
                .all(|&i| (0..n).all(|j| a[(i, j)] <= 0.0 || comps.component_of[j] == comps.component_of[i]))
        })
        .cloned()
        .collect();
    let m = classes.len();
    let mut class_of = vec![None; n];
    for (k, class) in classes.iter().enumerate() {
        for &i in class {
            class_of[i] = Some(k);
        }
    }
    let transient: Vec<usize> = (0..n).filter(|&i| class_of[i].is_none()).collect();

    // φ: |transient| x m absorption probabilities
    let nt = transient.len();
    let mut phi = DMatrix::zeros(nt, m);
    if nt > 0 {
        let e = DMatrix::from_fn(nt, nt, |r, s| a[(transient[r], transient[s])]);
        let inv = (DMatrix::identity(nt, nt) - e)
            .try_inverse()
            .ok_or_else(|| Error::Structural("I - E is singular; ρ(E) >= 1".into()))?;
        if inv.iter().any(|&v| v < -1e-12) {
            return Err(Error::Structural("ρ(E) >= 1: I - E is not an M-matrix".into()));
        }
        let l1 = DMatrix::from_fn(nt, m, |r, k| classes[k].iter().map(|&j| a[(transient[r], j)]).sum());
        phi = inv * l1;
    }

    let mut mu_full = DMatrix::zeros(m, n);
    for (k, class) in classes.iter().enumerate() {
        let sub = DMatrix::from_fn(class.len(), class.len(), |r, s| a[(class[r], class[s])]);
        let mu = dense_stationary(&sub)?;
        for (r, &i) in class.iter().enumerate() {
            mu_full[(k, i)] = mu[r];
        }
    }
    let mut b = DMatrix::zeros(n, m);
    for i in 0..n {
        match class_of[i] {
            Some(k) => b[(i, k)] = 1.0,
            None => {
                let r = transient.binary_search(&i).expect("transient index");
                for k in 0..m {
                    b[(i, k)] = phi[(r, k)];
                }
            }
        }
    }
    let d = &mu_full * c * &b;
    let nu = if m == 1 {
        DVector::from_element(1, 1.0)
    } else {
        // ν D = 0 with one equation replaced by ν 1 = 1
        let mut sys = d.transpose();
        for k in 0..m {
            sys[(m - 1, k)] = 1.0;
        }
        let mut rhs = DVector::zeros(m);
        rhs[m - 1] = 1.0;
        sys.lu()
            .solve(&rhs)
            .ok_or_else(|| Error::Structural("aggregated generator is singular".into()))?
    };
    let limit = mu_full.transpose() * nu;
    Ok(limit.iter().copied().collect())
}

/// Two-state example: a flip-flop chain with half of one transition leaking.
pub fn laurent_two_state() -> (DMatrix<f64>, DMatrix<f64>) {
    let a = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
    let c = DMatrix::from_row_slice(2, 2, &[0.0, 0.5, 0.0, 0.0]);
    (a, c)
}

/// Five-state example: an aperiodic ring with chords and leaks at states 1 and 3.
pub fn laurent_five_state() -> (DMatrix<f64>, DMatrix<f64>) {
    #[rustfmt::skip]
    let a = DMatrix::from_row_slice(5, 5, &[
        0.0, 0.5, 0.5, 0.0, 0.0,
        0.0, 0.0, 1.0, 0.0, 0.0,
        0.5, 0.0, 0.0, 0.5, 0.0,
        0.0, 0.0, 0.0, 0.0, 1.0,
        0.6, 0.0, 0.4, 0.0, 0.0,
    ]);
    let mut c = DMatrix::zeros(5, 5);
    c[(1, 2)] = 0.5;
    c[(3, 4)] = 0.25;
    (a, c)
}
