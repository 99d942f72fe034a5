//! PageRank of the Google matrix `G = cW + (1-c)(1/n) 1ᵀ1`, damping sweeps
//! and per-component mass accounting.

use rayon::prelude::*;

use crate::bowtie::{BowtieAnalysis, BowtieLabel};
use crate::error::{Error, Result};
use crate::graph::GraphHandle;
use crate::solve::StallGuard;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PageRankConfig {
    pub damping: f64,
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl PageRankConfig {
    pub const DEFAULT_TOLERANCE: f64 = 1e-12;

    /// Config with the default tolerance and an iteration cap of
    /// `10 * ceil(ln tol / ln c)`, but at least 1000.
    pub fn new(damping: f64) -> Self {
        Self::with_tolerance(damping, Self::DEFAULT_TOLERANCE)
    }

    pub fn with_tolerance(damping: f64, tolerance: f64) -> Self {
        Self {
            damping,
            tolerance,
            max_iterations: default_max_iterations(damping, tolerance),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.damping) {
            return Err(Error::InvalidParameter(format!(
                "damping must lie in [0, 1), got {}; the c = 1 limit is computed analytically",
                self.damping
            )));
        }
        if self.tolerance.is_nan() || self.tolerance <= 0.0 || self.tolerance.is_infinite() {
            return Err(Error::InvalidParameter(format!(
                "tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidParameter("max_iterations must be positive".into()));
        }
        Ok(())
    }
}

pub fn default_max_iterations(damping: f64, tolerance: f64) -> usize {
    if damping <= 0.0 || tolerance.is_nan() || tolerance <= 0.0 || damping >= 1.0 {
        return 1000;
    }
    let steps = (tolerance.ln() / damping.ln()).ceil();
    if steps.is_finite() {
        ((10.0 * steps) as usize).max(1000)
    } else {
        1000
    }
}

/// Probability vector over the nodes together with how it was obtained.
#[derive(Debug, Clone, PartialEq)]
pub struct RankVector {
    pub values: Vec<f64>,
    pub damping: f64,
    pub iterations: usize,
}

impl RankVector {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn mass_of(&self, nodes: impl IntoIterator<Item = usize>) -> f64 {
        nodes.into_iter().map(|i| self.values[i]).sum()
    }
}

fn require_nonempty(g: &GraphHandle) -> Result<()> {
    if g.node_count() == 0 {
        return Err(Error::InvalidParameter("graph has no nodes".into()));
    }
    Ok(())
}

/// `x G` for a probability vector `x`.
fn google_step(g: &GraphHandle, c: f64, x: &[f64], out: &mut [f64]) {
    let n = g.node_count() as f64;
    g.left_mul_hyperlink(x, out);
    let mass: f64 = x.iter().sum();
    let restart = (1.0 - c) * mass / n;
    out.par_iter_mut()
        .with_min_len(4096)
        .for_each(|v| *v = c * *v + restart);
}

/// `|x G - x|_1`.
pub fn fixed_point_residual(g: &GraphHandle, damping: f64, x: &[f64]) -> f64 {
    let mut y = vec![0.0; x.len()];
    google_step(g, damping, x, &mut y);
    x.iter().zip(&y).map(|(a, b)| (a - b).abs()).sum()
}

/// Steps below this are rounding noise for a unit-mass vector.
const ROUNDING_FLOOR: f64 = 64.0 * f64::EPSILON;

/// Power iteration from the uniform vector.
///
/// Stops once `c / (1 - c) * |x_{k+1} - x_k|_1 <= tol`, which bounds the
/// distance to the true fixed point by `tol` and the returned vector's
/// residual `|xG - x|_1` by `(1 - c) tol`. When `tol` lies below what
/// rounding allows, it stops once steps under [`ROUNDING_FLOOR`] stop
/// shrinking or once [`StallGuard`] sees no progress.
pub fn pagerank(g: &GraphHandle, cfg: &PageRankConfig) -> Result<RankVector> {
    cfg.validate()?;
    require_nonempty(g)?;
    let n = g.node_count();
    let c = cfg.damping;
    let mut x = vec![1.0 / n as f64; n];
    let mut y = vec![0.0; n];
    let mut delta = f64::INFINITY;
    let mut guard = StallGuard::new();
    for it in 1..=cfg.max_iterations {
        google_step(g, c, &x, &mut y);
        let s: f64 = y.iter().sum();
        y.iter_mut().for_each(|v| *v /= s);
        let prev = delta;
        delta = x.iter().zip(&y).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut x, &mut y);
        let bound = if c == 0.0 { 0.0 } else { c / (1.0 - c) * delta };
        let stalled = (delta <= ROUNDING_FLOOR && delta >= prev) || guard.stalled(delta, 1.0);
        if bound <= cfg.tolerance || stalled {
            return Ok(RankVector {
                values: x,
                damping: c,
                iterations: it,
            });
        }
    }
    Err(Error::NonConvergence {
        what: format!("pagerank at c = {c}"),
        iterations: cfg.max_iterations,
        residual: delta,
    })
}

/// PageRank as the truncated series `((1-c)/n) Σ_k c^k 1ᵀ W^k`.
///
/// The series is cut once the untaken tail mass `c^(K+1)` falls under
/// `tolerance`, so it agrees with [`pagerank`] within `2 * tolerance`.
pub fn pagerank_via_resolvent(g: &GraphHandle, damping: f64, tolerance: f64) -> Result<RankVector> {
    PageRankConfig {
        damping,
        tolerance,
        max_iterations: 1,
    }
    .validate()?;
    require_nonempty(g)?;
    let n = g.node_count();
    let max_terms = default_max_iterations(damping, tolerance);
    let mut term = vec![(1.0 - damping) / n as f64; n];
    let mut sum = term.clone();
    let mut next = vec![0.0; n];
    let mut tail = damping;
    let mut k = 0;
    while tail >= tolerance {
        if k >= max_terms {
            return Err(Error::NonConvergence {
                what: format!("resolvent series at c = {damping}"),
                iterations: k,
                residual: tail,
            });
        }
        g.left_mul_hyperlink(&term, &mut next);
        for (t, v) in term.iter_mut().zip(&next) {
            *t = damping * v;
        }
        for (s, t) in sum.iter_mut().zip(&term) {
            *s += t;
        }
        tail *= damping;
        k += 1;
    }
    let s: f64 = sum.iter().sum();
    sum.iter_mut().for_each(|v| *v /= s);
    Ok(RankVector {
        values: sum,
        damping,
        iterations: k + 1,
    })
}

/// PageRank mass per bow-tie label and per structural node set.
#[derive(Debug, Clone, PartialEq)]
pub struct MassBreakdown {
    pub in_: f64,
    pub scc: f64,
    pub out: f64,
    pub other: f64,
    pub in_scc: f64,
    pub escc: f64,
    pub pure_out: f64,
    /// Nodes in neither the extended SCC nor Pure OUT.
    pub remainder: f64,
    pub dangling: f64,
    /// The transient block of the recurrent/transient decomposition.
    pub transient: f64,
    pub blocks: Vec<f64>,
}

impl MassBreakdown {
    pub fn label_total(&self) -> f64 {
        self.in_ + self.scc + self.out + self.other
    }
}

pub fn mass_breakdown(pi: &RankVector, g: &GraphHandle, analysis: &BowtieAnalysis) -> MassBreakdown {
    let v = &pi.values;
    let labels = &analysis.labeling.labels;
    let sum_where = |pred: &dyn Fn(usize) -> bool| -> f64 { (0..v.len()).filter(|&i| pred(i)).map(|i| v[i]).sum() };
    let in_ = sum_where(&|i| labels[i] == BowtieLabel::In);
    let scc = sum_where(&|i| labels[i] == BowtieLabel::Scc);
    let out = sum_where(&|i| labels[i] == BowtieLabel::Out);
    let other = sum_where(&|i| labels[i] == BowtieLabel::Other);
    let escc = sum_where(&|i| analysis.escc[i]);
    let pure_out = sum_where(&|i| analysis.pure_out[i]);
    let remainder = sum_where(&|i| !analysis.escc[i] && !analysis.pure_out[i]);
    let transient = pi.mass_of(analysis.blocks.transient_set.iter().copied());
    MassBreakdown {
        in_,
        scc,
        out,
        other,
        in_scc: in_ + scc,
        escc,
        pure_out,
        remainder,
        dangling: pi.mass_of(g.dangling_nodes().iter().copied()),
        transient,
        blocks: analysis
            .blocks
            .recurrent_blocks
            .iter()
            .map(|b| pi.mass_of(b.iter().copied()))
            .collect(),
    }
}

/// Mass breakdown at each damping value of `grid`, in grid order.
pub fn damping_sweep(
    g: &GraphHandle,
    analysis: &BowtieAnalysis,
    grid: &[f64],
    tolerance: f64,
) -> Result<Vec<(f64, MassBreakdown)>> {
    grid.par_iter()
        .map(|&c| {
            let pi = pagerank(g, &PageRankConfig::with_tolerance(c, tolerance))?;
            Ok((c, mass_breakdown(&pi, g, analysis)))
        })
        .collect()
}
