//! Closed-form PageRank of the IN+SCC component.
//!
//! With the nodes split into OUT, IN+SCC and the dangling set DN, and no
//! dangling node linked from OUT, `W` has the block form
//!
//! ```text
//!        OUT      IN+SCC    DN
//! OUT  [ Q        0         0          ]
//! IN+  [ R        P         S          ]
//! DN   [ 11ᵀ/n    11ᵀ/n     11ᵀ/n      ]
//! ```
//!
//! and eliminating the other two segments gives
//!
//! ```text
//! π_IN+SCC(c) = k(c) u [I - cP - κ(c) S1 u]⁻¹,
//! k(c) = (1-c)α / (1-cβ),   κ(c) = c²α / (1-cβ),
//! ```
//!
//! where `u` is uniform over IN+SCC and `α`, `β` are the node fractions of
//! IN+SCC and DN. Everything here evaluates that formula and its derivatives
//! iteratively, applying the rank-one term `S1 u` through a dot product.

use crate::block::SubBlock;
use crate::bowtie::{BowtieAnalysis, BowtieLabel};
use crate::error::{Error, Result};
use crate::graph::{GraphHandle, NodeId};
use crate::solve::{fixed_point, stationary_left, SolverOptions};

/// Central finite-difference step at `c = 0`.
pub const CENTRAL_STEP: f64 = 1e-5;
/// One-sided finite-difference step near `c = 1`.
pub const ONE_SIDED_STEP: f64 = 1e-4;
/// Second differences above this count as convexity in the scan.
pub const CONCAVITY_FLOOR: f64 = 1e-13;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ThreeBlockOptions {
    /// Proceed when dangling nodes are linked from OUT, keeping them in DN.
    pub force_dn_merge: bool,
    /// Place non-dangling OTHER nodes into the OUT segment.
    pub fold_other: bool,
}

#[derive(Debug, Clone)]
pub struct ThreeBlockView {
    n: usize,
    pub out_set: Vec<NodeId>,
    pub inscc_set: Vec<NodeId>,
    pub dn_set: Vec<NodeId>,
    pub alpha: f64,
    pub beta: f64,
    q: SubBlock,
    r: SubBlock,
    p: SubBlock,
    s: SubBlock,
    s_one: Vec<f64>,
    r_one: Vec<f64>,
    /// Successors inside IN+SCC, in local indices.
    internal: Vec<Vec<usize>>,
    /// Dangling nodes linked from OUT; non-empty only under `force_dn_merge`.
    pub violations: Vec<NodeId>,
    solver: SolverOptions,
}

pub fn three_block_view(g: &GraphHandle, analysis: &BowtieAnalysis, opts: ThreeBlockOptions) -> Result<ThreeBlockView> {
    let n = g.node_count();
    let labels = &analysis.labeling.labels;
    let inscc_set: Vec<NodeId> = (0..n)
        .filter(|&v| matches!(labels[v], BowtieLabel::In | BowtieLabel::Scc))
        .collect();
    if let Some(&v) = inscc_set.iter().find(|&&v| g.is_dangling(v)) {
        return Err(Error::Structural(format!("IN+SCC node {v} is dangling")));
    }
    if inscc_set.is_empty() {
        return Err(Error::Structural("IN+SCC is empty".into()));
    }
    let dn_set = g.dangling_nodes().to_vec();
    let stray: Vec<NodeId> = (0..n)
        .filter(|&v| labels[v] == BowtieLabel::Other && !g.is_dangling(v))
        .collect();
    if !stray.is_empty() && !opts.fold_other {
        return Err(Error::Structural(format!(
            "{} nodes lie outside IN, SCC and OUT (first: {}); fold them into OUT to proceed",
            stray.len(),
            stray[0]
        )));
    }
    let out_set: Vec<NodeId> = (0..n)
        .filter(|&v| !g.is_dangling(v) && !matches!(labels[v], BowtieLabel::In | BowtieLabel::Scc))
        .collect();
    let mut in_out = vec![false; n];
    for &v in &out_set {
        in_out[v] = true;
    }
    let violations: Vec<NodeId> = dn_set
        .iter()
        .copied()
        .filter(|&d| g.predecessors(d).iter().any(|&p| in_out[p]))
        .collect();
    if !violations.is_empty() && !opts.force_dn_merge {
        return Err(Error::AssumptionViolation { nodes: violations });
    }

    let p = SubBlock::new(g, &inscc_set, &inscc_set);
    let r = SubBlock::new(g, &inscc_set, &out_set);
    let s = SubBlock::new(g, &inscc_set, &dn_set);
    let q = SubBlock::new(g, &out_set, &out_set);
    let s_one = s.row_sums();
    let r_one = r.row_sums();
    let internal = inscc_set
        .iter()
        .map(|&v| {
            g.successors(v)
                .iter()
                .filter_map(|w| inscc_set.binary_search(w).ok())
                .collect()
        })
        .collect();
    Ok(ThreeBlockView {
        n,
        alpha: inscc_set.len() as f64 / n as f64,
        beta: dn_set.len() as f64 / n as f64,
        out_set,
        inscc_set,
        dn_set,
        q,
        r,
        p,
        s,
        s_one,
        r_one,
        internal,
        violations,
        solver: SolverOptions::default(),
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Values along the IN+SCC mass curve at one damping factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InsccCurvePoint {
    pub c: f64,
    pub mass: f64,
    pub main_term: f64,
    pub correction: f64,
    /// Central first difference of the mass.
    pub d1: f64,
    /// Central second difference of the mass.
    pub d2: f64,
}

/// The main term and rank-one correction of the Sherman–Morrison split.
#[derive(Debug, Clone, PartialEq)]
pub struct ShermanMorrisonSplit {
    pub c: f64,
    pub main_term: Vec<f64>,
    pub correction: Vec<f64>,
}

impl ShermanMorrisonSplit {
    pub fn main_mass(&self) -> f64 {
        self.main_term.iter().sum()
    }

    pub fn correction_mass(&self) -> f64 {
        self.correction.iter().sum()
    }

    pub fn total(&self) -> Vec<f64> {
        self.main_term
            .iter()
            .zip(&self.correction)
            .map(|(a, b)| a + b)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZeroSlope {
    /// `π'(0) = -α(1-β) u + α u P`.
    pub vector: Vec<f64>,
    /// `α(-1 + β + p₁)`.
    pub total: f64,
    /// `u P 1`.
    pub p1: f64,
    /// Mass grows at `c = 0`, i.e. `1 - β < p₁`.
    pub increasing: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OneSlope {
    /// `π'(1) = -(α/(1-β)) u [I - P - (α/(1-β)) S1 u]⁻¹`.
    pub vector: Vec<f64>,
    pub total: f64,
    /// `π̄R1 + ((1-β-α)/(1-β)) π̄S1` with `π̄` stationary for IN+SCC alone.
    pub leakage: f64,
    /// Leading Laurent approximation `-(α/(1-β)) / leakage`.
    pub approximation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnimodalityReport {
    /// Grid point where the main-term mass peaks.
    pub c0: f64,
    pub violations: Vec<String>,
    /// Number of sign changes of the first difference.
    pub sign_changes: usize,
    /// Smallest `a(c)` seen on the grid.
    pub min_a: f64,
}

impl ThreeBlockView {
    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn with_solver(mut self, solver: SolverOptions) -> Self {
        self.solver = solver;
        self
    }

    fn uniform(&self) -> Vec<f64> {
        vec![1.0 / self.inscc_set.len() as f64; self.inscc_set.len()]
    }

    fn check_damping(c: f64) -> Result<()> {
        if !(0.0..1.0).contains(&c) {
            return Err(Error::InvalidParameter(format!("damping must lie in [0, 1), got {c}")));
        }
        Ok(())
    }

    /// `u [I - cP]⁻¹`, defined for `|c| < 1`.
    fn u_resolvent(&self, c: f64) -> Result<Vec<f64>> {
        let u = self.uniform();
        let mut tmp = vec![0.0; u.len()];
        fixed_point(
            "IN+SCC resolvent",
            |x, y| {
                self.p.left_mul(x, &mut tmp);
                for (yk, t) in y.iter_mut().zip(&tmp) {
                    *yk = c * t;
                }
            },
            &u,
            None,
            self.solver,
        )
    }

    /// Evaluates the closed form for any `|c| < 1`; finite differences at
    /// the left edge need `c < 0`.
    fn inscc_at(&self, c: f64) -> Result<Vec<f64>> {
        let (alpha, beta) = (self.alpha, self.beta);
        let k = (1.0 - c) * alpha / (1.0 - c * beta);
        let kappa = c * c * alpha / (1.0 - c * beta);
        let u = self.uniform();
        let b: Vec<f64> = u.iter().map(|v| k * v).collect();
        let mut tmp = vec![0.0; u.len()];
        fixed_point(
            "IN+SCC closed form",
            |x, y| {
                self.p.left_mul(x, &mut tmp);
                let rank_one = kappa * dot(x, &self.s_one);
                for ((yk, t), uk) in y.iter_mut().zip(&tmp).zip(&u) {
                    *yk = c * t + rank_one * uk;
                }
            },
            &b,
            None,
            self.solver,
        )
    }

    /// PageRank restricted to IN+SCC, in `inscc_set` order.
    pub fn inscc_vector(&self, c: f64) -> Result<Vec<f64>> {
        Self::check_damping(c)?;
        self.inscc_at(c)
    }

    pub fn inscc_mass(&self, c: f64) -> Result<f64> {
        Ok(self.inscc_vector(c)?.iter().sum())
    }

    fn mass_at(&self, c: f64) -> Result<f64> {
        Ok(self.inscc_at(c)?.iter().sum())
    }

    /// Total mass of the dangling segment given the IN+SCC segment.
    pub fn dangling_mass(&self, c: f64, pi_inscc: &[f64]) -> f64 {
        let n = self.n as f64;
        let n_dn = self.dn_set.len() as f64;
        n / (n - c * n_dn) * (c * dot(pi_inscc, &self.s_one) + (1.0 - c) * n_dn / n)
    }

    /// Recovers the OUT and DN segments from the IN+SCC segment.
    pub fn reconstruct_out_and_dn(&self, c: f64, pi_inscc: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        Self::check_damping(c)?;
        let n = self.n as f64;
        let dn_total = self.dangling_mass(c, pi_inscc);
        let restart = (1.0 - c) / n + c * dn_total / n;

        let mut via_s = vec![0.0; self.dn_set.len()];
        self.s.left_mul(pi_inscc, &mut via_s);
        let pi_dn: Vec<f64> = via_s.iter().map(|v| c * v + restart).collect();

        let mut via_r = vec![0.0; self.out_set.len()];
        self.r.left_mul(pi_inscc, &mut via_r);
        let b: Vec<f64> = via_r.iter().map(|v| c * v + restart).collect();
        let mut tmp = vec![0.0; b.len()];
        let pi_out = fixed_point(
            "OUT resolvent",
            |x, y| {
                self.q.left_mul(x, &mut tmp);
                for (yk, t) in y.iter_mut().zip(&tmp) {
                    *yk = c * t;
                }
            },
            &b,
            None,
            self.solver,
        )?;
        Ok((pi_out, pi_dn))
    }

    /// Full PageRank vector over all nodes assembled from the three segments.
    pub fn full_vector(&self, c: f64) -> Result<Vec<f64>> {
        let pi_inscc = self.inscc_vector(c)?;
        let (pi_out, pi_dn) = self.reconstruct_out_and_dn(c, &pi_inscc)?;
        let mut full = vec![0.0; self.n];
        for (set, seg) in [
            (&self.out_set, &pi_out),
            (&self.inscc_set, &pi_inscc),
            (&self.dn_set, &pi_dn),
        ] {
            for (&v, &x) in set.iter().zip(seg.iter()) {
                full[v] = x;
            }
        }
        Ok(full)
    }

    /// L1 residuals of the three block equations (OUT, IN+SCC, DN) for a
    /// full-length vector `pi`.
    pub fn block_equation_residuals(&self, c: f64, pi: &[f64]) -> [f64; 3] {
        let n = self.n as f64;
        let gather = |set: &[NodeId]| set.iter().map(|&v| pi[v]).collect::<Vec<f64>>();
        let (pi_out, pi_inscc, pi_dn) = (gather(&self.out_set), gather(&self.inscc_set), gather(&self.dn_set));
        let dn_total: f64 = pi_dn.iter().sum();
        let restart = (1.0 - c) / n + c * dn_total / n;

        let mut q_term = vec![0.0; pi_out.len()];
        self.q.left_mul(&pi_out, &mut q_term);
        let mut r_term = vec![0.0; pi_out.len()];
        self.r.left_mul(&pi_inscc, &mut r_term);
        let out_res: f64 = (0..pi_out.len())
            .map(|k| (pi_out[k] - c * q_term[k] - c * r_term[k] - restart).abs())
            .sum();

        let mut p_term = vec![0.0; pi_inscc.len()];
        self.p.left_mul(&pi_inscc, &mut p_term);
        let inscc_res: f64 = (0..pi_inscc.len())
            .map(|k| (pi_inscc[k] - c * p_term[k] - restart).abs())
            .sum();

        let mut s_term = vec![0.0; pi_dn.len()];
        self.s.left_mul(&pi_inscc, &mut s_term);
        let dn_res: f64 = (0..pi_dn.len())
            .map(|k| (pi_dn[k] - c * s_term[k] - restart).abs())
            .sum();
        [out_res, inscc_res, dn_res]
    }

    pub fn p1(&self) -> f64 {
        let rows = self.p.row_sums();
        rows.iter().sum::<f64>() / rows.len() as f64
    }

    pub fn derivative_at_zero(&self) -> ZeroSlope {
        let (alpha, beta) = (self.alpha, self.beta);
        let u = self.uniform();
        let mut up = vec![0.0; u.len()];
        self.p.left_mul(&u, &mut up);
        let vector: Vec<f64> = u
            .iter()
            .zip(&up)
            .map(|(ui, upi)| -alpha * (1.0 - beta) * ui + alpha * upi)
            .collect();
        let p1 = self.p1();
        ZeroSlope {
            vector,
            total: alpha * (-1.0 + beta + p1),
            p1,
            increasing: 1.0 - beta < p1,
        }
    }

    /// Stationary law of IN+SCC with its outer links dropped.
    fn isolated_stationary(&self) -> Result<Vec<f64>> {
        let set = &self.inscc_set;
        let dim = set.len();
        let rows = &self.internal;
        if let Some(k) = rows.iter().position(Vec::is_empty) {
            return Err(Error::Structural(format!(
                "IN+SCC node {} has no link inside IN+SCC",
                set[k]
            )));
        }
        let edges = rows
            .iter()
            .enumerate()
            .flat_map(|(k, succ)| succ.iter().map(move |&j| (k, j)));
        let internal = GraphHandle::from_edges(dim, edges)?;
        if crate::bowtie::strongly_connected_components(&internal).len() != 1 {
            return Err(Error::Structural(
                "IN+SCC without its outer links is reducible (IN is non-empty or SCC is split)".into(),
            ));
        }
        stationary_left(
            "isolated IN+SCC stationary distribution",
            dim,
            |x, y| {
                y.fill(0.0);
                for (k, succ) in rows.iter().enumerate() {
                    let share = x[k] / succ.len() as f64;
                    for &j in succ {
                        y[j] += share;
                    }
                }
            },
            self.solver,
        )
    }

    /// `π'(1)` and its total mass. Needs IN+SCC to leak somewhere, since
    /// otherwise the resolvent is singular.
    pub fn exact_derivative_at_one(&self) -> Result<(Vec<f64>, f64)> {
        let ratio = self.alpha / (1.0 - self.beta);
        if self.out_set.is_empty() || !self.every_node_leaks() {
            return Err(Error::Structural(
                "IN+SCC has no path to OUT; the derivative at c = 1 is undefined".into(),
            ));
        }
        let u = self.uniform();
        let mut tmp = vec![0.0; u.len()];
        let resolved = fixed_point(
            "IN+SCC resolvent at c = 1",
            |x, y| {
                self.p.left_mul(x, &mut tmp);
                let rank_one = ratio * dot(x, &self.s_one);
                for ((yk, t), uk) in y.iter_mut().zip(&tmp).zip(&u) {
                    *yk = t + rank_one * uk;
                }
            },
            &u,
            None,
            self.solver,
        )?;
        let vector: Vec<f64> = resolved.iter().map(|v| -ratio * v).collect();
        let total = vector.iter().sum();
        Ok((vector, total))
    }

    /// Whether every IN+SCC node reaches one with a link leaving IN+SCC.
    fn every_node_leaks(&self) -> bool {
        let dim = self.inscc_set.len();
        let mut preds = vec![Vec::new(); dim];
        for (k, succ) in self.internal.iter().enumerate() {
            for &j in succ {
                preds[j].push(k);
            }
        }
        let mut seen: Vec<bool> = (0..dim).map(|k| self.r_one[k] + self.s_one[k] > 0.0).collect();
        let mut queue: Vec<usize> = (0..dim).filter(|&k| seen[k]).collect();
        while let Some(k) = queue.pop() {
            for &p in &preds[k] {
                if !seen[p] {
                    seen[p] = true;
                    queue.push(p);
                }
            }
        }
        seen.into_iter().all(|b| b)
    }

    /// Exact derivative at `c = 1` plus its leading-order approximation,
    /// which requires IN+SCC without outer links to be irreducible.
    pub fn derivative_at_one(&self) -> Result<OneSlope> {
        let (alpha, beta) = (self.alpha, self.beta);
        let pi_bar = self.isolated_stationary()?;
        let leakage = dot(&pi_bar, &self.r_one) + (1.0 - beta - alpha) / (1.0 - beta) * dot(&pi_bar, &self.s_one);
        let (vector, total) = self.exact_derivative_at_one()?;
        Ok(OneSlope {
            vector,
            total,
            leakage,
            approximation: -alpha / (1.0 - beta) / leakage,
        })
    }

    /// Main term `k(c) u[I - cP]⁻¹` and the rank-one correction.
    ///
    /// Sherman–Morrison on `u[I - cP - κ S1 u]⁻¹` scales the main term by
    /// `1 / (1 - κ y)` with `y = u[I - cP]⁻¹ S1`, so the correction is the
    /// main term times `κy / (1 - κy)`.
    pub fn sherman_morrison_split(&self, c: f64) -> Result<ShermanMorrisonSplit> {
        Self::check_damping(c)?;
        self.split_at(c)
    }

    fn split_at(&self, c: f64) -> Result<ShermanMorrisonSplit> {
        let (alpha, beta) = (self.alpha, self.beta);
        let k = (1.0 - c) * alpha / (1.0 - c * beta);
        let kappa = c * c * alpha / (1.0 - c * beta);
        let resolved = self.u_resolvent(c)?;
        let ky = kappa * dot(&resolved, &self.s_one);
        let main_term: Vec<f64> = resolved.iter().map(|v| k * v).collect();
        let factor = ky / (1.0 - ky);
        let correction = main_term.iter().map(|v| factor * v).collect();
        Ok(ShermanMorrisonSplit {
            c,
            main_term,
            correction,
        })
    }

    /// `‖π̃(c)‖`.
    pub fn main_term_mass(&self, c: f64) -> Result<f64> {
        Ok(self.sherman_morrison_split(c)?.main_mass())
    }

    /// `a(c) = α/(1-cβ) u[I-cP]⁻¹[I-P][I-cP]⁻¹1`.
    pub fn a_coefficient(&self, c: f64) -> Result<f64> {
        Self::check_damping(c)?;
        let dim = self.inscc_set.len();
        let ones = vec![1.0; dim];
        let mut tmp = vec![0.0; dim];
        let right = fixed_point(
            "IN+SCC right resolvent",
            |x, y| {
                self.p.right_mul(x, &mut tmp);
                for (yk, t) in y.iter_mut().zip(&tmp) {
                    *yk = c * t;
                }
            },
            &ones,
            None,
            self.solver,
        )?;
        let mut p_right = vec![0.0; dim];
        self.p.right_mul(&right, &mut p_right);
        let diff: Vec<f64> = right.iter().zip(&p_right).map(|(a, b)| a - b).collect();
        let left = self.u_resolvent(c)?;
        Ok(self.alpha / (1.0 - c * self.beta) * dot(&left, &diff))
    }

    /// Curve point with central differences of the mass at step [`CENTRAL_STEP`].
    pub fn curve_point(&self, c: f64) -> Result<InsccCurvePoint> {
        Self::check_damping(c)?;
        let h = CENTRAL_STEP;
        let mass = self.mass_at(c)?;
        let split = self.split_at(c)?;
        let (lo, hi) = (self.mass_at(c - h)?, self.mass_at(c + h)?);
        Ok(InsccCurvePoint {
            c,
            mass,
            main_term: split.main_mass(),
            correction: split.correction_mass(),
            d1: (hi - lo) / (2.0 * h),
            d2: (hi - 2.0 * mass + lo) / (h * h),
        })
    }

    /// Central difference of the total mass at `c = 0`.
    pub fn central_difference_at_zero(&self) -> Result<f64> {
        let h = CENTRAL_STEP;
        Ok((self.mass_at(h)? - self.mass_at(-h)?) / (2.0 * h))
    }

    /// Forward difference of the total mass at `c`, step [`ONE_SIDED_STEP`].
    pub fn forward_difference(&self, c: f64) -> Result<f64> {
        let h = ONE_SIDED_STEP;
        Ok((self.mass_at(c + h)? - self.mass_at(c)?) / h)
    }

    /// Checks that `‖π̃(c)‖` rises then falls at most once along `grid`
    /// and is concave past its peak.
    pub fn unimodality_scan(&self, grid: &[f64]) -> Result<UnimodalityReport> {
        let values: Vec<f64> = grid.iter().map(|&c| self.main_term_mass(c)).collect::<Result<_>>()?;
        let min_a = grid
            .iter()
            .map(|&c| self.a_coefficient(c))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        Ok(scan_shape(grid, &values, min_a))
    }
}

fn scan_shape(grid: &[f64], values: &[f64], min_a: f64) -> UnimodalityReport {
    let mut violations = Vec::new();
    let diffs: Vec<f64> = values.windows(2).map(|w| w[1] - w[0]).collect();
    let mut sign_changes = 0;
    let mut descending = false;
    for (k, &d) in diffs.iter().enumerate() {
        if d < 0.0 && !descending {
            if k > 0 {
                sign_changes += 1;
            }
            descending = true;
        } else if d > 0.0 && descending {
            sign_changes += 1;
            violations.push(format!(
                "mass rises again between c = {} and c = {}",
                grid[k],
                grid[k + 1]
            ));
            descending = false;
        }
    }
    let peak = values
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(k, _)| k)
        .unwrap_or(0);
    for k in (peak + 1)..values.len().saturating_sub(1) {
        let second = values[k + 1] - 2.0 * values[k] + values[k - 1];
        if second > CONCAVITY_FLOOR {
            violations.push(format!(
                "convex past the peak at c = {} (second difference {second:e})",
                grid[k]
            ));
        }
    }
    UnimodalityReport {
        c0: grid.get(peak).copied().unwrap_or(0.0),
        violations,
        sign_changes,
        min_a,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canonical::{fig1, threeblock};

    fn view(g: &GraphHandle) -> Result<ThreeBlockView> {
        three_block_view(g, &BowtieAnalysis::new(g), ThreeBlockOptions::default())
    }

    #[test]
    fn threeblock_fractions() {
        let v = view(&threeblock()).unwrap();
        assert!((v.alpha - 4.0 / 9.0).abs() < 1e-15);
        assert!((v.beta - 2.0 / 9.0).abs() < 1e-15);
        assert_eq!(v.out_set, vec![6, 7, 8]);
        assert_eq!(v.dn_set, vec![4, 5]);
    }

    #[test]
    fn fig1_violates_assumption() {
        match view(&fig1()) {
            Err(Error::AssumptionViolation { nodes }) => assert_eq!(nodes, vec![5]),
            other => panic!("unexpected {other:?}"),
        }
        let g = fig1();
        let forced = three_block_view(
            &g,
            &BowtieAnalysis::new(&g),
            ThreeBlockOptions {
                force_dn_merge: true,
                fold_other: false,
            },
        )
        .unwrap();
        assert_eq!(forced.violations, vec![5]);
    }

    #[test]
    fn no_dangling_means_beta_zero() {
        let g = GraphHandle::from_edges(4, [(0, 1), (1, 0), (1, 2), (2, 3), (3, 2)]).unwrap();
        let v = view(&g).unwrap();
        assert_eq!(v.beta, 0.0);
        assert!(v.dn_set.is_empty());
        let full = v.full_vector(0.7).unwrap();
        assert!((full.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let slope = v.derivative_at_zero();
        assert!(slope.total <= 0.0 && !slope.increasing);
    }

    #[test]
    fn zero_damping_values() {
        let v = view(&threeblock()).unwrap();
        let x = v.inscc_vector(0.0).unwrap();
        for xi in &x {
            assert!((xi - v.alpha / 4.0).abs() < 1e-16);
        }
        let full = v.full_vector(0.0).unwrap();
        for f in full {
            assert!((f - 1.0 / 9.0).abs() < 1e-15);
        }
        let split = v.sherman_morrison_split(0.0).unwrap();
        assert_eq!(split.correction_mass(), 0.0);
    }

    #[test]
    fn closed_core_with_dangling_leak() {
        // IN+SCC {0,1} closed except for links to dangling 2: p1 = 1/2 here,
        // so instead check the algebraic identity α(-1+β+p₁)
        let g = GraphHandle::from_edges(3, [(0, 1), (1, 0), (1, 2)]).unwrap();
        let v = view(&g).unwrap();
        let s = v.derivative_at_zero();
        assert!((s.p1 - 0.75).abs() < 1e-15);
        assert!((s.total - v.alpha * (-1.0 + v.beta + 0.75)).abs() < 1e-15);
    }

    #[test]
    fn beta_zero_scan_peaks_at_zero() {
        let g = GraphHandle::from_edges(4, [(0, 1), (1, 0), (1, 2), (2, 3), (3, 2)]).unwrap();
        let v = view(&g).unwrap();
        let grid: Vec<f64> = (0..100).map(|k| k as f64 * 0.01).collect();
        let rep = v.unimodality_scan(&grid).unwrap();
        assert_eq!(rep.c0, 0.0);
        assert!(rep.violations.is_empty(), "{:?}", rep.violations);
    }

    #[test]
    fn shape_scanner_flags_second_rise() {
        let grid = [0.0, 0.1, 0.2, 0.3, 0.4];
        let rep = scan_shape(&grid, &[1.0, 0.9, 0.8, 0.85, 0.7], 1.0);
        assert!(!rep.violations.is_empty());
        let ok = scan_shape(&grid, &[0.5, 0.6, 0.62, 0.6, 0.5], 1.0);
        assert!(ok.violations.is_empty());
        assert_eq!(ok.c0, 0.2);
        assert_eq!(ok.sign_changes, 1);
    }

    #[test]
    fn reducible_isolated_core_rejected() {
        // IN node 0 feeds SCC {1,2}; P̄ is reducible
        let g = GraphHandle::from_edges(5, [(0, 1), (1, 2), (2, 1), (2, 3), (1, 4), (4, 4)]).unwrap();
        let v = view(&g).unwrap();
        assert!(matches!(v.derivative_at_one(), Err(Error::Structural(_))));
    }
}
