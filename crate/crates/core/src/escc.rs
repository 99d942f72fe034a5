//! Mass of the extended SCC as a function of the damping factor.
//!
//! With `T` the hyperlink matrix restricted to a set of `m` transient nodes
//! and `u` uniform over them, the PageRank mass held by the set is
//!
//! ```text
//! M(c) = (1-c) γ u [I - cT]⁻¹ 1,    γ = m / n,
//! ```
//!
//! which is exact whenever no node outside the set links into it. The
//! default set is the whole transient block, which always qualifies.

use rayon::prelude::*;

use crate::block::SubBlock;
use crate::bowtie::BowtieAnalysis;
use crate::error::{Error, Result};
use crate::graph::{GraphHandle, NodeId};
use crate::solve::{fixed_point, perron_left, SolverOptions};

/// Bisection stops once the bracket is narrower than this.
pub const BISECTION_WIDTH: f64 = 1e-10;
/// Tolerance of the Perron iteration.
pub const PERRON_TOLERANCE: f64 = 1e-13;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum EsccScope {
    /// All transient nodes: the extended SCC plus transient Pure OUT nodes.
    #[default]
    FullTransient,
    /// Extended SCC nodes only.
    EsccOnly,
}

#[derive(Debug, Clone)]
pub struct EsccBlock {
    pub scope: EsccScope,
    pub nodes: Vec<NodeId>,
    /// `|nodes| / n`.
    pub gamma: f64,
    /// `|Pure OUT| / n`.
    pub delta: f64,
    t: SubBlock,
    solver: SolverOptions,
}

impl EsccBlock {
    pub fn new(g: &GraphHandle, analysis: &BowtieAnalysis, scope: EsccScope) -> Result<Self> {
        let nodes = match scope {
            EsccScope::FullTransient => analysis.blocks.transient_set.clone(),
            EsccScope::EsccOnly => analysis.escc_nodes(),
        };
        if nodes.is_empty() {
            return Err(Error::Structural("the transient block is empty".into()));
        }
        let n = g.node_count() as f64;
        let t = SubBlock::new(g, &nodes, &nodes);
        Ok(Self {
            scope,
            gamma: nodes.len() as f64 / n,
            delta: analysis.pure_out_nodes().len() as f64 / n,
            nodes,
            t,
            solver: SolverOptions::default(),
        })
    }

    pub fn size(&self) -> usize {
        self.nodes.len()
    }

    /// `[I - cT]⁻¹ 1`, warm-started from `start` when given.
    fn right_resolvent(&self, c: f64, start: Option<&[f64]>) -> Result<Vec<f64>> {
        let ones = vec![1.0; self.size()];
        let mut tmp = vec![0.0; self.size()];
        fixed_point(
            "transient resolvent",
            |x, y| {
                self.t.right_mul(x, &mut tmp);
                for (yk, t) in y.iter_mut().zip(&tmp) {
                    *yk = c * t;
                }
            },
            &ones,
            start,
            self.solver,
        )
    }

    fn mean(x: &[f64]) -> f64 {
        x.iter().sum::<f64>() / x.len() as f64
    }

    /// `u [I - cT]⁻¹ 1` for `c ∈ [0, 1]`.
    pub fn expected_visits(&self, c: f64) -> Result<f64> {
        check_closed_unit(c)?;
        Ok(Self::mean(&self.right_resolvent(c, None)?))
    }

    pub fn escc_mass(&self, c: f64) -> Result<f64> {
        Ok(self.escc_mass_warm(c, None)?.0)
    }

    /// Mass together with the resolvent solution, for warm starts.
    pub fn escc_mass_warm(&self, c: f64, start: Option<&[f64]>) -> Result<(f64, Vec<f64>)> {
        check_closed_unit(c)?;
        if c == 1.0 {
            return Ok((0.0, start.map(<[f64]>::to_vec).unwrap_or_default()));
        }
        let x = self.right_resolvent(c, start)?;
        Ok(((1.0 - c) * self.gamma * Self::mean(&x), x))
    }

    pub fn spectral_summary(&self) -> Result<SpectralSummary> {
        let rows = self.t.row_sums();
        let p1 = Self::mean(&rows);
        let opts = SolverOptions {
            tolerance: PERRON_TOLERANCE,
            ..self.solver
        };
        let pair = perron_left(
            "Perron root of the transient block",
            self.size(),
            |x, y| self.t.left_mul(x, y),
            opts,
        )?;
        Ok(SpectralSummary {
            p1,
            lambda1: pair.value,
            quasi_stationary: pair.vector,
            gamma: self.gamma,
            delta: self.delta,
            damped: pair.damped,
        })
    }

    /// `|π̂ T - λ₁ π̂|_1`.
    pub fn eigen_residual(&self, s: &SpectralSummary) -> f64 {
        let mut y = vec![0.0; self.size()];
        self.t.left_mul(&s.quasi_stationary, &mut y);
        y.iter()
            .zip(&s.quasi_stationary)
            .map(|(a, b)| (a - s.lambda1 * b).abs())
            .sum()
    }

    /// Mass curve and both bounds on `grid`, with the conditions under
    /// which each bound is guaranteed.
    pub fn prop3_bounds(&self, s: &SpectralSummary, grid: &[f64]) -> Result<BoundTable> {
        if let Some(&c) = grid.iter().find(|&&c| !(c > 0.0 && c < 1.0)) {
            return Err(Error::InvalidParameter(format!(
                "bound grid points must lie in (0, 1), got {c}"
            )));
        }
        let visits_at_one = self.expected_visits(1.0)?;
        let cond_upper = s.p1 < s.lambda1;
        let cond_lower = 1.0 / (1.0 - s.p1) < visits_at_one;
        let rows = grid
            .par_iter()
            .map(|&c| {
                let mass = self.escc_mass(c)?;
                let lower = self.gamma * (1.0 - c) / (1.0 - c * s.p1);
                let upper = self.gamma * (1.0 - c) / (1.0 - c * s.lambda1);
                Ok(BoundRow {
                    c,
                    mass,
                    lower,
                    upper,
                    lower_holds: lower < mass,
                    upper_holds: mass < upper,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(BoundTable {
            cond_i: cond_upper,
            cond_ii: cond_lower,
            visits_at_one,
            rows,
        })
    }

    /// The damping factor where the mass retained by the block equals the
    /// one-step retention of the chosen seed distribution.
    pub fn cstar_solve(&self, s: &SpectralSummary, mode: SeedMode, width: f64) -> Result<CStarReport> {
        if width.is_nan() || width <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "bisection width must be positive, got {width}"
            )));
        }
        let (c1, c2) = cstar_interval_closed_form(s.p1, s.lambda1, mode)?;
        let visits_at_one = self.expected_visits(1.0)?;
        let cond_i = s.p1 < s.lambda1;
        let cond_ii = 1.0 / (1.0 - s.p1) < visits_at_one;

        // Both equations are bisected in normalized form: the fixed-seed
        // one as M(c)/γ = w, the self-normalized one as c·u[I-cT]⁻¹1 = 1,
        // which is M(c) = r(c) divided by γ(1-c)/c and stays regular at c = 1.
        let w = match mode {
            SeedMode::QuasiStationary => s.lambda1,
            SeedMode::Uniform => s.p1,
            SeedMode::SelfNormalized => f64::NAN,
        };
        let mut warm: Option<Vec<f64>> = None;
        let mut eval = |c: f64| -> Result<f64> {
            let x = self.right_resolvent(c, warm.as_deref())?;
            let visits = Self::mean(&x);
            warm = Some(x);
            Ok(match mode {
                SeedMode::SelfNormalized => c * visits - 1.0,
                _ => (1.0 - c) * visits - w,
            })
        };
        let (mut lo, mut hi) = match mode {
            SeedMode::SelfNormalized => (0.5, 1.0),
            _ => (0.0, 1.0),
        };
        let f_lo = eval(lo)?;
        let f_hi = if mode == SeedMode::SelfNormalized {
            visits_at_one - 1.0
        } else {
            -w
        };
        let c_star = if f_lo == 0.0 {
            Some(lo)
        } else if f_lo.signum() == f_hi.signum() {
            None
        } else {
            while hi - lo > width {
                let mid = 0.5 * (lo + hi);
                let f = eval(mid)?;
                if f == 0.0 {
                    lo = mid;
                    hi = mid;
                } else if f.signum() == f_lo.signum() {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            Some(0.5 * (lo + hi))
        };

        let (residual, vt_norm) = match c_star {
            Some(c) => {
                let mass = self.escc_mass(c)?;
                let residual = match mode {
                    SeedMode::SelfNormalized => (mass - r_curve(self.gamma, c)).abs(),
                    _ => (mass / self.gamma - w).abs(),
                };
                let vt = match mode {
                    SeedMode::SelfNormalized => self.self_seed_retention(c)?,
                    _ => w,
                };
                (residual, vt)
            }
            None => (f64::NAN, w),
        };

        let r_samples = if mode == SeedMode::SelfNormalized {
            let mut points: Vec<f64> = (1..20).map(|k| k as f64 * 0.05).collect();
            if let Some(c) = c_star {
                points.push(c);
                points.sort_by(f64::total_cmp);
            }
            points
                .into_par_iter()
                .map(|c| {
                    Ok(RCurveSample {
                        c,
                        r: r_curve(self.gamma, c),
                        mass: self.escc_mass(c)?,
                    })
                })
                .collect::<Result<Vec<_>>>()?
        } else {
            Vec::new()
        };

        Ok(CStarReport {
            mode,
            vt_norm,
            c1,
            c2,
            c_star,
            residual,
            cond_i,
            cond_ii,
            r_samples,
        })
    }

    /// `|vT|_1` for `v` the block's normalized PageRank profile at `c`.
    fn self_seed_retention(&self, c: f64) -> Result<f64> {
        let m = self.size();
        let u = vec![1.0 / m as f64; m];
        let mut tmp = vec![0.0; m];
        let x = fixed_point(
            "transient left resolvent",
            |x, y| {
                self.t.left_mul(x, &mut tmp);
                for (yk, t) in y.iter_mut().zip(&tmp) {
                    *yk = c * t;
                }
            },
            &u,
            None,
            self.solver,
        )?;
        self.t.left_mul(&x, &mut tmp);
        Ok(tmp.iter().sum::<f64>() / x.iter().sum::<f64>())
    }
}

fn check_closed_unit(c: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&c) {
        return Err(Error::InvalidParameter(format!("damping must lie in [0, 1], got {c}")));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralSummary {
    /// One-step retention from the uniform distribution, `u T 1`.
    pub p1: f64,
    /// Perron root of `T`.
    pub lambda1: f64,
    /// Normalized left Perron vector of `T`.
    pub quasi_stationary: Vec<f64>,
    pub gamma: f64,
    pub delta: f64,
    /// The averaged iteration was needed (periodic `T`).
    pub damped: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundRow {
    pub c: f64,
    pub mass: f64,
    /// `γ(1-c)/(1-c p₁)`.
    pub lower: f64,
    /// `γ(1-c)/(1-c λ₁)`.
    pub upper: f64,
    pub lower_holds: bool,
    pub upper_holds: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundTable {
    /// `p₁ < λ₁`; guarantees the upper bound.
    pub cond_i: bool,
    /// `1/(1-p₁) < u[I-T]⁻¹1`; guarantees the lower bound.
    pub cond_ii: bool,
    /// `u[I-T]⁻¹1`.
    pub visits_at_one: f64,
    pub rows: Vec<BoundRow>,
}

impl BoundTable {
    /// Grid points where a guaranteed bound fails.
    pub fn failures(&self) -> Vec<f64> {
        self.rows
            .iter()
            .filter(|r| (self.cond_i && !r.upper_holds) || (self.cond_ii && !r.lower_holds))
            .map(|r| r.c)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeedMode {
    /// `v = π̂`, so `|vT| = λ₁`.
    QuasiStationary,
    /// `v = u`, so `|vT| = p₁`.
    Uniform,
    /// `v` is the block's own normalized PageRank profile.
    SelfNormalized,
}

impl SeedMode {
    pub fn as_str(self) -> &'static str {
        match self {
            SeedMode::QuasiStationary => "quasi",
            SeedMode::Uniform => "uniform",
            SeedMode::SelfNormalized => "self",
        }
    }
}

impl std::str::FromStr for SeedMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quasi" => Ok(SeedMode::QuasiStationary),
            "uniform" => Ok(SeedMode::Uniform),
            "self" => Ok(SeedMode::SelfNormalized),
            _ => Err(Error::InvalidParameter(format!(
                "unknown mode {s:?}; expected quasi, uniform or self"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RCurveSample {
    pub c: f64,
    pub r: f64,
    pub mass: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CStarReport {
    pub mode: SeedMode,
    pub vt_norm: f64,
    pub c1: f64,
    pub c2: f64,
    /// `None` when the equation has no crossing on the search interval.
    pub c_star: Option<f64>,
    /// Equation residual at `c_star`; mass units in self-normalized mode,
    /// `M/γ` units otherwise.
    pub residual: f64,
    pub cond_i: bool,
    pub cond_ii: bool,
    pub r_samples: Vec<RCurveSample>,
}

/// `r(c) = γ` for `c ≤ 1/2` and `γ(1-c)/c` above.
pub fn r_curve(gamma: f64, c: f64) -> f64 {
    if c <= 0.5 {
        gamma
    } else {
        gamma * (1.0 - c) / c
    }
}

/// Interval ends solving `(1-c)/(1-qc) = w` for `q = p₁` and `q = λ₁`.
///
/// In self-normalized mode the ends are `1/(1+λ₁)` and `1/(1+p₁)`.
pub fn cstar_interval_closed_form(p1: f64, lambda1: f64, mode: SeedMode) -> Result<(f64, f64)> {
    for (name, v) in [("p1", p1), ("lambda1", lambda1)] {
        if !(v > 0.0 && v < 1.0) {
            return Err(Error::Domain(format!("{name} must lie in (0, 1), got {v}")));
        }
    }
    let w = match mode {
        SeedMode::QuasiStationary => lambda1,
        SeedMode::Uniform => p1,
        SeedMode::SelfNormalized => return Ok((1.0 / (1.0 + lambda1), 1.0 / (1.0 + p1))),
    };
    let end = |q: f64| (1.0 - w) / (1.0 - q * w);
    Ok((end(p1), end(lambda1)))
}

/// Pure OUT mass relative to its node share `δ`.
pub fn pure_out_unfairness(pi: &[f64], analysis: &BowtieAnalysis) -> Result<f64> {
    let nodes = analysis.pure_out_nodes();
    if nodes.is_empty() {
        return Err(Error::Domain("Pure OUT is empty, so its fair share is zero".into()));
    }
    let delta = nodes.len() as f64 / pi.len() as f64;
    Ok(nodes.iter().map(|&v| pi[v]).sum::<f64>() / delta)
}
