//! Iterative kernels shared by the analysis modules.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-14,
            max_iterations: 5_000_000,
        }
    }
}

/// Detects iterations whose steps have hit the rounding floor: the smallest
/// step seen has not improved by 1% within a window, and steps are already
/// tiny relative to the iterate. Slow but genuine geometric decay keeps
/// setting new minima and is never flagged.
#[derive(Debug, Clone)]
pub struct StallGuard {
    best: f64,
    since: usize,
}

impl StallGuard {
    const WINDOW: usize = 1000;
    const CEILING: f64 = 1e-10;

    pub fn new() -> Self {
        Self {
            best: f64::INFINITY,
            since: 0,
        }
    }

    /// Records a step of size `step` for an iterate of L1 size `scale`.
    pub fn stalled(&mut self, step: f64, scale: f64) -> bool {
        if step < 0.99 * self.best {
            self.best = step;
            self.since = 0;
        } else {
            self.since += 1;
        }
        self.since >= Self::WINDOW && step <= Self::CEILING * scale
    }
}

impl Default for StallGuard {
    fn default() -> Self {
        Self::new()
    }
}

fn l1(x: &[f64]) -> f64 {
    x.iter().map(|v| v.abs()).sum()
}

/// Solves `x = x M + b` (or `x = M x + b`, depending on `apply`) by
/// stationary iteration, for `M` with spectral radius below one.
///
/// The contraction rate is estimated from successive step sizes and the
/// iteration stops once the geometric tail bound `step * r / (1 - r)` drops
/// under `tolerance * max(1, |x|)`, or once steps at rounding level stop
/// shrinking.
pub fn fixed_point<F>(
    what: &str,
    mut apply: F,
    b: &[f64],
    start: Option<&[f64]>,
    opts: SolverOptions,
) -> Result<Vec<f64>>
where
    F: FnMut(&[f64], &mut [f64]),
{
    let dim = b.len();
    let mut x: Vec<f64> = match start {
        Some(s) if s.len() == dim => s.to_vec(),
        _ => b.to_vec(),
    };
    if dim == 0 {
        return Ok(x);
    }
    let mut y = vec![0.0; dim];
    let mut prev_step = f64::INFINITY;
    let mut prev_rate = 1.0;
    let mut step = f64::INFINITY;
    let mut guard = StallGuard::new();
    for _ in 0..opts.max_iterations {
        apply(&x, &mut y);
        step = 0.0;
        for k in 0..dim {
            y[k] += b[k];
            step += (y[k] - x[k]).abs();
        }
        std::mem::swap(&mut x, &mut y);
        let norm = l1(&x).max(1.0);
        let rate = step / prev_step;
        if step == 0.0 || (step <= 64.0 * f64::EPSILON * norm && rate >= 1.0) || guard.stalled(step, norm) {
            return Ok(x);
        }
        let r = rate.max(prev_rate);
        if r < 1.0 && step * r / (1.0 - r) <= opts.tolerance * norm {
            return Ok(x);
        }
        prev_rate = if rate.is_finite() { rate } else { 1.0 };
        prev_step = step;
    }
    Err(Error::NonConvergence {
        what: what.to_string(),
        iterations: opts.max_iterations,
        residual: step,
    })
}

/// Left stationary distribution of a stochastic operator via the lazy chain
/// `x <- (x + x A) / 2`, which shares the fixed point and is aperiodic.
pub fn stationary_left<F>(what: &str, dim: usize, mut apply: F, opts: SolverOptions) -> Result<Vec<f64>>
where
    F: FnMut(&[f64], &mut [f64]),
{
    let mut x = vec![1.0 / dim as f64; dim];
    let mut xa = vec![0.0; dim];
    let mut residual = f64::INFINITY;
    for _ in 0..opts.max_iterations {
        apply(&x, &mut xa);
        residual = x.iter().zip(&xa).map(|(a, b)| (a - b).abs()).sum();
        for k in 0..dim {
            x[k] = 0.5 * (x[k] + xa[k]);
        }
        let s: f64 = x.iter().sum();
        x.iter_mut().for_each(|v| *v /= s);
        if residual <= opts.tolerance {
            return Ok(x);
        }
    }
    Err(Error::NonConvergence {
        what: what.to_string(),
        iterations: opts.max_iterations,
        residual,
    })
}

/// Perron root and left Perron vector of a nonnegative operator.
#[derive(Debug, Clone, PartialEq)]
pub struct PerronPair {
    pub value: f64,
    pub vector: Vec<f64>,
    /// Whether the shifted (averaged) iteration was needed.
    pub damped: bool,
}

/// Power iteration with L1 normalization. When plain iteration fails to
/// settle (periodic blocks), falls back to iterating `(x + x A) / 2`, whose
/// dominant eigenvalue is `(λ + 1) / 2` with the same eigenvector.
pub fn perron_left<F>(what: &str, dim: usize, mut apply: F, opts: SolverOptions) -> Result<PerronPair>
where
    F: FnMut(&[f64], &mut [f64]),
{
    let plain_budget = (opts.max_iterations / 4).max(1000);
    if let Ok((value, vector)) = power(dim, &mut apply, false, opts.tolerance, plain_budget) {
        return Ok(PerronPair {
            value,
            vector,
            damped: false,
        });
    }
    match power(dim, &mut apply, true, opts.tolerance, opts.max_iterations) {
        Ok((value, vector)) => Ok(PerronPair {
            value,
            vector,
            damped: true,
        }),
        Err(residual) => Err(Error::NonConvergence {
            what: what.to_string(),
            iterations: opts.max_iterations,
            residual,
        }),
    }
}

fn power<F>(
    dim: usize,
    apply: &mut F,
    shifted: bool,
    tol: f64,
    max_iter: usize,
) -> std::result::Result<(f64, Vec<f64>), f64>
where
    F: FnMut(&[f64], &mut [f64]),
{
    let mut x = vec![1.0 / dim as f64; dim];
    let mut y = vec![0.0; dim];
    let mut residual = f64::INFINITY;
    for _ in 0..max_iter {
        apply(&x, &mut y);
        if shifted {
            for k in 0..dim {
                y[k] = 0.5 * (y[k] + x[k]);
            }
        }
        let s: f64 = y.iter().sum();
        if s <= 0.0 {
            return Ok((0.0, x));
        }
        y.iter_mut().for_each(|v| *v /= s);
        residual = x.iter().zip(&y).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut x, &mut y);
        if residual <= tol {
            // Rayleigh-style estimate: |x A|_1 for a unit-L1 nonnegative x
            apply(&x, &mut y);
            let value = y.iter().sum();
            return Ok((value, x));
        }
    }
    Err(residual)
}
