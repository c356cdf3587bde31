//! Finite-difference cross-check of the analytic spectrum.
//!
//! The scaled radial operator `−(1/r)(rF')' + (l²/r² + r² + ξ/r)F = ΛF` is
//! discretized in conservative (flux) form on the cell-centred grid
//! `r_j = (j + ½)h`, `h = r_max/N`, with `F = 0` imposed at `r_max`. The
//! diagonal similarity `u_j = √r_j F_j` makes the matrix symmetric tridiagonal
//! (the discrete Liouville form), and eigenvalues come from Sturm-count
//! bisection.

use crate::error::{Error, Result};
use crate::heun::{self, RadialSamples};
use crate::quantize::QuantizedMode;

/// Largest accepted grid spacing.
pub const MAX_SPACING: f64 = 0.02;
/// Smallest accepted number of grid points.
pub const MIN_POINTS: usize = 500;
/// Default relative tolerance on the extrapolated eigenvalue.
pub const DEFAULT_TOLERANCE: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// Three-point conservative stencil, symmetrized by `u = √r F`.
    ThreePointSymmetrized,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub r_max: f64,
    pub n_points: usize,
    pub scheme: Scheme,
}

impl GridSpec {
    pub fn new(r_max: f64, n_points: usize) -> Result<Self> {
        if !(r_max > 0.0) || !r_max.is_finite() {
            return Err(Error::InvalidGrid(format!("r_max must be positive, got {r_max}")));
        }
        if n_points < MIN_POINTS {
            return Err(Error::InvalidGrid(format!(
                "need at least {MIN_POINTS} points, got {n_points}"
            )));
        }
        Ok(Self {
            r_max,
            n_points,
            scheme: Scheme::ThreePointSymmetrized,
        })
    }

    /// `r_max = max(10, √Λ + 6)`, 4000 points.
    pub fn default_for(scaled_eigenvalue: f64) -> Self {
        Self {
            r_max: 10f64.max(scaled_eigenvalue.max(0.0).sqrt() + 6.0),
            n_points: 4000,
            scheme: Scheme::ThreePointSymmetrized,
        }
    }

    pub fn spacing(&self) -> f64 {
        self.r_max / self.n_points as f64
    }

    /// Same domain with `factor` times as many points.
    pub fn refined(&self, factor: usize) -> Self {
        Self {
            n_points: self.n_points * factor,
            ..*self
        }
    }
}

/// Symmetric tridiagonal matrix: `diag[0..n]`, `off[0..n-1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiagonal {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl SymTridiagonal {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Number of eigenvalues strictly below `x` (negative pivots of `LDLᵀ` of `T − x`).
    pub fn count_below(&self, x: f64) -> usize {
        let pivmin = f64::MIN_POSITIVE * self.off.iter().fold(1.0, |a: f64, e| a.max(e * e));
        let mut count = 0;
        let mut q = self.diag[0] - x;
        for i in 0.. {
            if q.abs() < pivmin {
                q = -pivmin;
            }
            if q < 0.0 {
                count += 1;
            }
            if i + 1 == self.diag.len() {
                break;
            }
            q = (self.diag[i + 1] - x) - self.off[i] * self.off[i] / q;
        }
        count
    }

    fn gershgorin(&self) -> (f64, f64) {
        let n = self.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let left = if i > 0 { self.off[i - 1].abs() } else { 0.0 };
            let right = if i + 1 < n { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - left - right);
            hi = hi.max(self.diag[i] + left + right);
        }
        (lo, hi)
    }
}

/// Builds the symmetric discretization for `(|l|, ξ)` on `grid`.
pub fn build_operator(l_abs: u32, xi: f64, grid: &GridSpec) -> Result<SymTridiagonal> {
    let h = grid.spacing();
    if h > MAX_SPACING {
        return Err(Error::GridTooCoarse { h, max: MAX_SPACING });
    }
    let n = grid.n_points;
    let l2 = f64::from(l_abs).powi(2);
    let h2 = h * h;
    let centre = |j: usize| (j as f64 + 0.5) * h;
    let mut diag = Vec::with_capacity(n);
    for j in 0..n {
        let r = centre(j);
        let inner = j as f64 * h;
        // ghost value −F at the last face gives F(r_max) = 0
        let outer = if j + 1 == n {
            2.0 * (j as f64 + 1.0) * h
        } else {
            (j as f64 + 1.0) * h
        };
        let kinetic = (inner + outer) / (r * h2);
        diag.push(kinetic + l2 / (r * r) + r * r + xi / r);
    }
    let off = (0..n - 1)
        .map(|j| {
            let face = (j as f64 + 1.0) * h;
            -face / (h2 * (centre(j) * centre(j + 1)).sqrt())
        })
        .collect();
    Ok(SymTridiagonal { diag, off })
}

/// The `k` smallest eigenvalues in ascending order, by bisection on Sturm counts.
pub fn lowest_eigenvalues(matrix: &SymTridiagonal, k: usize) -> Result<Vec<f64>> {
    if k > matrix.len() {
        return Err(Error::InvalidGrid(format!(
            "requested {k} eigenvalues of a {}x{} matrix",
            matrix.len(),
            matrix.len()
        )));
    }
    let (g_lo, g_hi) = matrix.gershgorin();
    let pad = 1e-12 * g_lo.abs().max(g_hi.abs()) + 1e-300;
    let (g_lo, g_hi) = (g_lo - pad, g_hi + pad);
    const MAX_ITER: usize = 300;
    let mut out = Vec::with_capacity(k);
    for index in 0..k {
        let mut lo = out.last().copied().unwrap_or(g_lo).max(g_lo);
        let mut hi = g_hi;
        let mut converged = false;
        for _ in 0..MAX_ITER {
            if hi - lo <= 2.0 * f64::EPSILON * lo.abs().max(hi.abs()) + f64::MIN_POSITIVE {
                converged = true;
                break;
            }
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                converged = true;
                break;
            }
            if matrix.count_below(mid) > index {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        if !converged {
            return Err(Error::ConvergenceFailure {
                index,
                iterations: MAX_ITER,
                lo,
                hi,
            });
        }
        out.push(0.5 * (lo + hi));
    }
    Ok(out)
}

/// Eigenvalues on grids of `N`, `2N` and `4N` points plus the `(N, 2N)`
/// Richardson extrapolation assuming `O(h²)` convergence.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSequence {
    pub coarse: Vec<f64>,
    pub fine: Vec<f64>,
    pub finest: Vec<f64>,
}

impl GridSequence {
    pub fn compute(l_abs: u32, xi: f64, grid: &GridSpec, k: usize) -> Result<Self> {
        let solve = |g: &GridSpec| lowest_eigenvalues(&build_operator(l_abs, xi, g)?, k);
        Ok(Self {
            coarse: solve(grid)?,
            fine: solve(&grid.refined(2))?,
            finest: solve(&grid.refined(4))?,
        })
    }

    pub fn extrapolated(&self, i: usize) -> f64 {
        richardson(self.coarse[i], self.fine[i])
    }

    /// `|Λ_R − Λ(2N)|`, the size of the Richardson correction.
    pub fn error_estimate(&self, i: usize) -> f64 {
        (self.extrapolated(i) - self.fine[i]).abs()
    }

    /// `(Λ(N) − Λ(2N)) / (Λ(2N) − Λ(4N))`; close to 4 for second order.
    pub fn convergence_ratio(&self, i: usize) -> f64 {
        (self.coarse[i] - self.fine[i]) / (self.fine[i] - self.finest[i])
    }
}

/// `(4 Λ_fine − Λ_coarse) / 3`.
pub fn richardson(coarse: f64, fine: f64) -> f64 {
    (4.0 * fine - coarse) / 3.0
}

/// Outcome of checking one analytic mode against the discretized spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub n: u32,
    pub l: i32,
    pub root_index: usize,
    pub xi_star: f64,
    /// Coupling actually placed in the operator (differs from `xi_star` only
    /// when overridden).
    pub xi_used: f64,
    pub lambda_analytic: f64,
    pub lambda_numeric: f64,
    pub eigenindex: usize,
    pub node_count: usize,
    pub abs_error: f64,
    pub richardson_error_estimate: f64,
    pub convergence_ratio: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    /// Relative tolerance on `Λ`.
    pub tolerance: f64,
    /// Replaces the coupling placed in the operator.
    pub xi_override: Option<f64>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            tolerance: DEFAULT_TOLERANCE,
            xi_override: None,
        }
    }
}

/// Nodes of the terminated polynomial state of `mode` on `r > 0`.
pub fn mode_node_count(mode: &QuantizedMode, r_max: f64, samples: usize) -> Result<usize> {
    let series = mode.series();
    let s = RadialSamples::uniform(&series, mode.n as usize, r_max, samples)?;
    Ok(heun::node_count(&s))
}

pub fn verify_mode(mode: &QuantizedMode, grid: &GridSpec) -> Result<VerificationReport> {
    verify_mode_with(mode, grid, &VerifyOptions::default())
}

/// Places `Λ = 2n + 2 + 2|l|` in the numerical spectrum at coupling `ξ*`.
///
/// Passes when the extrapolated eigenvalue nearest the analytic one is within
/// tolerance and its index equals the node count of the polynomial state.
pub fn verify_mode_with(mode: &QuantizedMode, grid: &GridSpec, opts: &VerifyOptions) -> Result<VerificationReport> {
    let target = mode.scaled_eigenvalue();
    let min_r = target.sqrt() + 5.0;
    if grid.r_max < min_r {
        return Err(Error::InvalidGrid(format!(
            "r_max = {} is below sqrt(Lambda) + 5 = {min_r}",
            grid.r_max
        )));
    }
    let nodes = mode_node_count(mode, grid.r_max, 2 * grid.n_points + 1)?;
    let xi = opts.xi_override.unwrap_or(mode.xi_star);
    let seq = GridSequence::compute(mode.l_abs(), xi, grid, nodes + 3)?;
    let (index, lambda_numeric) = (0..seq.fine.len())
        .map(|i| (i, seq.extrapolated(i)))
        .min_by(|a, b| (a.1 - target).abs().total_cmp(&(b.1 - target).abs()))
        .expect("at least one eigenvalue");
    let tolerance = opts.tolerance * target;
    let abs_error = (lambda_numeric - target).abs();
    if abs_error > 10.0 * tolerance {
        return Err(Error::NoMatchingEigenvalue {
            target,
            nearest: lambda_numeric,
            index,
        });
    }
    Ok(VerificationReport {
        n: mode.n,
        l: mode.l,
        root_index: mode.root_index,
        xi_star: mode.xi_star,
        xi_used: xi,
        lambda_analytic: target,
        lambda_numeric,
        eigenindex: index,
        node_count: nodes,
        abs_error,
        richardson_error_estimate: seq.error_estimate(index),
        convergence_ratio: seq.convergence_ratio(index),
        tolerance,
        passed: abs_error <= tolerance && index == nodes,
    })
}

/// Richardson-extrapolated lowest `k` eigenvalues at `ξ = 0`.
pub fn oscillator_spectrum(l_abs: u32, grid: &GridSpec, k: usize) -> Result<Vec<f64>> {
    let seq = GridSequence::compute(l_abs, 0.0, grid, k)?;
    Ok((0..k).map(|i| seq.extrapolated(i)).collect())
}

/// Exact `Λ` of the `k`-th state (0-based) at `ξ = 0`: `4k + 2|l| + 2`.
pub fn oscillator_exact(l_abs: u32, k: usize) -> f64 {
    (4 * k) as f64 + 2.0 * f64::from(l_abs) + 2.0
}
