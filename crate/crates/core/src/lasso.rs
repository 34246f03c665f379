//! Gaussian lasso and elastic net by cyclic coordinate descent.
//!
//! Objective: `½‖y - Xβ‖² + ½λ₂‖β‖² + λ₁‖β‖₁`. Paths use the mixing
//! parametrization `λ₁ = αλ`, `λ₂ = (1-α)λ` unless a fixed ridge level is
//! requested.

use crate::coef::Coefficients;
use nalgebra::{DMatrix, DVector};

use crate::design::{dot, DesignMatrix, ResponseVector};
use crate::error::{Error, Result};
use crate::grid::{make_grid, GridSpacing, LambdaGrid};
use crate::path::{run_path, KktReport, PathProblem, PathSolution, SolveStats, Strategy};
use crate::screening::{self, ScreenMask};

/// Solver settings shared by every pathwise solver.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Convergence threshold on the largest coefficient change in a sweep.
    pub cd_tolerance: f64,
    pub max_sweeps: usize,
    /// KKT tolerance, relative to the penalty level.
    pub kkt_tolerance: f64,
    pub grid_size: usize,
    /// `λmin / λmax`.
    pub grid_ratio: f64,
    pub spacing: GridSpacing,
    pub strategy: Strategy,
    /// Elastic-net mixing parameter; 1 is the lasso.
    pub alpha: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            cd_tolerance: 1e-8,
            max_sweeps: 100_000,
            kkt_tolerance: 1e-7,
            grid_size: 100,
            grid_ratio: 1e-3,
            spacing: GridSpacing::Log,
            strategy: Strategy::Combined,
            alpha: 1.0,
        }
    }
}

impl SolverConfig {
    /// Defaults, with the shorter grid ratio used when `p > n`.
    pub fn for_shape(n: usize, p: usize) -> Self {
        let mut cfg = SolverConfig::default();
        if p > n {
            cfg.grid_ratio = 1e-2;
        }
        cfg
    }

    pub fn with_strategy(mut self, strategy: Strategy) -> Self {
        self.strategy = strategy;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.cd_tolerance > 0.0 && self.kkt_tolerance > 0.0) {
            return Err(Error::InvalidConfig("tolerances must be positive".into()));
        }
        if !(self.grid_ratio > 0.0 && self.grid_ratio < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "grid ratio must lie in (0, 1), got {}",
                self.grid_ratio
            )));
        }
        if self.grid_size == 0 || self.max_sweeps == 0 {
            return Err(Error::InvalidConfig(
                "grid size and max sweeps must be at least 1".into(),
            ));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "alpha must lie in (0, 1], got {}",
                self.alpha
            )));
        }
        Ok(())
    }
}

/// How a grid value maps to the `(λ₁, λ₂)` pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Penalty {
    /// `(αλ, (1-α)λ)`.
    Mixing { alpha: f64 },
    /// `(λ, λ₂)` with `λ₂` held fixed along the path.
    FixedRidge { lambda2: f64 },
}

impl Penalty {
    pub fn split(&self, lambda: f64) -> (f64, f64) {
        match *self {
            Penalty::Mixing { alpha } => (alpha * lambda, (1.0 - alpha) * lambda),
            Penalty::FixedRidge { lambda2 } => (lambda, lambda2),
        }
    }
}

#[inline]
pub fn soft_threshold(z: f64, gamma: f64) -> f64 {
    if z > gamma {
        z - gamma
    } else if z < -gamma {
        z + gamma
    } else {
        0.0
    }
}

/// Result of a coordinate-descent solve. When `converged` is false the
/// coefficients are the last iterate.
#[derive(Debug, Clone)]
pub struct CdFit {
    pub coefs: Coefficients,
    pub sweeps: usize,
    pub converged: bool,
}

impl CdFit {
    /// Turns a non-converged fit into [`Error::MaxSweepsExceeded`].
    pub fn require_converged(self) -> Result<CdFit> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::MaxSweepsExceeded {
                sweeps: self.sweeps,
            })
        }
    }
}

/// Coefficients and residual maintained across coordinate updates.
const POLISH_FIRST_TRY: usize = 16;

#[derive(Debug, Clone)]
pub(crate) struct GaussianState {
    pub beta: Vec<f64>,
    pub resid: Vec<f64>,
    norm_sq: Vec<f64>,
}

impl GaussianState {
    pub fn new(x: &DesignMatrix, y: &[f64], warm: &Coefficients) -> Self {
        let mut resid = y.to_vec();
        let mut beta = vec![0.0; x.n_cols()];
        for (j, b) in warm.iter() {
            beta[j] = b;
            x.col_axpy(j, -b, &mut resid);
        }
        let norm_sq = x.col_norms().iter().map(|n| n * n).collect();
        GaussianState {
            beta,
            resid,
            norm_sq,
        }
    }

    fn resid_sum(&self, x: &DesignMatrix) -> f64 {
        if x.is_sparse() {
            self.resid.iter().sum()
        } else {
            0.0
        }
    }

    /// One cyclic pass over `idx`; returns the largest coefficient change.
    fn sweep(&mut self, x: &DesignMatrix, idx: &[usize], l1: f64, l2: f64) -> f64 {
        let mut rsum = self.resid_sum(x);
        let mut dmax = 0.0_f64;
        for &j in idx {
            let xn2 = self.norm_sq[j];
            if xn2 == 0.0 {
                continue;
            }
            let old = self.beta[j];
            let g = x.col_dot_with_sum(j, &self.resid, rsum) + xn2 * old;
            let new = soft_threshold(g, l1) / (xn2 + l2);
            if new != old {
                x.col_axpy(j, old - new, &mut self.resid);
                self.beta[j] = new;
                dmax = dmax.max((new - old).abs());
                if x.is_sparse() {
                    rsum = self.resid.iter().sum();
                }
            }
        }
        dmax
    }

    /// KKT excess of coordinate `j` given its gradient `x_j^T r`.
    fn excess(&self, j: usize, grad: f64, l1: f64, l2: f64) -> f64 {
        let b = self.beta[j];
        if b == 0.0 {
            grad.abs() - l1
        } else {
            (grad - l2 * b - l1 * b.signum()).abs()
        }
    }

    fn restricted_kkt_ok(&self, x: &DesignMatrix, idx: &[usize], l1: f64, l2: f64, tol: f64) -> bool {
        let rsum = self.resid_sum(x);
        idx.iter().all(|&j| {
            self.norm_sq[j] == 0.0
                || self.excess(j, x.col_dot_with_sum(j, &self.resid, rsum), l1, l2) <= tol * l1
        })
    }

    /// Cyclic coordinate descent over `eligible`, alternating full sweeps with
    /// sweeps over the current nonzeros. Convergence additionally requires the
    /// restricted KKT conditions to hold at `kkt_tol`.
    pub fn solve(
        &mut self,
        x: &DesignMatrix,
        eligible: &[usize],
        l1: f64,
        l2: f64,
        cfg: &SolverConfig,
    ) -> SolveStats {
        let mut sweeps = 0;
        while sweeps < cfg.max_sweeps {
            let dmax = self.sweep(x, eligible, l1, l2);
            sweeps += 1;
            if dmax < cfg.cd_tolerance {
                if self.restricted_kkt_ok(x, eligible, l1, l2, cfg.kkt_tolerance) {
                    let _ = self.polish(x, eligible, l1, l2, cfg.kkt_tolerance);
                    return SolveStats {
                        sweeps,
                        converged: true,
                    };
                }
                continue;
            }
            let active: Vec<usize> = eligible
                .iter()
                .copied()
                .filter(|&j| self.beta[j] != 0.0)
                .collect();
            let mut inner = 0;
            let mut next_polish = POLISH_FIRST_TRY;
            while sweeps < cfg.max_sweeps {
                let d = self.sweep(x, &active, l1, l2);
                sweeps += 1;
                inner += 1;
                if d < cfg.cd_tolerance {
                    break;
                }
                // slow convergence: try the exact active-set solution
                if inner == next_polish {
                    next_polish *= 2;
                    if self.polish(x, eligible, l1, l2, cfg.kkt_tolerance) {
                        return SolveStats {
                            sweeps,
                            converged: true,
                        };
                    }
                }
            }
        }
        SolveStats {
            sweeps,
            converged: false,
        }
    }

    /// Refines a converged iterate by solving the stationarity equations on
    /// the active set with signs held fixed. The refinement is kept only if
    /// it preserves the signs and the restricted KKT conditions; returns
    /// whether it was kept.
    fn polish(&mut self, x: &DesignMatrix, eligible: &[usize], l1: f64, l2: f64, tol: f64) -> bool {
        let active: Vec<usize> = eligible
            .iter()
            .copied()
            .filter(|&j| self.beta[j] != 0.0)
            .collect();
        let k = active.len();
        if k == 0 || (l2 == 0.0 && k >= x.n_rows()) {
            return false;
        }
        let cols: Vec<Vec<f64>> = active.iter().map(|&j| x.column(j)).collect();
        let mut gram = DMatrix::<f64>::zeros(k, k);
        for a in 0..k {
            for b in 0..=a {
                let v = dot(&cols[a], &cols[b]);
                gram[(a, b)] = v;
                gram[(b, a)] = v;
            }
        }
        // rhs = X_Aᵀy - λ₁s = X_Aᵀr + X_AᵀX_A β_A - λ₁s
        let beta_a = DVector::from_iterator(k, active.iter().map(|&j| self.beta[j]));
        let xtr = DVector::from_iterator(k, cols.iter().map(|c| dot(c, &self.resid)));
        let signs = DVector::from_iterator(k, active.iter().map(|&j| self.beta[j].signum()));
        let rhs = xtr + &gram * &beta_a - signs.scale(l1);
        for a in 0..k {
            gram[(a, a)] += l2;
        }
        let Some(chol) = gram.cholesky() else {
            return false;
        };
        let refined = chol.solve(&rhs);
        let consistent = refined
            .iter()
            .zip(signs.iter())
            .all(|(b, s)| b.is_finite() && b * s > 0.0);
        if !consistent {
            return false;
        }
        let saved_beta = self.beta.clone();
        let saved_resid = self.resid.clone();
        for (a, &j) in active.iter().enumerate() {
            let d = refined[a] - self.beta[j];
            if d != 0.0 {
                for (r, c) in self.resid.iter_mut().zip(&cols[a]) {
                    *r -= d * c;
                }
                self.beta[j] = refined[a];
            }
        }
        if !self.restricted_kkt_ok(x, eligible, l1, l2, tol) {
            self.beta = saved_beta;
            self.resid = saved_resid;
            return false;
        }
        true
    }

    pub fn objective(&self, l1: f64, l2: f64) -> f64 {
        let rss: f64 = self.resid.iter().map(|r| r * r).sum();
        let l1n: f64 = self.beta.iter().map(|b| b.abs()).sum();
        let l2n: f64 = self.beta.iter().map(|b| b * b).sum();
        0.5 * rss + l1 * l1n + 0.5 * l2 * l2n
    }

    pub fn coefficients(&self) -> Coefficients {
        Coefficients::from_dense(&self.beta)
    }
}

/// Solves the elastic net restricted to the columns in `eligible`, starting
/// from `warm`. Coefficients outside `eligible` are held at their warm values.
pub fn coord_descent(
    x: &DesignMatrix,
    y: &ResponseVector,
    lambda1: f64,
    lambda2: f64,
    warm: &Coefficients,
    eligible: &[usize],
    config: &SolverConfig,
) -> Result<CdFit> {
    x.check_rows(y.len())?;
    if warm.n_predictors() != x.n_cols() {
        return Err(Error::DimensionMismatch {
            expected: x.n_cols(),
            found: warm.n_predictors(),
        });
    }
    if let Some(&bad) = eligible.iter().find(|&&j| j >= x.n_cols()) {
        return Err(Error::DimensionMismatch {
            expected: x.n_cols(),
            found: bad + 1,
        });
    }
    let mut state = GaussianState::new(x, y.values(), warm);
    let stats = state.solve(x, eligible, lambda1, lambda2, config);
    Ok(CdFit {
        coefs: state.coefficients(),
        sweeps: stats.sweeps,
        converged: stats.converged,
    })
}

/// Elastic-net objective `½‖y - Xβ‖² + ½λ₂‖β‖² + λ₁‖β‖₁`.
pub fn objective(
    x: &DesignMatrix,
    y: &ResponseVector,
    beta: &Coefficients,
    lambda1: f64,
    lambda2: f64,
) -> Result<f64> {
    let r = crate::design::residual(x, y, beta)?;
    let rss: f64 = r.iter().map(|v| v * v).sum();
    Ok(0.5 * rss + lambda1 * beta.l1_norm() + 0.5 * lambda2 * beta.l2_norm_sq())
}

/// Checks the elastic-net KKT conditions for the predictors in `scope`.
///
/// Inactive `j` violates when `|x_j^T r| > λ₁(1 + tol)`; active `j` violates
/// when `|x_j^T r - λ₂β_j - λ₁·sign(β_j)| > λ₁·tol`.
pub fn kkt_check(
    x: &DesignMatrix,
    y: &ResponseVector,
    beta: &Coefficients,
    lambda1: f64,
    lambda2: f64,
    scope: &[usize],
    kkt_tolerance: f64,
) -> Result<KktReport> {
    let r = crate::design::residual(x, y, beta)?;
    let grads = x.inner_products_subset(&r, scope);
    let mut b = KktReport::builder(lambda1, kkt_tolerance);
    for (&j, &g) in scope.iter().zip(&grads) {
        let bj = beta.get(j);
        let excess = if bj == 0.0 {
            g.abs() - lambda1
        } else {
            (g - lambda2 * bj - lambda1 * bj.signum()).abs()
        };
        b.record(j, excess);
    }
    Ok(b.finish())
}

/// Largest penalty on the mixing path: `max_j |x_j^T y| / α`.
pub fn path_lambda_max(x: &DesignMatrix, y: &ResponseVector, alpha: f64) -> Result<f64> {
    Ok(crate::design::lambda_max(x, y)? / alpha)
}

/// Grid from the configured size and ratio, anchored at the path's `λmax`.
pub fn default_grid(x: &DesignMatrix, y: &ResponseVector, config: &SolverConfig) -> Result<LambdaGrid> {
    let lmax = path_lambda_max(x, y, config.alpha)?;
    make_grid(lmax, config.grid_size, config.grid_ratio, config.spacing)
}

pub(crate) struct GaussianPath<'a> {
    x: &'a DesignMatrix,
    penalty: Penalty,
    cfg: &'a SolverConfig,
    state: GaussianState,
}

impl<'a> GaussianPath<'a> {
    pub fn new(x: &'a DesignMatrix, y: &'a [f64], penalty: Penalty, cfg: &'a SolverConfig) -> Self {
        GaussianPath {
            x,
            penalty,
            cfg,
            state: GaussianState::new(x, y, &Coefficients::zeros(x.n_cols())),
        }
    }
}

impl PathProblem for GaussianPath<'_> {
    fn n_units(&self) -> usize {
        self.x.n_cols()
    }

    fn all_scores(&self) -> Vec<f64> {
        let all: Vec<usize> = (0..self.x.n_cols()).collect();
        self.unit_scores(&all)
    }

    fn unit_scores(&self, units: &[usize]) -> Vec<f64> {
        self.x
            .inner_products_subset(&self.state.resid, units)
            .into_iter()
            .map(f64::abs)
            .collect()
    }

    fn penalty_level(&self, lambda: f64) -> f64 {
        self.penalty.split(lambda).0
    }

    fn strong_mask(&self, scores: &[f64], lambda: f64, lambda_prev: f64) -> ScreenMask {
        match self.penalty {
            Penalty::Mixing { alpha } if alpha < 1.0 => {
                screening::strong_en(scores, lambda, lambda_prev, alpha, true)
            }
            _ => screening::strong_sequential(scores, lambda, lambda_prev),
        }
    }

    fn solve(&mut self, eligible: &[usize], lambda: f64) -> SolveStats {
        let (l1, l2) = self.penalty.split(lambda);
        self.state.solve(self.x, eligible, l1, l2, self.cfg)
    }

    fn check_all(&self, lambda: f64, tol: f64) -> (KktReport, Vec<f64>) {
        let (l1, l2) = self.penalty.split(lambda);
        let grads = self.x.inner_products(&self.state.resid).expect("residual length");
        let mut b = KktReport::builder(l1, tol);
        for (j, &g) in grads.iter().enumerate() {
            b.record(j, self.state.excess(j, g, l1, l2));
        }
        (b.finish(), grads.into_iter().map(f64::abs).collect())
    }

    fn unit_active(&self, unit: usize) -> bool {
        self.state.beta[unit] != 0.0
    }

    fn snapshot(&self) -> Coefficients {
        self.state.coefficients()
    }

    fn objective(&self, lambda: f64) -> f64 {
        let (l1, l2) = self.penalty.split(lambda);
        self.state.objective(l1, l2)
    }
}

fn check_path_inputs(x: &DesignMatrix, y: &ResponseVector, config: &SolverConfig) -> Result<()> {
    config.validate()?;
    x.check_rows(y.len())
}

/// Lasso / elastic-net path in the mixing parametrization with `config.alpha`.
pub fn solve_path(
    x: &DesignMatrix,
    y: &ResponseVector,
    grid: &LambdaGrid,
    config: &SolverConfig,
) -> Result<PathSolution> {
    solve_path_with_penalty(x, y, grid, config, Penalty::Mixing { alpha: config.alpha })
}

/// Pathwise solve under an explicit penalty parametrization.
pub fn solve_path_with_penalty(
    x: &DesignMatrix,
    y: &ResponseVector,
    grid: &LambdaGrid,
    config: &SolverConfig,
    penalty: Penalty,
) -> Result<PathSolution> {
    check_path_inputs(x, y, config)?;
    let mut problem = GaussianPath::new(x, y.values(), penalty, config);
    Ok(run_path(&mut problem, grid, config.strategy, config.kkt_tolerance))
}

/// Coordinate descent for `½βᵀVβ - bᵀβ + λ‖β‖₁` given the Gram matrix `V`
/// (row-major, `k × k`). Coordinates with `free[j] == false` stay at zero.
pub(crate) fn gram_coord_descent(
    v: &[f64],
    b: &[f64],
    lambda: f64,
    beta: &mut [f64],
    free: &[bool],
    tol: f64,
    max_sweeps: usize,
) -> SolveStats {
    let k = b.len();
    // grad_j = b_j - (Vβ)_j
    let mut grad: Vec<f64> = (0..k)
        .map(|j| b[j] - (0..k).map(|l| v[j * k + l] * beta[l]).sum::<f64>())
        .collect();
    for j in 0..k {
        if !free[j] && beta[j] != 0.0 {
            let d = -beta[j];
            beta[j] = 0.0;
            for l in 0..k {
                grad[l] -= v[l * k + j] * d;
            }
        }
    }
    let mut sweeps = 0;
    while sweeps < max_sweeps {
        sweeps += 1;
        let mut dmax = 0.0_f64;
        for j in 0..k {
            if !free[j] {
                continue;
            }
            let vjj = v[j * k + j];
            let old = beta[j];
            let new = soft_threshold(grad[j] + vjj * old, lambda) / vjj;
            if new != old {
                let d = new - old;
                beta[j] = new;
                for l in 0..k {
                    grad[l] -= v[l * k + j] * d;
                }
                dmax = dmax.max(d.abs());
            }
        }
        if dmax < tol {
            return SolveStats {
                sweeps,
                converged: true,
            };
        }
    }
    SolveStats {
        sweeps,
        converged: false,
    }
}
