//! Graphical lasso with an unpenalized diagonal.
//!
//! Maximizes `log det Θ - tr(SΘ) - λ Σ_{i≠j} |Θ_ij|` by cycling over rows of
//! the covariance estimate `W = Θ⁻¹`: each row update is a lasso in Gram
//! form, `min ½βᵀW₁₁β - s₁₂ᵀβ + λ‖β‖₁`, followed by `w₁₂ = W₁₁β`.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::grid::{make_grid, GridSpacing, LambdaGrid};
use crate::lasso::gram_coord_descent;
use crate::screening;

/// A precision matrix and its inverse.
#[derive(Debug, Clone, PartialEq)]
pub struct PrecisionPair {
    pub theta: DMatrix<f64>,
    pub sigma: DMatrix<f64>,
}

impl PrecisionPair {
    /// The solution for `λ ≥ max_{i≠j}|S_ij|`: `Σ = diag(S)`, `Θ = diag(1/S_ii)`.
    pub fn diagonal(s: &DMatrix<f64>) -> Self {
        let p = s.nrows();
        PrecisionPair {
            theta: DMatrix::from_fn(p, p, |i, j| if i == j { 1.0 / s[(i, i)] } else { 0.0 }),
            sigma: DMatrix::from_fn(p, p, |i, j| if i == j { s[(i, i)] } else { 0.0 }),
        }
    }

    pub fn dim(&self) -> usize {
        self.theta.nrows()
    }

    /// `max |(ΘΣ - I)_ij|`.
    pub fn inverse_error(&self) -> f64 {
        let prod = &self.theta * &self.sigma;
        let p = self.dim();
        let mut worst = 0.0_f64;
        for i in 0..p {
            for j in 0..p {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((prod[(i, j)] - target).abs());
            }
        }
        worst
    }

    /// Number of nonzero off-diagonal entries in the upper triangle of `Θ`.
    pub fn n_edges(&self) -> usize {
        let p = self.dim();
        (0..p)
            .flat_map(|i| (i + 1..p).map(move |j| (i, j)))
            .filter(|&(i, j)| self.theta[(i, j)] != 0.0)
            .count()
    }

    /// Rows whose off-diagonal entries of `Θ` are all zero.
    pub fn isolated_rows(&self) -> Vec<usize> {
        let p = self.dim();
        (0..p)
            .filter(|&i| (0..p).all(|j| j == i || self.theta[(i, j)] == 0.0))
            .collect()
    }
}

/// Which screening rule the glasso path applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub enum GlassoScreening {
    /// Discard whole rows and columns.
    #[default]
    RowWise,
    /// Discard individual off-diagonal entries.
    Elementwise,
    None,
}

impl GlassoScreening {
    pub fn name(self) -> &'static str {
        match self {
            GlassoScreening::RowWise => "row",
            GlassoScreening::Elementwise => "element",
            GlassoScreening::None => "none",
        }
    }
}

impl fmt::Display for GlassoScreening {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GlassoScreening {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "row" | "rowwise" | "row_wise" => Ok(GlassoScreening::RowWise),
            "element" | "elementwise" => Ok(GlassoScreening::Elementwise),
            "none" => Ok(GlassoScreening::None),
            other => Err(Error::InvalidConfig(format!(
                "unknown glasso screening '{other}'; valid: row, element, none"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GlassoConfig {
    /// Convergence threshold on the largest change in `Σ` over a full cycle.
    pub tolerance: f64,
    pub max_cycles: usize,
    /// Convergence threshold for each row's coordinate descent.
    pub inner_tolerance: f64,
    pub inner_max_sweeps: usize,
    /// Relative tolerance of the subgradient check used to repair screening.
    pub kkt_tolerance: f64,
    pub grid_size: usize,
    pub grid_ratio: f64,
    pub spacing: GridSpacing,
}

impl Default for GlassoConfig {
    fn default() -> Self {
        GlassoConfig {
            tolerance: 1e-6,
            max_cycles: 1_000,
            inner_tolerance: 1e-10,
            inner_max_sweeps: 100_000,
            kkt_tolerance: 1e-4,
            grid_size: 50,
            grid_ratio: 0.1,
            spacing: GridSpacing::Log,
        }
    }
}

/// Subgradient residual of a glasso solution.
#[derive(Debug, Clone, PartialEq)]
pub struct GlassoCheck {
    /// Largest off-diagonal residual: `|σ_ij - s_ij - λ·sign(Θ_ij)|` on the
    /// support, `(|σ_ij - s_ij| - λ)₊` off it.
    pub max_offdiag_residual: f64,
    /// Largest `|σ_ii - s_ii|`.
    pub max_diag_residual: f64,
    /// Off-diagonal pairs `(i, j)`, `i < j`, with `Θ_ij = 0` and
    /// `|σ_ij - s_ij| > λ(1 + tol)`.
    pub violations: Vec<(usize, usize)>,
}

impl GlassoCheck {
    pub fn holds(&self, lambda: f64, tol: f64) -> bool {
        self.max_offdiag_residual <= tol * lambda && self.max_diag_residual <= tol * lambda.max(1.0)
    }
}

pub fn subgradient_check(s: &DMatrix<f64>, pair: &PrecisionPair, lambda: f64, tol: f64) -> GlassoCheck {
    let p = s.nrows();
    let mut off = 0.0_f64;
    let mut diag = 0.0_f64;
    let mut violations = Vec::new();
    for i in 0..p {
        diag = diag.max((pair.sigma[(i, i)] - s[(i, i)]).abs());
        for j in i + 1..p {
            let d = pair.sigma[(i, j)] - s[(i, j)];
            let t = pair.theta[(i, j)];
            let resid = if t != 0.0 {
                (d - lambda * t.signum()).abs()
            } else {
                (d.abs() - lambda).max(0.0)
            };
            off = off.max(resid);
            if t == 0.0 && d.abs() > lambda * (1.0 + tol) {
                violations.push((i, j));
            }
        }
    }
    GlassoCheck {
        max_offdiag_residual: off,
        max_diag_residual: diag,
        violations,
    }
}

/// Penalized log-likelihood `log det Θ - tr(SΘ) - λ Σ_{i≠j}|Θ_ij|`
/// (`-∞` when `Θ` is not positive definite).
pub fn glasso_objective(s: &DMatrix<f64>, theta: &DMatrix<f64>, lambda: f64) -> f64 {
    let Some(chol) = theta.clone().cholesky() else {
        return f64::NEG_INFINITY;
    };
    let logdet: f64 = chol.l().diagonal().iter().map(|d| 2.0 * d.ln()).sum();
    let p = s.nrows();
    let mut tr = 0.0;
    let mut pen = 0.0;
    for i in 0..p {
        for j in 0..p {
            tr += s[(i, j)] * theta[(j, i)];
            if i != j {
                pen += theta[(i, j)].abs();
            }
        }
    }
    logdet - tr - lambda * pen
}

/// `max_{i≠j} |S_ij|`.
pub fn glasso_lambda_max(s: &DMatrix<f64>) -> f64 {
    let p = s.nrows();
    let mut m = 0.0_f64;
    for i in 0..p {
        for j in 0..p {
            if i != j {
                m = m.max(s[(i, j)].abs());
            }
        }
    }
    m
}

fn validate_covariance(s: &DMatrix<f64>) -> Result<()> {
    let p = s.nrows();
    if s.ncols() != p {
        return Err(Error::DimensionMismatch {
            expected: p,
            found: s.ncols(),
        });
    }
    if s.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonPsdInput("matrix has non-finite entries".into()));
    }
    let scale = s.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    for i in 0..p {
        if s[(i, i)] <= 0.0 {
            return Err(Error::NonPsdInput(format!(
                "diagonal entry {} is not positive",
                i + 1
            )));
        }
        for j in 0..i {
            if (s[(i, j)] - s[(j, i)]).abs() > 1e-10 * scale {
                return Err(Error::NonPsdInput(format!(
                    "matrix is not symmetric at ({}, {})",
                    i + 1,
                    j + 1
                )));
            }
        }
    }
    let eig = SymmetricEigen::new(s.clone());
    let min = eig.eigenvalues.iter().fold(f64::INFINITY, |m, v| m.min(*v));
    if min < -1e-8 * scale * p as f64 {
        return Err(Error::NonPsdInput(format!(
            "smallest eigenvalue is {min:.3e}"
        )));
    }
    Ok(())
}

/// Empirical covariance `XᵀX/N` of the centered columns of an `N × p`
/// row-major data set.
pub fn empirical_covariance(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let n = rows.len();
    if n == 0 {
        return Err(Error::InvalidConfig("no observations".into()));
    }
    let p = rows[0].len();
    if let Some(bad) = rows.iter().find(|r| r.len() != p) {
        return Err(Error::DimensionMismatch {
            expected: p,
            found: bad.len(),
        });
    }
    let data = DMatrix::from_fn(n, p, |i, j| rows[i][j]);
    let means: Vec<f64> = (0..p).map(|j| data.column(j).sum() / n as f64).collect();
    let centered = DMatrix::from_fn(n, p, |i, j| data[(i, j)] - means[j]);
    Ok(centered.transpose() * centered / n as f64)
}

/// Row solver state: `W` plus the row regression coefficients `B`, where
/// `B[i]` holds the coefficients of row `i` indexed over `j ≠ i`.
struct Solver<'a> {
    s: &'a DMatrix<f64>,
    w: DMatrix<f64>,
    b: Vec<Vec<f64>>,
    /// `free[i][j]`: whether `Θ_ij` may be nonzero.
    free: Vec<Vec<bool>>,
}

fn skip(i: usize, k: usize) -> usize {
    if k < i {
        k
    } else {
        k + 1
    }
}

impl<'a> Solver<'a> {
    fn new(s: &'a DMatrix<f64>, warm: &PrecisionPair) -> Self {
        let p = s.nrows();
        let mut w = warm.sigma.clone();
        for i in 0..p {
            w[(i, i)] = s[(i, i)];
        }
        let b = (0..p)
            .map(|i| {
                let t22 = warm.theta[(i, i)];
                (0..p - 1)
                    .map(|k| -warm.theta[(skip(i, k), i)] / t22)
                    .collect()
            })
            .collect();
        Solver {
            s,
            w,
            b,
            free: vec![vec![true; p]; p],
        }
    }

    fn run(&mut self, lambda: f64, cfg: &GlassoConfig) -> Result<usize> {
        let p = self.s.nrows();
        if p == 1 {
            return Ok(0);
        }
        let m = p - 1;
        let mut v = vec![0.0; m * m];
        let mut rhs = vec![0.0; m];
        let mut mask = vec![true; m];
        for cycle in 1..=cfg.max_cycles {
            let mut change = 0.0_f64;
            for i in 0..p {
                for a in 0..m {
                    let ia = skip(i, a);
                    rhs[a] = self.s[(ia, i)];
                    mask[a] = self.free[i][ia];
                    for c in 0..m {
                        v[a * m + c] = self.w[(ia, skip(i, c))];
                    }
                }
                let beta = &mut self.b[i];
                let stats = gram_coord_descent(
                    &v,
                    &rhs,
                    lambda,
                    beta,
                    &mask,
                    cfg.inner_tolerance,
                    cfg.inner_max_sweeps,
                );
                if !stats.converged {
                    return Err(Error::NotConverged {
                        iterations: cycle,
                    });
                }
                for a in 0..m {
                    let w12: f64 = (0..m).map(|c| v[a * m + c] * beta[c]).sum();
                    let ia = skip(i, a);
                    change = change.max((w12 - self.w[(ia, i)]).abs());
                    self.w[(ia, i)] = w12;
                    self.w[(i, ia)] = w12;
                }
            }
            if change < cfg.tolerance {
                return Ok(cycle);
            }
        }
        Err(Error::NotConverged {
            iterations: cfg.max_cycles,
        })
    }

    fn pair(&self) -> Result<PrecisionPair> {
        let p = self.s.nrows();
        let mut theta = DMatrix::zeros(p, p);
        for i in 0..p {
            let beta = &self.b[i];
            let w12b: f64 = (0..p - 1).map(|a| self.w[(skip(i, a), i)] * beta[a]).sum();
            let t22 = 1.0 / (self.w[(i, i)] - w12b);
            theta[(i, i)] = t22;
            for a in 0..p - 1 {
                theta[(skip(i, a), i)] = -beta[a] * t22;
            }
        }
        let sym = (&theta + theta.transpose()) * 0.5;
        if sym.clone().cholesky().is_none() {
            return Err(Error::NotConverged { iterations: 0 });
        }
        Ok(PrecisionPair {
            theta: sym,
            sigma: self.w.clone(),
        })
    }
}

/// Solves the graphical lasso at `lambda`, optionally warm-started.
pub fn graphical_lasso(
    s: &DMatrix<f64>,
    lambda: f64,
    warm: Option<&PrecisionPair>,
    config: &GlassoConfig,
) -> Result<PrecisionPair> {
    validate_covariance(s)?;
    if !(lambda > 0.0) {
        return Err(Error::InvalidConfig(format!("lambda must be positive, got {lambda}")));
    }
    let start = match warm {
        Some(w) if w.dim() == s.nrows() => w.clone(),
        Some(w) => {
            return Err(Error::DimensionMismatch {
                expected: s.nrows(),
                found: w.dim(),
            })
        }
        None => PrecisionPair::diagonal(s),
    };
    let mut solver = Solver::new(s, &start);
    solver.run(lambda, config)?;
    solver.pair()
}

/// One grid point of a glasso path.
#[derive(Debug, Clone)]
pub struct GlassoStep {
    pub lambda: f64,
    pub pair: PrecisionPair,
    /// Rows discarded by the sequential row rule.
    pub discarded_rows: usize,
    /// Rows the global rule (reference `λmax`) would discard.
    pub discarded_rows_global: usize,
    /// Off-diagonal pairs `(i < j)` held at zero by the screening in use.
    pub discarded_elements: usize,
    /// Screened pairs found nonzero in the final solution.
    pub rule_violations: usize,
    /// Pairs released by the subgradient check.
    pub repairs: usize,
    pub cycles: usize,
    pub check: GlassoCheck,
}

#[derive(Debug, Clone)]
pub struct GlassoPath {
    pub lambda_max: f64,
    pub screening: GlassoScreening,
    pub steps: Vec<GlassoStep>,
}

impl GlassoPath {
    /// Largest `‖Θ_a - Θ_b‖_∞` (entrywise) over the shared grid.
    pub fn max_theta_deviation(&self, other: &GlassoPath) -> f64 {
        assert_eq!(self.steps.len(), other.steps.len(), "paths differ in length");
        self.steps
            .iter()
            .zip(&other.steps)
            .map(|(a, b)| (&a.pair.theta - &b.pair.theta).amax())
            .fold(0.0, f64::max)
    }
}

pub fn default_glasso_grid(s: &DMatrix<f64>, config: &GlassoConfig) -> Result<LambdaGrid> {
    let lmax = glasso_lambda_max(s);
    if lmax == 0.0 {
        return Err(Error::InvalidConfig(
            "covariance has no off-diagonal signal".into(),
        ));
    }
    make_grid(lmax, config.grid_size, config.grid_ratio, config.spacing)
}

fn row_vectors(m: &DMatrix<f64>, i: usize) -> Vec<f64> {
    (0..m.nrows()).filter(|&j| j != i).map(|j| m[(i, j)]).collect()
}

/// Glasso path with sequential screening. Screened entries are held at zero
/// during the blockwise solve; the subgradient check then releases any
/// screened pair that violates `|σ_ij - s_ij| ≤ λ` and the solve is repeated.
pub fn solve_glasso_path(
    s: &DMatrix<f64>,
    grid: &LambdaGrid,
    config: &GlassoConfig,
    rule: GlassoScreening,
) -> Result<GlassoPath> {
    validate_covariance(s)?;
    let p = s.nrows();
    let lambda_max = grid.lambda_max();
    let mut prev = PrecisionPair::diagonal(s);
    let mut steps = Vec::with_capacity(grid.len());
    for (k, &lambda) in grid.values().iter().enumerate() {
        let lambda_prev = grid.previous(k);
        let mut free = vec![vec![true; p]; p];
        let mut discarded_rows = 0;
        let mut discarded_rows_global = 0;
        for i in 0..p {
            let s_row = row_vectors(s, i);
            let sig_row = row_vectors(&prev.sigma, i);
            let zero = vec![0.0; p - 1];
            if screening::glasso_row_rule(&zero, &s_row, lambda, lambda_max) {
                discarded_rows_global += 1;
            }
            if screening::glasso_row_rule(&sig_row, &s_row, lambda, lambda_prev) {
                discarded_rows += 1;
                if rule == GlassoScreening::RowWise {
                    for j in 0..p {
                        if j != i {
                            free[i][j] = false;
                            free[j][i] = false;
                        }
                    }
                }
            }
        }
        if rule == GlassoScreening::Elementwise {
            let sig: Vec<f64> = prev.sigma.transpose().iter().copied().collect();
            let sv: Vec<f64> = s.transpose().iter().copied().collect();
            let mask = screening::glasso_element_rule(&sig, &sv, p, lambda, lambda_prev);
            for i in 0..p {
                for j in 0..p {
                    if !mask.keep[i * p + j] {
                        free[i][j] = false;
                        free[j][i] = false;
                    }
                }
            }
        }
        let screened = free.clone();
        let discarded_elements = (0..p)
            .flat_map(|i| (i + 1..p).map(move |j| (i, j)))
            .filter(|&(i, j)| !screened[i][j])
            .count();

        let mut solver = Solver::new(s, &prev);
        let mut cycles = 0;
        let mut repairs = 0;
        let (pair, check) = loop {
            solver.free = free.clone();
            cycles += solver.run(lambda, config)?;
            let pair = solver.pair()?;
            let check = subgradient_check(s, &pair, lambda, config.kkt_tolerance);
            let released: Vec<(usize, usize)> = check
                .violations
                .iter()
                .copied()
                .filter(|&(i, j)| !free[i][j])
                .collect();
            if released.is_empty() {
                break (pair, check);
            }
            repairs += released.len();
            for (i, j) in released {
                free[i][j] = true;
                free[j][i] = true;
            }
        };
        let rule_violations = (0..p)
            .flat_map(|i| (i + 1..p).map(move |j| (i, j)))
            .filter(|&(i, j)| !screened[i][j] && pair.theta[(i, j)] != 0.0)
            .count();
        prev = pair.clone();
        steps.push(GlassoStep {
            lambda,
            pair,
            discarded_rows,
            discarded_rows_global,
            discarded_elements,
            rule_violations,
            repairs,
            cycles,
            check,
        });
    }
    Ok(GlassoPath {
        lambda_max,
        screening: rule,
        steps,
    })
}
