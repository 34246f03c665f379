//! L1-penalized logistic regression.
//!
//! Objective: `-Σ[y_i log p_i + (1-y_i) log(1-p_i)] + λ‖β‖₁` with
//! `p_i = 1/(1 + exp(-β₀ - x_iᵀβ))` and an unpenalized intercept. Each outer
//! iteration forms the weighted least-squares approximation at the current
//! fit and solves it by coordinate descent.

use crate::coef::Coefficients;
use crate::design::{DesignMatrix, ResponseVector};
use crate::error::{Error, Result};
use crate::grid::{make_grid, LambdaGrid};
use crate::lasso::{soft_threshold, SolverConfig};
use crate::path::{run_path, KktReport, PathProblem, PathSolution, SolveStats};
use crate::screening::{self, ScreenMask};

/// Probability bounds used when forming the quadratic-approximation weights.
pub const PROB_CLAMP: f64 = 1e-5;
const MAX_HALVINGS: usize = 30;

/// A logistic fit: coefficients, intercept, fitted probabilities and the
/// penalized negative log-likelihood at the penalty it was fit for.
#[derive(Debug, Clone)]
pub struct LogisticState {
    pub beta: Coefficients,
    pub intercept: f64,
    pub probs: Vec<f64>,
    pub penalized_negloglik: f64,
}

impl LogisticState {
    /// Intercept-only model: `β = 0`, `β₀ = logit(ȳ)`, every `p_i = ȳ`.
    pub fn null(n_predictors: usize, y: &ResponseVector) -> Result<Self> {
        let fit = Fit::null(n_predictors, y)?;
        Ok(fit.to_state(0.0))
    }
}

/// Options specific to the logistic path.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LogisticOptions {
    /// Also apply the Gaussian sequential strong rule to each weighted
    /// least-squares subproblem.
    pub irls_screening: bool,
}

fn sigmoid(eta: f64) -> f64 {
    if eta >= 0.0 {
        1.0 / (1.0 + (-eta).exp())
    } else {
        let e = eta.exp();
        e / (1.0 + e)
    }
}

fn softplus(eta: f64) -> f64 {
    eta.max(0.0) + (-eta.abs()).exp().ln_1p()
}

fn negloglik(y: &[f64], eta: &[f64]) -> f64 {
    y.iter().zip(eta).map(|(&yi, &e)| softplus(e) - yi * e).sum()
}

fn check_binary(y: &ResponseVector) -> Result<f64> {
    if !y.is_binary() {
        for (i, &v) in y.values().iter().enumerate() {
            if v != 0.0 && v != 1.0 {
                return Err(Error::NonBinaryResponse(v, i));
            }
        }
    }
    let ybar = y.mean();
    if ybar == 0.0 || ybar == 1.0 {
        return Err(Error::DegenerateResponse);
    }
    Ok(ybar)
}

#[derive(Debug, Clone)]
struct Fit {
    beta: Vec<f64>,
    intercept: f64,
    eta: Vec<f64>,
    probs: Vec<f64>,
    y: Vec<f64>,
    ybar: f64,
}

impl Fit {
    fn null(p: usize, y: &ResponseVector) -> Result<Self> {
        let ybar = check_binary(y)?;
        let n = y.len();
        let b0 = (ybar / (1.0 - ybar)).ln();
        Ok(Fit {
            beta: vec![0.0; p],
            intercept: b0,
            eta: vec![b0; n],
            probs: vec![ybar; n],
            y: y.values().to_vec(),
            ybar,
        })
    }

    fn from_state(x: &DesignMatrix, y: &ResponseVector, warm: &LogisticState) -> Result<Self> {
        let mut fit = Fit::null(x.n_cols(), y)?;
        if warm.beta.nnz() == 0 && warm.intercept == fit.intercept {
            return Ok(fit);
        }
        fit.beta = warm.beta.to_dense();
        fit.intercept = warm.intercept;
        fit.refresh(x);
        Ok(fit)
    }

    fn refresh(&mut self, x: &DesignMatrix) {
        let mut eta = vec![self.intercept; self.y.len()];
        for (j, &b) in self.beta.iter().enumerate() {
            if b != 0.0 {
                x.col_axpy(j, b, &mut eta);
            }
        }
        self.probs = eta.iter().map(|&e| sigmoid(e)).collect();
        self.eta = eta;
        assert!(
            self.eta.iter().all(|e| e.is_finite()),
            "non-finite linear predictor"
        );
    }

    /// Replaces an all-zero fit with the exact null model.
    fn snap_null(&mut self) {
        if self.beta.iter().all(|&b| b == 0.0) {
            let b0 = (self.ybar / (1.0 - self.ybar)).ln();
            self.intercept = b0;
            self.eta.iter_mut().for_each(|e| *e = b0);
            self.probs.iter_mut().for_each(|p| *p = self.ybar);
        }
    }

    fn score_residual(&self) -> Vec<f64> {
        self.y.iter().zip(&self.probs).map(|(y, p)| y - p).collect()
    }

    fn objective(&self, lambda: f64) -> f64 {
        negloglik(&self.y, &self.eta) + lambda * self.beta.iter().map(|b| b.abs()).sum::<f64>()
    }

    fn excess(&self, j: usize, grad: f64, lambda: f64) -> f64 {
        let b = self.beta[j];
        if b == 0.0 {
            grad.abs() - lambda
        } else {
            (grad - lambda * b.signum()).abs()
        }
    }

    fn restricted_kkt_ok(&self, x: &DesignMatrix, idx: &[usize], lambda: f64, tol: f64) -> bool {
        let r = self.score_residual();
        let rsum: f64 = r.iter().sum();
        if rsum.abs() > tol * self.y.len() as f64 {
            return false;
        }
        idx.iter()
            .all(|&j| self.excess(j, x.col_dot_with_sum(j, &r, rsum), lambda) <= tol * lambda)
    }

    fn to_state(&self, lambda: f64) -> LogisticState {
        LogisticState {
            beta: Coefficients::from_dense(&self.beta),
            intercept: self.intercept,
            probs: self.probs.clone(),
            penalized_negloglik: self.objective(lambda),
        }
    }

    /// Solves the weighted least-squares approximation at the current fit
    /// over `coords`; returns the proposed `(intercept, beta)` and sweeps used.
    fn wls_step(
        &self,
        x: &DesignMatrix,
        coords: &[usize],
        lambda: f64,
        cfg: &SolverConfig,
        budget: usize,
    ) -> (f64, Vec<f64>, usize) {
        let w: Vec<f64> = self
            .probs
            .iter()
            .map(|&p| {
                let pc = p.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP);
                pc * (1.0 - pc)
            })
            .collect();
        let w_sum: f64 = w.iter().sum();
        // working residual z - η = (y - p)/w
        let mut r: Vec<f64> = self
            .y
            .iter()
            .zip(&self.probs)
            .zip(&w)
            .map(|((y, p), w)| (y - p) / w)
            .collect();
        let mut wr_sum: f64 = r.iter().zip(&w).map(|(r, w)| r * w).sum();
        let moments: Vec<(f64, f64)> = coords
            .iter()
            .map(|&j| x.col_weighted_moments(j, &w, w_sum))
            .collect();
        let mut beta = self.beta.clone();
        let mut b0 = self.intercept;

        let sweep = |set: &[usize], beta: &mut Vec<f64>, b0: &mut f64, r: &mut Vec<f64>, wr_sum: &mut f64| {
            let mut dmax = 0.0_f64;
            for &k in set {
                let j = coords[k];
                let (m1, m2) = moments[k];
                if m2 <= 0.0 {
                    continue;
                }
                let old = beta[j];
                let g = x.col_wdot(j, &w, r, *wr_sum) + m2 * old;
                let new = soft_threshold(g, lambda) / m2;
                if new != old {
                    let d = new - old;
                    x.col_axpy(j, -d, r);
                    *wr_sum -= d * m1;
                    beta[j] = new;
                    dmax = dmax.max(d.abs());
                }
            }
            let d0 = *wr_sum / w_sum;
            if d0 != 0.0 {
                r.iter_mut().for_each(|v| *v -= d0);
                *b0 += d0;
                *wr_sum = r.iter().zip(&w).map(|(r, w)| r * w).sum();
                dmax = dmax.max(d0.abs());
            }
            dmax
        };

        let all: Vec<usize> = (0..coords.len()).collect();
        let mut sweeps = 0;
        while sweeps < budget {
            let d = sweep(&all, &mut beta, &mut b0, &mut r, &mut wr_sum);
            sweeps += 1;
            if d < cfg.cd_tolerance {
                break;
            }
            let active: Vec<usize> = all.iter().copied().filter(|&k| beta[coords[k]] != 0.0).collect();
            while sweeps < budget {
                let d = sweep(&active, &mut beta, &mut b0, &mut r, &mut wr_sum);
                sweeps += 1;
                if d < cfg.cd_tolerance {
                    break;
                }
            }
        }
        (b0, beta, sweeps)
    }

    /// Outer quadratic-approximation loop restricted to `eligible`.
    fn solve(
        &mut self,
        x: &DesignMatrix,
        eligible: &[usize],
        lambda: f64,
        lambda_ref: Option<f64>,
        cfg: &SolverConfig,
    ) -> SolveStats {
        let mut sweeps = 0;
        let mut obj = self.objective(lambda);
        loop {
            if sweeps >= cfg.max_sweeps {
                self.snap_null();
                return SolveStats {
                    sweeps,
                    converged: false,
                };
            }
            let coords: Vec<usize> = match lambda_ref {
                Some(lref) => {
                    let r = self.score_residual();
                    let rsum: f64 = r.iter().sum();
                    let stats: Vec<f64> = eligible
                        .iter()
                        .map(|&j| x.col_dot_with_sum(j, &r, rsum).abs())
                        .collect();
                    let mask = screening::strong_sequential(&stats, lambda, lref);
                    eligible
                        .iter()
                        .enumerate()
                        .filter(|&(k, &j)| mask.keep[k] || self.beta[j] != 0.0)
                        .map(|(_, &j)| j)
                        .collect()
                }
                None => eligible.to_vec(),
            };
            let (b0_new, beta_new, used) =
                self.wls_step(x, &coords, lambda, cfg, cfg.max_sweeps - sweeps);
            sweeps += used.max(1);

            let old_beta = self.beta.clone();
            let old_b0 = self.intercept;
            let mut t = 1.0;
            let mut accepted = false;
            for _ in 0..=MAX_HALVINGS {
                self.intercept = old_b0 + t * (b0_new - old_b0);
                for &j in &coords {
                    self.beta[j] = old_beta[j] + t * (beta_new[j] - old_beta[j]);
                }
                self.refresh(x);
                let cand = self.objective(lambda);
                if cand <= obj + 1e-12 * obj.abs() {
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
            if !accepted {
                self.beta = old_beta;
                self.intercept = old_b0;
                self.refresh(x);
            }
            let new_obj = self.objective(lambda);
            let change = (obj - new_obj).abs();
            obj = new_obj;
            if change < cfg.cd_tolerance * (1.0 + obj.abs()) || !accepted {
                self.snap_null();
                if self.restricted_kkt_ok(x, eligible, lambda, cfg.kkt_tolerance) {
                    return SolveStats {
                        sweeps,
                        converged: true,
                    };
                }
                if !accepted {
                    return SolveStats {
                        sweeps,
                        converged: false,
                    };
                }
            }
        }
    }
}

/// Fits the penalized logistic model at `lambda` over the predictors in
/// `eligible`, starting from `warm`. Predictors outside `eligible` keep their
/// warm values.
pub fn fit_logistic(
    x: &DesignMatrix,
    y: &ResponseVector,
    lambda: f64,
    warm: &LogisticState,
    eligible: &[usize],
    config: &SolverConfig,
) -> Result<LogisticState> {
    x.check_rows(y.len())?;
    let mut fit = Fit::from_state(x, y, warm)?;
    let stats = fit.solve(x, eligible, lambda, None, config);
    if !stats.converged {
        return Err(Error::MaxSweepsExceeded {
            sweeps: stats.sweeps,
        });
    }
    Ok(fit.to_state(lambda))
}

/// Checks the logistic KKT conditions `x_jᵀ(y - p) = λ·sign(β_j)` for the
/// predictors in `scope`, plus intercept optimality `|1ᵀ(y - p)| ≤ N·tol`.
pub fn kkt_check_logistic(
    x: &DesignMatrix,
    y: &ResponseVector,
    state: &LogisticState,
    lambda: f64,
    scope: &[usize],
    kkt_tolerance: f64,
) -> Result<KktReport> {
    x.check_rows(y.len())?;
    if state.probs.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: y.len(),
            found: state.probs.len(),
        });
    }
    let r: Vec<f64> = y.values().iter().zip(&state.probs).map(|(y, p)| y - p).collect();
    let rsum: f64 = r.iter().sum();
    let mut b = KktReport::builder(lambda, kkt_tolerance);
    for &j in scope {
        let g = x.col_dot_with_sum(j, &r, rsum);
        let bj = state.beta.get(j);
        let excess = if bj == 0.0 {
            g.abs() - lambda
        } else {
            (g - lambda * bj.signum()).abs()
        };
        b.record(j, excess);
    }
    b.intercept_violation(rsum.abs() > kkt_tolerance * y.len() as f64);
    Ok(b.finish())
}

/// Penalized negative log-likelihood of `(intercept, beta)`.
pub fn logistic_objective(
    x: &DesignMatrix,
    y: &ResponseVector,
    intercept: f64,
    beta: &Coefficients,
    lambda: f64,
) -> Result<f64> {
    let mut eta = x.mul_coefs(beta)?;
    eta.iter_mut().for_each(|e| *e += intercept);
    Ok(negloglik(y.values(), &eta) + lambda * beta.l1_norm())
}

/// `max_j |x_jᵀ(y - ȳ)|`, the smallest penalty giving the null model.
pub fn logistic_lambda_max(x: &DesignMatrix, y: &ResponseVector) -> Result<f64> {
    check_binary(y)?;
    crate::design::lambda_max(x, y)
}

pub fn default_logistic_grid(
    x: &DesignMatrix,
    y: &ResponseVector,
    config: &SolverConfig,
) -> Result<LambdaGrid> {
    let lmax = logistic_lambda_max(x, y)?;
    make_grid(lmax, config.grid_size, config.grid_ratio, config.spacing)
}

struct LogisticPath<'a> {
    x: &'a DesignMatrix,
    cfg: &'a SolverConfig,
    options: LogisticOptions,
    fit: Fit,
    lambda_ref: f64,
}

impl PathProblem for LogisticPath<'_> {
    fn n_units(&self) -> usize {
        self.x.n_cols()
    }

    fn all_scores(&self) -> Vec<f64> {
        let all: Vec<usize> = (0..self.x.n_cols()).collect();
        self.unit_scores(&all)
    }

    fn unit_scores(&self, units: &[usize]) -> Vec<f64> {
        let r = self.fit.score_residual();
        let rsum: f64 = r.iter().sum();
        units
            .iter()
            .map(|&j| self.x.col_dot_with_sum(j, &r, rsum).abs())
            .collect()
    }

    fn penalty_level(&self, lambda: f64) -> f64 {
        lambda
    }

    fn strong_mask(&self, scores: &[f64], lambda: f64, lambda_prev: f64) -> ScreenMask {
        screening::strong_logistic(scores, lambda, lambda_prev, true)
    }

    fn begin_step(&mut self, _lambda: f64, lambda_prev: f64) {
        self.lambda_ref = lambda_prev;
    }

    fn solve(&mut self, eligible: &[usize], lambda: f64) -> SolveStats {
        let lref = self.options.irls_screening.then_some(self.lambda_ref);
        self.fit.solve(self.x, eligible, lambda, lref, self.cfg)
    }

    fn check_all(&self, lambda: f64, tol: f64) -> (KktReport, Vec<f64>) {
        let r = self.fit.score_residual();
        let rsum: f64 = r.iter().sum();
        let mut b = KktReport::builder(lambda, tol);
        let mut scores = Vec::with_capacity(self.x.n_cols());
        for j in 0..self.x.n_cols() {
            let g = self.x.col_dot_with_sum(j, &r, rsum);
            b.record(j, self.fit.excess(j, g, lambda));
            scores.push(g.abs());
        }
        b.intercept_violation(rsum.abs() > tol * r.len() as f64);
        (b.finish(), scores)
    }

    fn unit_active(&self, unit: usize) -> bool {
        self.fit.beta[unit] != 0.0
    }

    fn snapshot(&self) -> Coefficients {
        let mut c = Coefficients::from_dense(&self.fit.beta);
        c.intercept = self.fit.intercept;
        c
    }

    fn objective(&self, lambda: f64) -> f64 {
        self.fit.objective(lambda)
    }
}

/// Logistic regularization path with the logistic sequential strong rule.
/// Each step's coefficients carry the fitted intercept.
pub fn solve_path_logistic(
    x: &DesignMatrix,
    y: &ResponseVector,
    grid: &LambdaGrid,
    config: &SolverConfig,
) -> Result<PathSolution> {
    solve_path_logistic_with(x, y, grid, config, LogisticOptions::default())
}

pub fn solve_path_logistic_with(
    x: &DesignMatrix,
    y: &ResponseVector,
    grid: &LambdaGrid,
    config: &SolverConfig,
    options: LogisticOptions,
) -> Result<PathSolution> {
    config.validate()?;
    x.check_rows(y.len())?;
    let fit = Fit::null(x.n_cols(), y)?;
    let mut problem = LogisticPath {
        x,
        cfg: config,
        options,
        fit,
        lambda_ref: grid.lambda_max(),
    };
    Ok(run_path(&mut problem, grid, config.strategy, config.kkt_tolerance))
}
