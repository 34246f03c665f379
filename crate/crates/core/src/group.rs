//! Group lasso by block coordinate descent.
//!
//! Objective: `½‖y - Xβ‖² + λ Σ_ℓ ‖β_ℓ‖₂` over contiguous predictor blocks.

use std::cell::RefCell;

use crate::coef::Coefficients;
use crate::design::{dot, DesignMatrix, ResponseVector};
use crate::error::{Error, Result};
use crate::grid::{make_grid, LambdaGrid};
use crate::lasso::{soft_threshold, SolverConfig};
use crate::path::{run_path, KktReport, PathProblem, PathSolution, SolveStats};
use crate::screening::{self, ScreenMask};

const INNER_MAX_ITERS: usize = 100_000;

/// Partition of the predictors into contiguous blocks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupSpec {
    starts: Vec<usize>,
    n_predictors: usize,
}

impl GroupSpec {
    /// Blocks of the given sizes, in order. Sizes must be positive and sum to `p`.
    pub fn from_sizes(sizes: &[usize], p: usize) -> Result<Self> {
        if sizes.iter().any(|&s| s == 0) {
            return Err(Error::InvalidSpec("group sizes must be positive".into()));
        }
        let total: usize = sizes.iter().sum();
        if total != p {
            return Err(Error::InvalidSpec(format!(
                "group sizes sum to {total}, expected {p} predictors"
            )));
        }
        let mut starts = Vec::with_capacity(sizes.len());
        let mut at = 0;
        for &s in sizes {
            starts.push(at);
            at += s;
        }
        Ok(GroupSpec {
            starts,
            n_predictors: p,
        })
    }

    /// One predictor per block.
    pub fn singletons(p: usize) -> Self {
        GroupSpec {
            starts: (0..p).collect(),
            n_predictors: p,
        }
    }

    /// `count` blocks of equal `size`.
    pub fn uniform(count: usize, size: usize) -> Result<Self> {
        GroupSpec::from_sizes(&vec![size; count], count * size)
    }

    pub fn n_groups(&self) -> usize {
        self.starts.len()
    }

    pub fn n_predictors(&self) -> usize {
        self.n_predictors
    }

    pub fn range(&self, g: usize) -> std::ops::Range<usize> {
        let end = self
            .starts
            .get(g + 1)
            .copied()
            .unwrap_or(self.n_predictors);
        self.starts[g]..end
    }

    pub fn sizes(&self) -> Vec<usize> {
        (0..self.n_groups()).map(|g| self.range(g).len()).collect()
    }
}

#[derive(Debug)]
struct Block {
    cols: Vec<Vec<f64>>,
    /// Row-major Gram matrix of the block.
    gram: Vec<f64>,
    /// Largest eigenvalue of the Gram matrix.
    lipschitz: f64,
    orthonormal: bool,
}

impl Block {
    fn new(x: &DesignMatrix, range: std::ops::Range<usize>) -> Self {
        let cols: Vec<Vec<f64>> = range.map(|j| x.column(j)).collect();
        let k = cols.len();
        let mut gram = vec![0.0; k * k];
        for a in 0..k {
            for b in 0..=a {
                let v = dot(&cols[a], &cols[b]);
                gram[a * k + b] = v;
                gram[b * k + a] = v;
            }
        }
        let orthonormal = (0..k).all(|a| {
            (0..k).all(|b| {
                let target = if a == b { 1.0 } else { 0.0 };
                (gram[a * k + b] - target).abs() < 1e-12
            })
        });
        let lipschitz = spectral_norm(&gram, k);
        Block {
            cols,
            gram,
            lipschitz,
            orthonormal,
        }
    }

    fn size(&self) -> usize {
        self.cols.len()
    }

    fn gram_times(&self, v: &[f64]) -> Vec<f64> {
        let k = self.size();
        (0..k)
            .map(|a| (0..k).map(|b| self.gram[a * k + b] * v[b]).sum())
            .collect()
    }
}

/// Largest eigenvalue of a symmetric positive semi-definite matrix by power
/// iteration, inflated slightly so it is a safe upper bound for step sizes.
fn spectral_norm(gram: &[f64], k: usize) -> f64 {
    if k == 1 {
        return gram[0];
    }
    let mut v = vec![1.0 / (k as f64).sqrt(); k];
    let mut est = 0.0;
    for _ in 0..500 {
        let w: Vec<f64> = (0..k)
            .map(|a| (0..k).map(|b| gram[a * k + b] * v[b]).sum())
            .collect();
        let norm = dot(&w, &w).sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        let next = norm;
        v = w.into_iter().map(|x| x / norm).collect();
        if (next - est).abs() <= 1e-12 * next {
            est = next;
            break;
        }
        est = next;
    }
    // Gershgorin bound caps the estimate from above
    let gersh = (0..k)
        .map(|a| (0..k).map(|b| gram[a * k + b].abs()).sum::<f64>())
        .fold(0.0, f64::max);
    (est * (1.0 + 1e-6)).min(gersh).max(est)
}

fn group_shrink(v: &[f64], t: f64) -> Vec<f64> {
    let norm = dot(v, v).sqrt();
    if norm <= t {
        vec![0.0; v.len()]
    } else {
        let f = 1.0 - t / norm;
        v.iter().map(|x| x * f).collect()
    }
}

/// Minimizes `½βᵀGβ - gᵀβ + λ‖β‖₂` for one block, starting from `start`.
fn block_minimizer(block: &Block, g: &[f64], lambda: f64, start: &[f64], tol: f64) -> Vec<f64> {
    let k = block.size();
    if dot(g, g).sqrt() <= lambda {
        return vec![0.0; k];
    }
    if k == 1 {
        return vec![soft_threshold(g[0], lambda) / block.gram[0]];
    }
    if block.orthonormal {
        return group_shrink(g, lambda);
    }
    let step = 1.0 / block.lipschitz;
    let mut beta = start.to_vec();
    for _ in 0..INNER_MAX_ITERS {
        let gb = block.gram_times(&beta);
        let point: Vec<f64> = (0..k).map(|a| beta[a] + step * (g[a] - gb[a])).collect();
        let next = group_shrink(&point, step * lambda);
        let change = next
            .iter()
            .zip(&beta)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
        beta = next;
        if change < tol {
            break;
        }
    }
    beta
}

struct GroupState<'a> {
    x: &'a DesignMatrix,
    groups: &'a GroupSpec,
    blocks: RefCell<Vec<Option<std::rc::Rc<Block>>>>,
    beta: Vec<f64>,
    resid: Vec<f64>,
}

impl<'a> GroupState<'a> {
    fn new(x: &'a DesignMatrix, groups: &'a GroupSpec, y: &[f64], warm: &Coefficients) -> Self {
        let mut resid = y.to_vec();
        let mut beta = vec![0.0; x.n_cols()];
        for (j, b) in warm.iter() {
            beta[j] = b;
            x.col_axpy(j, -b, &mut resid);
        }
        GroupState {
            x,
            groups,
            blocks: RefCell::new(vec![None; groups.n_groups()]),
            beta,
            resid,
        }
    }

    fn block(&self, g: usize) -> std::rc::Rc<Block> {
        let mut cache = self.blocks.borrow_mut();
        cache[g]
            .get_or_insert_with(|| std::rc::Rc::new(Block::new(self.x, self.groups.range(g))))
            .clone()
    }

    /// `X_ℓᵀ r`.
    fn block_gradient(&self, g: usize) -> Vec<f64> {
        let rsum = if self.x.is_sparse() {
            self.resid.iter().sum()
        } else {
            0.0
        };
        self.groups
            .range(g)
            .map(|j| self.x.col_dot_with_sum(j, &self.resid, rsum))
            .collect()
    }

    fn block_active(&self, g: usize) -> bool {
        self.groups.range(g).any(|j| self.beta[j] != 0.0)
    }

    fn block_excess(&self, g: usize, grad: &[f64], lambda: f64) -> f64 {
        let b = &self.beta[self.groups.range(g)];
        let bn = dot(b, b).sqrt();
        if bn == 0.0 {
            dot(grad, grad).sqrt() - lambda
        } else {
            let d: Vec<f64> = grad
                .iter()
                .zip(b)
                .map(|(gj, bj)| gj - lambda * bj / bn)
                .collect();
            dot(&d, &d).sqrt()
        }
    }

    fn sweep(&mut self, set: &[usize], lambda: f64, tol: f64) -> f64 {
        let mut dmax = 0.0_f64;
        for &g in set {
            let block = self.block(g);
            let range = self.groups.range(g);
            let old: Vec<f64> = self.beta[range.clone()].to_vec();
            let xtr: Vec<f64> = block.cols.iter().map(|c| dot(c, &self.resid)).collect();
            let gb = block.gram_times(&old);
            let grad: Vec<f64> = xtr.iter().zip(&gb).map(|(a, b)| a + b).collect();
            let new = block_minimizer(&block, &grad, lambda, &old, tol * 1e-2);
            for (a, j) in range.enumerate() {
                let d = new[a] - old[a];
                if d != 0.0 {
                    for (r, c) in self.resid.iter_mut().zip(&block.cols[a]) {
                        *r -= d * c;
                    }
                    self.beta[j] = new[a];
                    dmax = dmax.max(d.abs());
                }
            }
        }
        dmax
    }

    fn restricted_kkt_ok(&self, set: &[usize], lambda: f64, tol: f64) -> bool {
        set.iter()
            .all(|&g| self.block_excess(g, &self.block_gradient(g), lambda) <= tol * lambda)
    }

    fn solve(&mut self, eligible: &[usize], lambda: f64, cfg: &SolverConfig) -> SolveStats {
        let mut sweeps = 0;
        while sweeps < cfg.max_sweeps {
            let d = self.sweep(eligible, lambda, cfg.cd_tolerance);
            sweeps += 1;
            if d < cfg.cd_tolerance {
                if self.restricted_kkt_ok(eligible, lambda, cfg.kkt_tolerance) {
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
                .filter(|&g| self.block_active(g))
                .collect();
            while sweeps < cfg.max_sweeps {
                let d = self.sweep(&active, lambda, cfg.cd_tolerance);
                sweeps += 1;
                if d < cfg.cd_tolerance {
                    break;
                }
            }
        }
        SolveStats {
            sweeps,
            converged: false,
        }
    }

    fn objective(&self, lambda: f64) -> f64 {
        let rss = dot(&self.resid, &self.resid);
        let pen: f64 = (0..self.groups.n_groups())
            .map(|g| {
                let b = &self.beta[self.groups.range(g)];
                dot(b, b).sqrt()
            })
            .sum();
        0.5 * rss + lambda * pen
    }
}

fn check_inputs(x: &DesignMatrix, y: &ResponseVector, groups: &GroupSpec) -> Result<()> {
    x.check_rows(y.len())?;
    if groups.n_predictors() != x.n_cols() {
        return Err(Error::InvalidSpec(format!(
            "group spec covers {} predictors, design has {}",
            groups.n_predictors(),
            x.n_cols()
        )));
    }
    Ok(())
}

/// Solves the group lasso at `lambda` over every block, starting from `warm`.
pub fn group_block_descent(
    x: &DesignMatrix,
    y: &ResponseVector,
    groups: &GroupSpec,
    lambda: f64,
    warm: &Coefficients,
    config: &SolverConfig,
) -> Result<Coefficients> {
    check_inputs(x, y, groups)?;
    let mut state = GroupState::new(x, groups, y.values(), warm);
    let all: Vec<usize> = (0..groups.n_groups()).collect();
    let stats = state.solve(&all, lambda, config);
    if !stats.converged {
        return Err(Error::MaxSweepsExceeded {
            sweeps: stats.sweeps,
        });
    }
    Ok(Coefficients::from_dense(&state.beta))
}

/// Block KKT check: `‖X_ℓᵀr‖₂ ≤ λ` for zero blocks and
/// `X_ℓᵀr = λβ_ℓ/‖β_ℓ‖₂` for active ones, within `tol·λ`.
pub fn kkt_check_group(
    x: &DesignMatrix,
    y: &ResponseVector,
    groups: &GroupSpec,
    beta: &Coefficients,
    lambda: f64,
    kkt_tolerance: f64,
) -> Result<KktReport> {
    check_inputs(x, y, groups)?;
    let state = GroupState::new(x, groups, y.values(), beta);
    let mut b = KktReport::builder(lambda, kkt_tolerance);
    for g in 0..groups.n_groups() {
        b.record(g, state.block_excess(g, &state.block_gradient(g), lambda));
    }
    Ok(b.finish())
}

pub fn group_objective(
    x: &DesignMatrix,
    y: &ResponseVector,
    groups: &GroupSpec,
    beta: &Coefficients,
    lambda: f64,
) -> Result<f64> {
    check_inputs(x, y, groups)?;
    Ok(GroupState::new(x, groups, y.values(), beta).objective(lambda))
}

/// `max_ℓ ‖X_ℓᵀy‖₂`.
pub fn group_lambda_max(x: &DesignMatrix, y: &ResponseVector, groups: &GroupSpec) -> Result<f64> {
    check_inputs(x, y, groups)?;
    let c = x.inner_products(y.values())?;
    Ok((0..groups.n_groups())
        .map(|g| {
            let s = &c[groups.range(g)];
            dot(s, s).sqrt()
        })
        .fold(0.0, f64::max))
}

pub fn default_group_grid(
    x: &DesignMatrix,
    y: &ResponseVector,
    groups: &GroupSpec,
    config: &SolverConfig,
) -> Result<LambdaGrid> {
    let lmax = group_lambda_max(x, y, groups)?;
    make_grid(lmax, config.grid_size, config.grid_ratio, config.spacing)
}

struct GroupPath<'a> {
    state: GroupState<'a>,
    cfg: &'a SolverConfig,
}

impl PathProblem for GroupPath<'_> {
    fn n_units(&self) -> usize {
        self.state.groups.n_groups()
    }

    fn all_scores(&self) -> Vec<f64> {
        let c = self.state.x.inner_products(&self.state.resid).expect("residual length");
        (0..self.n_units())
            .map(|g| {
                let s = &c[self.state.groups.range(g)];
                dot(s, s).sqrt()
            })
            .collect()
    }

    fn unit_scores(&self, units: &[usize]) -> Vec<f64> {
        units
            .iter()
            .map(|&g| {
                let s = self.state.block_gradient(g);
                dot(&s, &s).sqrt()
            })
            .collect()
    }

    fn penalty_level(&self, lambda: f64) -> f64 {
        lambda
    }

    fn strong_mask(&self, scores: &[f64], lambda: f64, lambda_prev: f64) -> ScreenMask {
        screening::strong_group(scores, lambda, lambda_prev)
    }

    fn solve(&mut self, eligible: &[usize], lambda: f64) -> SolveStats {
        self.state.solve(eligible, lambda, self.cfg)
    }

    fn check_all(&self, lambda: f64, tol: f64) -> (KktReport, Vec<f64>) {
        let c = self.state.x.inner_products(&self.state.resid).expect("residual length");
        let mut b = KktReport::builder(lambda, tol);
        let mut scores = Vec::with_capacity(self.n_units());
        for g in 0..self.n_units() {
            let grad = &c[self.state.groups.range(g)];
            b.record(g, self.state.block_excess(g, grad, lambda));
            scores.push(dot(grad, grad).sqrt());
        }
        (b.finish(), scores)
    }

    fn unit_active(&self, unit: usize) -> bool {
        self.state.block_active(unit)
    }

    fn snapshot(&self) -> Coefficients {
        Coefficients::from_dense(&self.state.beta)
    }

    fn objective(&self, lambda: f64) -> f64 {
        self.state.objective(lambda)
    }
}

/// Group-lasso path with the group sequential strong rule. Screening and KKT
/// telemetry in the returned steps count blocks, not predictors.
pub fn solve_group_path(
    x: &DesignMatrix,
    y: &ResponseVector,
    groups: &GroupSpec,
    grid: &LambdaGrid,
    config: &SolverConfig,
) -> Result<PathSolution> {
    config.validate()?;
    check_inputs(x, y, groups)?;
    let mut problem = GroupPath {
        state: GroupState::new(x, groups, y.values(), &Coefficients::zeros(x.n_cols())),
        cfg: config,
    };
    Ok(run_path(&mut problem, grid, config.strategy, config.kkt_tolerance))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::{standardize, RawMatrix, StandardizeMode};
    use crate::lasso::solve_path;
    use crate::path::Strategy;
    use rand::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};

    fn random_problem(n: usize, p: usize, seed: u64) -> (DesignMatrix, ResponseVector) {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let data: Vec<f64> = (0..n * p).map(|_| StandardNormal.sample(&mut rng)).collect();
        let y: Vec<f64> = (0..n)
            .map(|i| {
                let noise: f64 = StandardNormal.sample(&mut rng);
                data[i] + data[n + i] - data[2 * n + i] + noise
            })
            .collect();
        let raw = RawMatrix::dense(n, p, data).unwrap();
        let s = standardize(&raw, &y, StandardizeMode::CenterAndScale).unwrap();
        (s.x, s.y)
    }

    #[test]
    fn spec_validation() {
        assert!(GroupSpec::from_sizes(&[2, 3], 5).is_ok());
        assert!(GroupSpec::from_sizes(&[2, 2], 5).is_err());
        assert!(GroupSpec::from_sizes(&[0, 5], 5).is_err());
        let g = GroupSpec::from_sizes(&[2, 3], 5).unwrap();
        assert_eq!(g.range(1), 2..5);
        assert_eq!(g.sizes(), vec![2, 3]);
    }

    #[test]
    fn orthonormal_block_closed_form() {
        let x = DesignMatrix::from_rows(&[
            vec![1.0, 0.0],
            vec![0.0, 1.0],
            vec![0.0, 0.0],
        ])
        .unwrap();
        let y = ResponseVector::gaussian(vec![3.0, 4.0, 1.0]);
        let groups = GroupSpec::from_sizes(&[2], 2).unwrap();
        let fit = group_block_descent(&x, &y, &groups, 2.5, &Coefficients::zeros(2), &SolverConfig::default())
            .unwrap();
        // (1 - 2.5/5)·(3, 4)
        assert!((fit.get(0) - 1.5).abs() < 1e-12);
        assert!((fit.get(1) - 2.0).abs() < 1e-12);
        let zero = group_block_descent(&x, &y, &groups, 5.0, &Coefficients::zeros(2), &SolverConfig::default())
            .unwrap();
        assert_eq!(zero.nnz(), 0);
    }

    #[test]
    fn non_orthonormal_blocks_satisfy_kkt() {
        let (x, y) = random_problem(40, 12, 4);
        let groups = GroupSpec::uniform(4, 3).unwrap();
        let lmax = group_lambda_max(&x, &y, &groups).unwrap();
        for frac in [0.6, 0.2, 0.05] {
            let fit = group_block_descent(&x, &y, &groups, frac * lmax, &Coefficients::zeros(12), &SolverConfig::default())
                .unwrap();
            let r = kkt_check_group(&x, &y, &groups, &fit, frac * lmax, 1e-7).unwrap();
            assert!(r.is_clean(), "{r:?}");
        }
    }

    #[test]
    fn singleton_groups_reproduce_lasso_path() {
        let (x, y) = random_problem(40, 15, 5);
        let cfg = SolverConfig {
            grid_size: 40,
            ..SolverConfig::default()
        };
        let grid = crate::lasso::default_grid(&x, &y, &cfg).unwrap();
        let lasso = solve_path(&x, &y, &grid, &cfg).unwrap();
        let group = solve_group_path(&x, &y, &GroupSpec::singletons(15), &grid, &cfg).unwrap();
        assert!(lasso.max_deviation(&group) < 1e-6);
        for (a, b) in lasso.steps.iter().zip(&group.steps) {
            assert_eq!(a.strong_set_size, b.strong_set_size);
            assert_eq!(a.ever_active_size, b.ever_active_size);
            assert_eq!(a.rule_violations, b.rule_violations);
        }
    }

    #[test]
    fn screened_group_path_matches_naive() {
        let (x, y) = random_problem(30, 60, 6);
        let groups = GroupSpec::uniform(20, 3).unwrap();
        let cfg = SolverConfig {
            grid_size: 30,
            grid_ratio: 0.05,
            ..SolverConfig::default()
        };
        let grid = default_group_grid(&x, &y, &groups, &cfg).unwrap();
        let naive = solve_group_path(&x, &y, &groups, &grid, &cfg.clone().with_strategy(Strategy::Naive)).unwrap();
        let combined = solve_group_path(&x, &y, &groups, &grid, &cfg).unwrap();
        assert!(naive.all_kkt_clean() && combined.all_kkt_clean());
        assert!(naive.max_deviation(&combined) < 1e-6, "{}", naive.max_deviation(&combined));
    }
}
