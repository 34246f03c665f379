//! Pathwise driver shared by the Gaussian, logistic and group solvers.
//!
//! At each penalty the driver builds an eligible set according to the
//! chosen [`Strategy`], solves the restricted problem with warm starts, and
//! repairs the eligible set with KKT checks until no unit outside it
//! violates the optimality conditions.

use std::fmt;
use std::str::FromStr;

use crate::coef::Coefficients;
use crate::error::{Error, Result};
use crate::grid::LambdaGrid;
use crate::screening::ScreenMask;

/// How the eligible set is built at each penalty.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub enum Strategy {
    /// Every unit is eligible.
    Naive,
    /// Start from the ever-active set; add full-KKT violators.
    EverActiveOnly,
    /// Start from the sequential strong set; add full-KKT violators.
    StrongOnly,
    /// Start from the ever-active set, repair against the strong set, then
    /// against all units.
    #[default]
    Combined,
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [
        Strategy::Naive,
        Strategy::EverActiveOnly,
        Strategy::StrongOnly,
        Strategy::Combined,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Naive => "naive",
            Strategy::EverActiveOnly => "ever_active",
            Strategy::StrongOnly => "strong",
            Strategy::Combined => "combined",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "naive" => Ok(Strategy::Naive),
            "ever_active" | "everactive" | "ever_active_only" => Ok(Strategy::EverActiveOnly),
            "strong" | "strong_only" => Ok(Strategy::StrongOnly),
            "combined" => Ok(Strategy::Combined),
            other => Err(Error::InvalidConfig(format!(
                "unknown strategy '{other}'; valid strategies: naive, ever_active, strong, combined"
            ))),
        }
    }
}

/// Result of a KKT verification.
#[derive(Debug, Clone, PartialEq)]
pub struct KktReport {
    /// Units whose optimality condition fails, ascending.
    pub violating_indices: Vec<usize>,
    /// Worst excess: `|g_j| - λ` for inactive units, `|g_j - λ·s_j|` for active ones
    /// (floored at zero).
    pub max_excess: f64,
    /// Relative tolerance; a unit violates when its excess exceeds `tolerance·λ`.
    pub tolerance: f64,
    /// Penalty level the check was made against.
    pub lambda: f64,
    /// Set when an unpenalized intercept fails its stationarity condition.
    pub intercept_violation: bool,
}

impl KktReport {
    pub fn is_clean(&self) -> bool {
        self.violating_indices.is_empty() && !self.intercept_violation
    }

    pub(crate) fn builder(lambda: f64, tolerance: f64) -> KktBuilder {
        KktBuilder {
            report: KktReport {
                violating_indices: Vec::new(),
                max_excess: 0.0,
                tolerance,
                lambda,
                intercept_violation: false,
            },
        }
    }
}

pub(crate) struct KktBuilder {
    report: KktReport,
}

impl KktBuilder {
    /// Records the excess of unit `j`.
    pub(crate) fn record(&mut self, j: usize, excess: f64) {
        let r = &mut self.report;
        if excess > r.max_excess {
            r.max_excess = excess;
        }
        if excess > r.tolerance * r.lambda {
            r.violating_indices.push(j);
        }
    }

    pub(crate) fn intercept_violation(&mut self, violated: bool) {
        self.report.intercept_violation = violated;
    }

    pub(crate) fn finish(mut self) -> KktReport {
        self.report.violating_indices.sort_unstable();
        self.report
    }
}

/// Telemetry and solution at one grid point.
#[derive(Debug, Clone)]
pub struct PathStep {
    pub lambda: f64,
    pub coefs: Coefficients,
    pub objective: f64,
    /// Units surviving the sequential strong rule at this penalty.
    pub strong_set_size: usize,
    /// Units nonzero at some larger penalty on the path.
    pub ever_active_size: usize,
    /// Units in the final eligible set.
    pub eligible_size: usize,
    /// Violators found when checking the strong set (combined strategy).
    pub kkt_violations_strong: usize,
    /// Violators found when checking every unit.
    pub kkt_violations_full: usize,
    /// Units discarded by the sequential strong rule that are nonzero in the solution.
    pub rule_violations: usize,
    pub sweeps: usize,
    pub converged: bool,
    pub kkt: KktReport,
}

/// A full regularization path.
#[derive(Debug, Clone)]
pub struct PathSolution {
    pub lambda_max: f64,
    pub strategy: Strategy,
    pub steps: Vec<PathStep>,
}

impl PathSolution {
    pub fn lambdas(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.lambda).collect()
    }

    pub fn all_converged(&self) -> bool {
        self.steps.iter().all(|s| s.converged)
    }

    pub fn all_kkt_clean(&self) -> bool {
        self.steps.iter().all(|s| s.kkt.is_clean())
    }

    pub fn total_rule_violations(&self) -> usize {
        self.steps.iter().map(|s| s.rule_violations).sum()
    }

    /// Largest per-coefficient deviation from another path on the same grid.
    pub fn max_deviation(&self, other: &PathSolution) -> f64 {
        assert_eq!(self.steps.len(), other.steps.len(), "paths differ in length");
        self.steps
            .iter()
            .zip(&other.steps)
            .map(|(a, b)| a.coefs.max_abs_diff(&b.coefs))
            .fold(0.0, f64::max)
    }
}

/// Outcome of one restricted solve.
#[derive(Debug, Clone, Copy)]
pub(crate) struct SolveStats {
    pub sweeps: usize,
    pub converged: bool,
}

/// A penalized problem solved along a path. Units are predictors or groups.
pub(crate) trait PathProblem {
    fn n_units(&self) -> usize;
    /// Screening statistic of every unit at the current state.
    fn all_scores(&self) -> Vec<f64>;
    fn unit_scores(&self, units: &[usize]) -> Vec<f64>;
    /// Penalty level the statistic is compared against at grid value `lambda`.
    fn penalty_level(&self, lambda: f64) -> f64;
    fn strong_mask(&self, scores: &[f64], lambda: f64, lambda_prev: f64) -> ScreenMask;
    /// Called once per grid point before any solve.
    fn begin_step(&mut self, _lambda: f64, _lambda_prev: f64) {}
    fn solve(&mut self, eligible: &[usize], lambda: f64) -> SolveStats;
    /// Full-scope KKT report plus the statistic of every unit.
    fn check_all(&self, lambda: f64, tol: f64) -> (KktReport, Vec<f64>);
    fn unit_active(&self, unit: usize) -> bool;
    fn snapshot(&self) -> Coefficients;
    fn objective(&self, lambda: f64) -> f64;
}

pub(crate) fn run_path<P: PathProblem>(
    problem: &mut P,
    grid: &LambdaGrid,
    strategy: Strategy,
    kkt_tol: f64,
) -> PathSolution {
    let m = problem.n_units();
    let mut scores = problem.all_scores();
    let mut ever_active = vec![false; m];
    let mut steps = Vec::with_capacity(grid.len());

    for (k, &lambda) in grid.values().iter().enumerate() {
        let lambda_prev = grid.previous(k);
        problem.begin_step(lambda, lambda_prev);
        let level = problem.penalty_level(lambda);
        let mask = problem.strong_mask(&scores, lambda, lambda_prev);
        let mut in_strong = mask.keep.clone();
        let ever_active_size = ever_active.iter().filter(|a| **a).count();

        let mut eligible: Vec<bool> = match strategy {
            Strategy::Naive => vec![true; m],
            Strategy::EverActiveOnly | Strategy::Combined => ever_active.clone(),
            Strategy::StrongOnly => in_strong.clone(),
        };
        // warm-start nonzeros always stay eligible
        for (u, e) in eligible.iter_mut().enumerate() {
            if !*e && problem.unit_active(u) {
                *e = true;
            }
        }

        let mut sweeps = 0;
        let mut converged;
        let mut violations_strong = 0;
        let mut violations_full = 0;
        let report = loop {
            let list: Vec<usize> = (0..m).filter(|&u| eligible[u]).collect();
            let stats = problem.solve(&list, lambda);
            sweeps += stats.sweeps;
            converged = stats.converged;

            if strategy == Strategy::Combined {
                let candidates: Vec<usize> =
                    (0..m).filter(|&u| in_strong[u] && !eligible[u]).collect();
                let cand_scores = problem.unit_scores(&candidates);
                let violators: Vec<usize> = candidates
                    .iter()
                    .zip(&cand_scores)
                    .filter(|(_, &s)| s - level > kkt_tol * level)
                    .map(|(&u, _)| u)
                    .collect();
                if !violators.is_empty() {
                    violations_strong += violators.len();
                    for u in violators {
                        eligible[u] = true;
                    }
                    continue;
                }
            }

            let (report, full_scores) = problem.check_all(lambda, kkt_tol);
            let violators: Vec<usize> = report
                .violating_indices
                .iter()
                .copied()
                .filter(|&u| !eligible[u])
                .collect();
            if violators.is_empty() {
                scores = full_scores;
                break report;
            }
            violations_full += violators.len();
            for u in violators {
                eligible[u] = true;
                if strategy == Strategy::Combined {
                    ever_active[u] = true;
                    in_strong[u] = true;
                }
            }
        };

        let rule_violations = (0..m)
            .filter(|&u| !mask.keep[u] && problem.unit_active(u))
            .count();
        for (u, a) in ever_active.iter_mut().enumerate() {
            if problem.unit_active(u) {
                *a = true;
            }
        }
        steps.push(PathStep {
            lambda,
            coefs: problem.snapshot(),
            objective: problem.objective(lambda),
            strong_set_size: mask.n_kept(),
            ever_active_size,
            eligible_size: eligible.iter().filter(|e| **e).count(),
            kkt_violations_strong: violations_strong,
            kkt_violations_full: violations_full,
            rule_violations,
            sweeps,
            converged,
            kkt: report,
        });
    }

    PathSolution {
        lambda_max: grid.lambda_max(),
        strategy,
        steps,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strategy_names_parse() {
        for s in Strategy::ALL {
            assert_eq!(s.name().parse::<Strategy>().unwrap(), s);
        }
        assert!("fastest".parse::<Strategy>().is_err());
    }

    #[test]
    fn kkt_report_is_empty_iff_excess_within_tolerance() {
        let mut b = KktReport::builder(2.0, 0.1);
        b.record(3, 0.15);
        b.record(1, 0.2);
        let r = b.finish();
        assert!(r.is_clean());
        assert!(r.max_excess <= r.tolerance * r.lambda);
        let mut b = KktReport::builder(2.0, 0.1);
        b.record(4, 0.3);
        b.record(0, 0.25);
        let r = b.finish();
        assert_eq!(r.violating_indices, vec![0, 4]);
        assert!(r.max_excess > r.tolerance * r.lambda);
    }
}
