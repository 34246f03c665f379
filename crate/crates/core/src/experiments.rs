//! Simulation scenarios and experiment drivers: survivor curves, violation
//! counts, timing comparisons and slope scans, all written as CSV rows with
//! the columns `scenario,seed,lambda,pve,rule,strategy,survivors,violations,seconds`.

use std::collections::HashSet;
use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::coef::Coefficients;
use crate::design::{
    residual, standardize_with, DesignMatrix, RawMatrix, ResponseKind, ResponseVector,
    StandardizeMode, Standardized,
};
use crate::error::{Error, Result};
use crate::glasso::{self, GlassoConfig, GlassoScreening};
use crate::grid::LambdaGrid;
use crate::guarantees;
use crate::lasso::{self, SolverConfig};
use crate::logistic;
use crate::path::{PathSolution, Strategy};
use crate::screening::{self, RuleId, RuleInputs};

/// How the nonzero true coefficients are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CoefScheme {
    /// Standard Gaussian values.
    #[default]
    GaussianValues,
    /// `±2` with random signs.
    Pm2,
    /// Equal magnitude, alternating signs.
    AlternatingEqual,
    /// Positive and decreasing: `k, k-1, ..., 1` scaled to a maximum of 1.
    PositiveDecreasing,
}

impl CoefScheme {
    pub fn name(self) -> &'static str {
        match self {
            CoefScheme::GaussianValues => "gaussian",
            CoefScheme::Pm2 => "pm2",
            CoefScheme::AlternatingEqual => "alternating",
            CoefScheme::PositiveDecreasing => "decreasing",
        }
    }
}

impl FromStr for CoefScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "gaussian" | "gaussian_values" => Ok(CoefScheme::GaussianValues),
            "pm2" => Ok(CoefScheme::Pm2),
            "alternating" | "alternating_equal" => Ok(CoefScheme::AlternatingEqual),
            "decreasing" | "positive_decreasing" => Ok(CoefScheme::PositiveDecreasing),
            other => Err(Error::InvalidSpec(format!(
                "unknown coefficient scheme '{other}'; valid: gaussian, pm2, alternating, decreasing"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum DesignKind {
    #[default]
    Dense,
    /// Independent 0/1 entries with the given probability of a one.
    SparseBinary { density: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Family {
    #[default]
    Gaussian,
    Binomial,
}

/// A simulation scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct SimSpec {
    pub n: usize,
    pub p: usize,
    /// Pairwise population correlation of dense columns.
    pub rho: f64,
    pub nonzero_frac: f64,
    pub coef_scheme: CoefScheme,
    /// `Var(Xβ) / σ²` for Gaussian responses.
    pub snr: f64,
    pub design: DesignKind,
    /// Columns are multiplied by independent uniform factors in `[1, scale_spread]`.
    pub scale_spread: f64,
    pub family: Family,
    pub seed: u64,
}

impl Default for SimSpec {
    fn default() -> Self {
        SimSpec {
            n: 100,
            p: 1000,
            rho: 0.0,
            nonzero_frac: 0.25,
            coef_scheme: CoefScheme::GaussianValues,
            snr: 3.0,
            design: DesignKind::Dense,
            scale_spread: 1.0,
            family: Family::Gaussian,
            seed: 0,
        }
    }
}

impl SimSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 || self.p == 0 {
            return Err(Error::InvalidSpec(format!(
                "need n >= 2 and p >= 1, got n={} p={}",
                self.n, self.p
            )));
        }
        if !(0.0..1.0).contains(&self.rho) {
            return Err(Error::InvalidSpec(format!("rho must lie in [0, 1), got {}", self.rho)));
        }
        if !(self.nonzero_frac > 0.0 && self.nonzero_frac <= 1.0) {
            return Err(Error::InvalidSpec(format!(
                "nonzero fraction must lie in (0, 1], got {}",
                self.nonzero_frac
            )));
        }
        if !(self.snr > 0.0 && self.snr.is_finite()) {
            return Err(Error::InvalidSpec(format!("snr must be positive, got {}", self.snr)));
        }
        if !(self.scale_spread >= 1.0 && self.scale_spread.is_finite()) {
            return Err(Error::InvalidSpec(format!(
                "scale spread must be at least 1, got {}",
                self.scale_spread
            )));
        }
        if let DesignKind::SparseBinary { density } = self.design {
            if !(density > 0.0 && density <= 1.0) {
                return Err(Error::InvalidSpec(format!(
                    "density must lie in (0, 1], got {density}"
                )));
            }
            if self.rho != 0.0 {
                return Err(Error::InvalidSpec(
                    "sparse binary designs have independent entries; rho must be 0".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn n_nonzero(&self) -> usize {
        ((self.nonzero_frac * self.p as f64).round() as usize).clamp(1, self.p)
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        SimSpec {
            seed,
            ..self.clone()
        }
    }

    pub fn with_p(&self, p: usize) -> Self {
        SimSpec { p, ..self.clone() }
    }
}

/// Raw simulated data and the coefficients that generated it.
#[derive(Debug, Clone, PartialEq)]
pub struct Simulated {
    pub x: RawMatrix,
    pub y: Vec<f64>,
    pub beta: Vec<f64>,
}

impl Simulated {
    pub fn prepare(&self, mode: StandardizeMode, family: Family) -> Result<Standardized> {
        let kind = match family {
            Family::Gaussian => ResponseKind::Gaussian {
                center: mode != StandardizeMode::None,
            },
            Family::Binomial => ResponseKind::Binary,
        };
        standardize_with(&self.x, &self.y, mode, kind)
    }
}

const MAX_PATTERN_TRIES: usize = 1000;

/// Generates data for `spec`. The output is a pure function of the spec.
///
/// Dense columns follow `x_j = √ρ·z + √(1-ρ)·e_j` with shared factor `z`.
/// The first `round(nonzero_frac·p)` coefficients are nonzero. Gaussian
/// noise is scaled so the sample signal variance over the noise variance
/// equals `snr`; binomial responses are Bernoulli draws of `sigmoid(Xβ)`.
/// Sparse 0/1 columns that come out constant, or repeat the pattern of an
/// earlier column, are redrawn (duplicates make the lasso minimizer
/// non-unique). Duplicates are accepted after a bounded number of tries.
pub fn simulate(spec: &SimSpec) -> Result<Simulated> {
    spec.validate()?;
    let (n, p) = (spec.n, spec.p);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let x = match spec.design {
        DesignKind::Dense => {
            let z: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
            let a = spec.rho.sqrt();
            let b = (1.0 - spec.rho).sqrt();
            let mut data = Vec::with_capacity(n * p);
            for _ in 0..p {
                let scale = if spec.scale_spread > 1.0 {
                    rng.random_range(1.0..=spec.scale_spread)
                } else {
                    1.0
                };
                for zi in &z {
                    let e: f64 = StandardNormal.sample(&mut rng);
                    data.push(scale * (a * zi + b * e));
                }
            }
            RawMatrix::dense(n, p, data)?
        }
        DesignKind::SparseBinary { density } => {
            let mut triplets = Vec::new();
            let mut patterns: HashSet<Vec<usize>> = HashSet::new();
            for j in 0..p {
                let scale = if spec.scale_spread > 1.0 {
                    rng.random_range(1.0..=spec.scale_spread)
                } else {
                    1.0
                };
                // constant columns cannot be standardized; redraw them
                let mut tries = 0;
                loop {
                    let rows: Vec<usize> = (0..n).filter(|_| rng.random::<f64>() < density).collect();
                    if density >= 1.0 || (!rows.is_empty() && rows.len() < n) {
                        tries += 1;
                        if !patterns.contains(&rows) || tries > MAX_PATTERN_TRIES {
                            triplets.extend(rows.iter().map(|&i| (i, j, scale)));
                            patterns.insert(rows);
                            break;
                        }
                    }
                }
            }
            RawMatrix::sparse_from_triplets(n, p, triplets)?
        }
    };

    let k = spec.n_nonzero();
    let mut beta = vec![0.0; p];
    for (i, b) in beta.iter_mut().take(k).enumerate() {
        *b = match spec.coef_scheme {
            CoefScheme::GaussianValues => StandardNormal.sample(&mut rng),
            CoefScheme::Pm2 => {
                if rng.random::<bool>() {
                    2.0
                } else {
                    -2.0
                }
            }
            CoefScheme::AlternatingEqual => {
                if i % 2 == 0 {
                    1.0
                } else {
                    -1.0
                }
            }
            CoefScheme::PositiveDecreasing => (k - i) as f64 / k as f64,
        };
    }

    let design = DesignMatrix::from_raw(x.clone());
    let signal = design.mul_coefs(&Coefficients::from_dense(&beta))?;
    let y = match spec.family {
        Family::Gaussian => {
            let mean = signal.iter().sum::<f64>() / n as f64;
            let var = signal.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / n as f64;
            let sigma = if var > 0.0 { (var / spec.snr).sqrt() } else { 1.0 };
            signal
                .iter()
                .map(|s| {
                    let e: f64 = StandardNormal.sample(&mut rng);
                    s + sigma * e
                })
                .collect()
        }
        Family::Binomial => signal
            .iter()
            .map(|s| {
                let prob = 1.0 / (1.0 + (-s).exp());
                if rng.random::<f64>() < prob {
                    1.0
                } else {
                    0.0
                }
            })
            .collect(),
    };
    Ok(Simulated { x, y, beta })
}

/// One output row. Empty cells are `None`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExperimentRow {
    pub scenario: String,
    pub seed: Option<u64>,
    pub lambda: Option<f64>,
    pub pve: Option<f64>,
    pub rule: Option<String>,
    pub strategy: Option<String>,
    pub survivors: Option<f64>,
    pub violations: Option<f64>,
    pub seconds: Option<f64>,
}

pub const CSV_HEADER: [&str; 9] = [
    "scenario",
    "seed",
    "lambda",
    "pve",
    "rule",
    "strategy",
    "survivors",
    "violations",
    "seconds",
];

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExperimentResult {
    pub rows: Vec<ExperimentRow>,
}

fn cell<T: fmt::Display>(v: &Option<T>) -> String {
    v.as_ref().map(|x| x.to_string()).unwrap_or_default()
}

impl ExperimentResult {
    pub fn extend(&mut self, other: ExperimentResult) {
        self.rows.extend(other.rows);
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(CSV_HEADER)?;
        for r in &self.rows {
            w.write_record([
                r.scenario.clone(),
                cell(&r.seed),
                cell(&r.lambda),
                cell(&r.pve),
                cell(&r.rule),
                cell(&r.strategy),
                cell(&r.survivors),
                cell(&r.violations),
                cell(&r.seconds),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }

    /// Rows whose rule column equals `rule`.
    pub fn rule_rows<'a>(&'a self, rule: &'a str) -> impl Iterator<Item = &'a ExperimentRow> + 'a {
        self.rows.iter().filter(move |r| r.rule.as_deref() == Some(rule))
    }
}

/// A prepared problem: standardized data, its grid and exact path.
struct Truth {
    data: Standardized,
    grid: LambdaGrid,
    path: PathSolution,
}

fn exact_path(spec: &SimSpec, config: &SolverConfig, mode: StandardizeMode) -> Result<Truth> {
    let sim = simulate(spec)?;
    let data = sim.prepare(mode, spec.family)?;
    let cfg = config.clone().with_strategy(Strategy::Naive);
    let (grid, path) = match spec.family {
        Family::Gaussian => {
            let grid = lasso::default_grid(&data.x, &data.y, &cfg)?;
            let path = lasso::solve_path(&data.x, &data.y, &grid, &cfg)?;
            (grid, path)
        }
        Family::Binomial => {
            let grid = logistic::default_logistic_grid(&data.x, &data.y, &cfg)?;
            let path = logistic::solve_path_logistic(&data.x, &data.y, &grid, &cfg)?;
            (grid, path)
        }
    };
    if !path.all_converged() {
        let sweeps = path.steps.iter().map(|s| s.sweeps).max().unwrap_or(0);
        return Err(Error::MaxSweepsExceeded { sweeps });
    }
    Ok(Truth { data, grid, path })
}

fn sigmoid(eta: f64) -> f64 {
    1.0 / (1.0 + (-eta).exp())
}

/// Statistic vector for the sequential rules: `x_jᵀ(y - fit)` at a solution.
fn score_at(x: &DesignMatrix, y: &ResponseVector, coefs: &Coefficients, family: Family) -> Result<Vec<f64>> {
    let r = match family {
        Family::Gaussian => residual(x, y, coefs)?,
        Family::Binomial => {
            let eta = x.mul_coefs(coefs)?;
            y.values()
                .iter()
                .zip(&eta)
                .map(|(yi, e)| yi - sigmoid(e + coefs.intercept))
                .collect()
        }
    };
    x.inner_products(&r)
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Fraction of variance explained, `1 - ‖y - Xβ‖²/‖y‖²`; for binomial
/// responses the deviance ratio against the intercept-only model.
fn pve(x: &DesignMatrix, y: &ResponseVector, coefs: &Coefficients, family: Family) -> Result<f64> {
    match family {
        Family::Gaussian => {
            let r = residual(x, y, coefs)?;
            let yy: f64 = y.values().iter().map(|v| v * v).sum();
            Ok(1.0 - r.iter().map(|v| v * v).sum::<f64>() / yy)
        }
        Family::Binomial => {
            let ybar = y.mean();
            let null = Coefficients::zeros(x.n_cols());
            let dev0 = logistic::logistic_objective(x, y, (ybar / (1.0 - ybar)).ln(), &null, 0.0)?;
            let dev = logistic::logistic_objective(x, y, coefs.intercept, coefs, 0.0)?;
            Ok(1.0 - dev / dev0)
        }
    }
}

/// Number of predictors each rule keeps along the exact path, with the
/// count of rule violations (discarded but nonzero). Extra rows with rule
/// `active` and `ever_active` give the solution's support sizes.
pub fn survivor_curves(
    spec: &SimSpec,
    rules: &[RuleId],
    config: &SolverConfig,
    mode: StandardizeMode,
    scenario: &str,
) -> Result<ExperimentResult> {
    let truth = exact_path(spec, config, mode)?;
    let (x, y) = (&truth.data.x, &truth.data.y);
    let family = spec.family;
    let alpha = config.alpha;
    let lambda_max = truth.grid.lambda_max();
    let null = Coefficients::zeros(x.n_cols());
    let mut null_fit = null.clone();
    if family == Family::Binomial {
        let ybar = y.mean();
        null_fit.intercept = (ybar / (1.0 - ybar)).ln();
    }
    let c0: Vec<f64> = score_at(x, y, &null_fit, family)?.iter().map(|v| v.abs()).collect();
    let target0: Vec<f64> = match family {
        Family::Gaussian => y.values().to_vec(),
        Family::Binomial => {
            let ybar = y.mean();
            y.values().iter().map(|v| v - ybar).collect()
        }
    };
    let y_norm = norm(&target0);
    let norms = x.col_norms().to_vec();

    let mut result = ExperimentResult::default();
    let mut prev = null_fit;
    let mut ever = vec![false; x.n_cols()];
    for (k, step) in truth.path.steps.iter().enumerate() {
        let lambda = step.lambda;
        let lambda_prev = truth.grid.previous(k);
        let prev_scores: Vec<f64> = score_at(x, y, &prev, family)?.iter().map(|v| v.abs()).collect();
        let prev_resid_norm = match family {
            Family::Gaussian => norm(&residual(x, y, &prev)?),
            Family::Binomial => y_norm,
        };
        let pve = pve(x, y, &step.coefs, family)?;
        for &rule in rules {
            let mask = match rule {
                RuleId::SafeBasic => screening::safe_basic(&c0, lambda * alpha, lambda_max * alpha, &norms, y_norm),
                RuleId::StrongBasic => screening::strong_basic(&c0, lambda, lambda_max),
                RuleId::StrongSequential => screening::strong_sequential(&prev_scores, lambda, lambda_prev),
                RuleId::SafeEN => screening::safe_en(
                    &c0,
                    alpha * lambda,
                    (1.0 - alpha) * lambda,
                    &norms,
                    y_norm,
                    alpha * lambda_max,
                ),
                RuleId::StrongENGlobal => screening::strong_en(&c0, lambda, lambda_max, alpha, false),
                RuleId::StrongENSequential => screening::strong_en(&prev_scores, lambda, lambda_prev, alpha, true),
                RuleId::StrongLogisticGlobal => screening::strong_logistic(&c0, lambda, lambda_max, false),
                RuleId::StrongLogisticSequential => {
                    screening::strong_logistic(&prev_scores, lambda, lambda_prev, true)
                }
                RuleId::SeqSafeExperimental => {
                    screening::seq_safe_experimental(&prev_scores, lambda, &norms, prev_resid_norm).0
                }
                RuleId::StrongGeneral => {
                    let mut inputs = RuleInputs::new(prev_scores.clone(), lambda, lambda_prev);
                    inputs.a = 1.0;
                    screening::apply_rule(rule, &inputs)?
                }
                RuleId::StrongGroup | RuleId::GlassoRow | RuleId::GlassoElement => {
                    return Err(Error::InvalidConfig(format!(
                        "rule {rule} does not apply to predictor survivor curves"
                    )))
                }
            };
            let violations = step.coefs.iter().filter(|&(j, _)| mask.is_discarded(j)).count();
            result.rows.push(ExperimentRow {
                scenario: scenario.to_string(),
                seed: Some(spec.seed),
                lambda: Some(lambda),
                pve: Some(pve),
                rule: Some(rule.name().to_string()),
                strategy: Some(Strategy::Naive.name().to_string()),
                survivors: Some(mask.n_kept() as f64),
                violations: Some(violations as f64),
                seconds: None,
            });
        }
        let ever_count = ever.iter().filter(|e| **e).count();
        for (name, count) in [("active", step.coefs.nnz()), ("ever_active", ever_count)] {
            result.rows.push(ExperimentRow {
                scenario: scenario.to_string(),
                seed: Some(spec.seed),
                lambda: Some(lambda),
                pve: Some(pve),
                rule: Some(name.to_string()),
                strategy: Some(Strategy::Naive.name().to_string()),
                survivors: Some(count as f64),
                violations: None,
                seconds: None,
            });
        }
        for (j, _) in step.coefs.iter() {
            ever[j] = true;
        }
        prev = step.coefs.clone();
    }
    Ok(result)
}

/// Strong sequential rule violations for one replicate, per grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicateViolations {
    pub seed: u64,
    pub lambdas: Vec<f64>,
    pub pve: Vec<f64>,
    pub violations: Vec<usize>,
    /// Whether the independent count matches the solver's own telemetry.
    pub telemetry_agrees: bool,
}

/// Counts strong sequential violations along the exact path of one replicate,
/// independently of the path solver, and cross-checks against its telemetry.
pub fn replicate_violations(
    spec: &SimSpec,
    config: &SolverConfig,
    mode: StandardizeMode,
) -> Result<ReplicateViolations> {
    let truth = exact_path(spec, config, mode)?;
    let (x, y) = (&truth.data.x, &truth.data.y);
    let mut prev = Coefficients::zeros(x.n_cols());
    if spec.family == Family::Binomial {
        let ybar = y.mean();
        prev.intercept = (ybar / (1.0 - ybar)).ln();
    }
    let mut out = ReplicateViolations {
        seed: spec.seed,
        lambdas: Vec::new(),
        pve: Vec::new(),
        violations: Vec::new(),
        telemetry_agrees: true,
    };
    for (k, step) in truth.path.steps.iter().enumerate() {
        let scores: Vec<f64> = score_at(x, y, &prev, spec.family)?.iter().map(|v| v.abs()).collect();
        let threshold = 2.0 * step.lambda - truth.grid.previous(k);
        let count = step
            .coefs
            .iter()
            .filter(|&(j, _)| scores[j] < threshold)
            .count();
        if count != step.rule_violations {
            out.telemetry_agrees = false;
        }
        out.lambdas.push(step.lambda);
        out.pve.push(pve(x, y, &step.coefs, spec.family)?);
        out.violations.push(count);
        prev = step.coefs.clone();
    }
    Ok(out)
}

/// Averaged violation counts for one `p`.
#[derive(Debug, Clone, PartialEq)]
pub struct ViolationSummary {
    pub p: usize,
    pub replicates: Vec<ReplicateViolations>,
}

impl ViolationSummary {
    /// Mean over replicates of the violations at each grid point.
    pub fn mean_per_point(&self) -> Vec<f64> {
        let m = self.replicates.len() as f64;
        let len = self.replicates.first().map_or(0, |r| r.violations.len());
        (0..len)
            .map(|k| self.replicates.iter().map(|r| r.violations[k] as f64).sum::<f64>() / m)
            .collect()
    }

    pub fn max_mean_per_point(&self) -> f64 {
        self.mean_per_point().into_iter().fold(0.0, f64::max)
    }

    pub fn total(&self) -> usize {
        self.replicates
            .iter()
            .map(|r| r.violations.iter().sum::<usize>())
            .sum()
    }

    pub fn telemetry_agrees(&self) -> bool {
        self.replicates.iter().all(|r| r.telemetry_agrees)
    }
}

/// Seed of replicate `rep`; replicate seeds are shared across values of `p`.
pub fn replicate_seed(base: u64, rep: usize) -> u64 {
    base.wrapping_add(rep as u64)
}

/// Runs `reps` replicates for each `p`, in parallel across replicates.
pub fn violation_study(
    template: &SimSpec,
    p_list: &[usize],
    reps: usize,
    config: &SolverConfig,
    mode: StandardizeMode,
) -> Result<Vec<ViolationSummary>> {
    if reps == 0 {
        return Err(Error::InvalidSpec("reps must be at least 1".into()));
    }
    p_list
        .iter()
        .map(|&p| {
            let replicates = (0..reps)
                .into_par_iter()
                .map(|r| {
                    let spec = template.with_p(p).with_seed(replicate_seed(template.seed, r));
                    replicate_violations(&spec, config, mode)
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(ViolationSummary { p, replicates })
        })
        .collect()
}

/// CSV rows for a violation study: one row per `p` and grid point, with the
/// mean λ, mean pve and mean violation count over replicates.
pub fn violation_rows(summaries: &[ViolationSummary], scenario: &str, seed: u64) -> ExperimentResult {
    let mut result = ExperimentResult::default();
    for s in summaries {
        let m = s.replicates.len() as f64;
        let means = s.mean_per_point();
        for (k, mean) in means.iter().enumerate() {
            let lambda = s.replicates.iter().map(|r| r.lambdas[k]).sum::<f64>() / m;
            let pve = s.replicates.iter().map(|r| r.pve[k]).sum::<f64>() / m;
            result.rows.push(ExperimentRow {
                scenario: format!("{scenario}_p{}", s.p),
                seed: Some(seed),
                lambda: Some(lambda),
                pve: Some(pve),
                rule: Some(RuleId::StrongSequential.name().to_string()),
                strategy: Some(Strategy::Naive.name().to_string()),
                survivors: None,
                violations: Some(*mean),
                seconds: None,
            });
        }
    }
    result
}

/// Times the full path under each strategy on the same data. Every path must
/// match the first one to `tolerance` per coefficient, otherwise the
/// benchmark fails with [`Error::MismatchedSolutions`].
pub fn timing_bench(
    spec: &SimSpec,
    strategies: &[Strategy],
    config: &SolverConfig,
    mode: StandardizeMode,
    scenario: &str,
    tolerance: f64,
) -> Result<ExperimentResult> {
    let sim = simulate(spec)?;
    let data = sim.prepare(mode, spec.family)?;
    let (x, y) = (&data.x, &data.y);
    let grid = match spec.family {
        Family::Gaussian => lasso::default_grid(x, y, config)?,
        Family::Binomial => logistic::default_logistic_grid(x, y, config)?,
    };
    let mut result = ExperimentResult::default();
    let mut reference: Option<PathSolution> = None;
    for &strategy in strategies {
        let cfg = config.clone().with_strategy(strategy);
        let start = Instant::now();
        let path = match spec.family {
            Family::Gaussian => lasso::solve_path(x, y, &grid, &cfg)?,
            Family::Binomial => logistic::solve_path_logistic(x, y, &grid, &cfg)?,
        };
        let seconds = start.elapsed().as_secs_f64();
        if !path.all_converged() {
            let sweeps = path.steps.iter().map(|s| s.sweeps).max().unwrap_or(0);
            return Err(Error::MaxSweepsExceeded { sweeps });
        }
        match &reference {
            None => reference = Some(path.clone()),
            Some(r) => {
                let deviation = r.max_deviation(&path);
                if deviation > tolerance {
                    return Err(Error::MismatchedSolutions { deviation });
                }
            }
        }
        let last = path.steps.last().expect("non-empty grid");
        result.rows.push(ExperimentRow {
            scenario: scenario.to_string(),
            seed: Some(spec.seed),
            lambda: Some(last.lambda),
            pve: Some(pve(x, y, &last.coefs, spec.family)?),
            rule: None,
            strategy: Some(strategy.name().to_string()),
            survivors: Some(path.steps.iter().map(|s| s.eligible_size).sum::<usize>() as f64 / path.steps.len() as f64),
            violations: Some(path.total_rule_violations() as f64),
            seconds: Some(seconds),
        });
    }
    Ok(result)
}

/// Result of scanning seeds for slope-bound violations.
#[derive(Debug, Clone, PartialEq)]
pub struct SlopeScanEntry {
    pub seed: u64,
    pub max_abs_slope: f64,
    pub flagged_segments: usize,
    pub sequential_violations: usize,
    pub linked: bool,
}

/// Pure-noise design of the slope counter-example: `n × p` i.i.d. standard
/// normal `X` and `y`, standardized, solved on a fine linear grid.
pub fn slope_scan(
    n: usize,
    p: usize,
    seeds: std::ops::Range<u64>,
    grid_size: usize,
    grid_ratio: f64,
) -> Result<Vec<SlopeScanEntry>> {
    let seeds: Vec<u64> = seeds.collect();
    seeds
        .into_par_iter()
        .map(|seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let data: Vec<f64> = (0..n * p).map(|_| StandardNormal.sample(&mut rng)).collect();
            let y: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
            let raw = RawMatrix::dense(n, p, data)?;
            let s = crate::design::standardize(&raw, &y, StandardizeMode::CenterAndScale)?;
            let cfg = SolverConfig {
                grid_size,
                grid_ratio,
                spacing: crate::grid::GridSpacing::Linear,
                ..SolverConfig::default()
            };
            let grid = lasso::default_grid(&s.x, &s.y, &cfg)?;
            let trace = guarantees::slope_monitor(&s.x, &s.y, &grid, &cfg)?;
            Ok(SlopeScanEntry {
                seed,
                max_abs_slope: trace.max_abs_slope,
                flagged_segments: trace.violating_segments.len(),
                sequential_violations: trace.sequential_violations.len(),
                linked: trace.violations_explained_by_slopes(),
            })
        })
        .collect()
}

pub fn slope_rows(entries: &[SlopeScanEntry], scenario: &str) -> ExperimentResult {
    let mut result = ExperimentResult::default();
    for e in entries {
        result.rows.push(ExperimentRow {
            scenario: scenario.to_string(),
            seed: Some(e.seed),
            rule: Some("slope_bound".into()),
            strategy: Some(Strategy::Naive.name().to_string()),
            violations: Some(e.flagged_segments as f64),
            ..ExperimentRow::default()
        });
        result.rows.push(ExperimentRow {
            scenario: scenario.to_string(),
            seed: Some(e.seed),
            rule: Some(RuleId::StrongSequential.name().to_string()),
            strategy: Some(Strategy::Naive.name().to_string()),
            violations: Some(e.sequential_violations as f64),
            ..ExperimentRow::default()
        });
    }
    result
}

/// Graphical-lasso survivor curves on independent Gaussian data: rows kept
/// by the global and sequential row rules, and rows with at least one edge.
pub fn glasso_survivors(
    n: usize,
    p: usize,
    seed: u64,
    config: &GlassoConfig,
    scenario: &str,
) -> Result<ExperimentResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..p).map(|_| StandardNormal.sample(&mut rng)).collect())
        .collect();
    let s = glasso::empirical_covariance(&rows)?;
    let grid = glasso::default_glasso_grid(&s, config)?;
    let path = glasso::solve_glasso_path(&s, &grid, config, GlassoScreening::RowWise)?;
    let mut result = ExperimentResult::default();
    for step in &path.steps {
        let connected = p - step.pair.isolated_rows().len();
        let entries = [
            ("glasso_row_global", p - step.discarded_rows_global, None),
            (RuleId::GlassoRow.name(), p - step.discarded_rows, Some(step.rule_violations as f64)),
            ("active", connected, None),
        ];
        for (rule, survivors, violations) in entries {
            result.rows.push(ExperimentRow {
                scenario: scenario.to_string(),
                seed: Some(seed),
                lambda: Some(step.lambda),
                pve: None,
                rule: Some(rule.to_string()),
                strategy: Some(GlassoScreening::RowWise.name().to_string()),
                survivors: Some(survivors as f64),
                violations,
                seconds: None,
            });
        }
    }
    Ok(result)
}
