//! Command-line interface: `fit`, `screen` and `experiment`.
//!
//! Input formats:
//!
//! * CSV: one observation per line, comma separated, numbers only. With
//!   `--header` the first line is skipped. The first column is the response
//!   and the remaining columns are predictors. For `--family glasso` every
//!   column is a variable and there is no response.
//! * svmlight: `label idx:val idx:val ...` per line, indices 1-based and
//!   strictly increasing, omitted entries are zero, `#` starts a comment.
//!
//! Coefficient output is CSV `lambda,predictor,value` with one row per
//! nonzero coefficient. Predictors are 1-based, `0` is the intercept, and
//! precision-matrix entries are written as `i:j` (upper triangle).
//!
//! Exit codes: 0 success, 1 usage or I/O error, 2 non-convergence.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::coef::Coefficients;
use crate::design::{DesignMatrix, ResponseVector, StandardizeMode, Standardized};
use crate::error::{Error, Result};
use crate::experiments::{
    self, CoefScheme, DesignKind, ExperimentResult, ExperimentRow, Family, SimSpec,
};
use crate::glasso::{self, GlassoConfig, GlassoScreening};
use crate::grid::GridSpacing;
use crate::group::{self, GroupSpec};
use crate::io::{self, CoefRecord, DataFormat};
use crate::lasso::{self, SolverConfig};
use crate::logistic;
use crate::path::{PathSolution, Strategy};
use crate::screening::{self, RuleId, RuleInputs, ScreenMask, Threshold};

pub const SEED_ENV: &str = "STRONGSCREEN_SEED";

#[derive(Debug, Parser)]
#[command(name = "strongscreen", version, about = "Screened lasso-type regularization paths")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a regularization path and write coefficients.
    Fit(FitArgs),
    /// Evaluate screening rules at one penalty without fitting.
    Screen(ScreenArgs),
    /// Run a simulation experiment and write result rows.
    Experiment(ExperimentArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    Gaussian,
    Binomial,
    Group,
    Glasso,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StandardizeArg {
    None,
    Center,
    Scale,
}

impl From<StandardizeArg> for StandardizeMode {
    fn from(s: StandardizeArg) -> Self {
        match s {
            StandardizeArg::None => StandardizeMode::None,
            StandardizeArg::Center => StandardizeMode::CenterOnly,
            StandardizeArg::Scale => StandardizeMode::CenterAndScale,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SpacingArg {
    Log,
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GlassoRuleArg {
    Row,
    Element,
    None,
}

#[derive(Debug, Args)]
pub struct DataArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value = "csv", value_parser = parse_format)]
    pub format: DataFormat,
    /// Skip the first CSV line.
    #[arg(long)]
    pub header: bool,
    #[arg(long, value_enum, default_value_t = StandardizeArg::Scale)]
    pub standardize: StandardizeArg,
    /// Comma-separated group sizes for `--family group`.
    #[arg(long, value_delimiter = ',')]
    pub group_sizes: Vec<usize>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[arg(long, value_enum, default_value_t = FamilyArg::Gaussian)]
    pub family: FamilyArg,
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long)]
    pub nlambda: Option<usize>,
    #[arg(long)]
    pub lambda_min_ratio: Option<f64>,
    #[arg(long, value_enum, default_value_t = SpacingArg::Log)]
    pub spacing: SpacingArg,
    /// Elastic-net mixing parameter (Gaussian family).
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long, default_value = "combined", value_parser = parse_strategy)]
    pub strategy: Strategy,
    #[arg(long, value_enum, default_value_t = GlassoRuleArg::Row)]
    pub glasso_rule: GlassoRuleArg,
    #[arg(long)]
    pub max_sweeps: Option<usize>,
    #[arg(long)]
    pub cd_tolerance: Option<f64>,
    #[arg(long)]
    pub kkt_tolerance: Option<f64>,
    /// Report coefficients on the standardized scale.
    #[arg(long)]
    pub standardized_coefs: bool,
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Per-penalty telemetry CSV.
    #[arg(long)]
    pub telemetry: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ScreenArgs {
    #[arg(long, value_enum, default_value_t = FamilyArg::Gaussian)]
    pub family: FamilyArg,
    #[command(flatten)]
    pub data: DataArgs,
    /// Rule ids, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub rule: Vec<String>,
    #[arg(long, conflicts_with = "lambda_frac")]
    pub lambda: Option<f64>,
    /// Penalty as a fraction of `λmax`.
    #[arg(long)]
    pub lambda_frac: Option<f64>,
    /// Previous penalty for sequential rules; defaults to `λmax`. Below `λmax`
    /// the model is fit there to form the residual.
    #[arg(long)]
    pub lambda_prev: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    /// Slope bound for the general strong rule.
    #[arg(long, default_value_t = 1.0)]
    pub slope: f64,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExperimentKind {
    Survivors,
    Violations,
    Timing,
    StrongSets,
    Slope,
    Glasso,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SimFamilyArg {
    Gaussian,
    Binomial,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// Desk-scale preset for a figure: 1, 3, 4, 5, 6 or 7.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=7))]
    pub paper_figure: Option<u8>,
    #[arg(long, value_enum)]
    pub kind: Option<ExperimentKind>,
    #[arg(long)]
    pub scenario: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub p: Option<usize>,
    /// Values of p for the violation study, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub p_list: Vec<usize>,
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long)]
    pub nonzero_frac: Option<f64>,
    #[arg(long, value_parser = parse_scheme)]
    pub coef_scheme: Option<CoefScheme>,
    #[arg(long)]
    pub snr: Option<f64>,
    /// Use a sparse 0/1 design with this density.
    #[arg(long)]
    pub density: Option<f64>,
    #[arg(long)]
    pub scale_spread: Option<f64>,
    #[arg(long, value_enum)]
    pub family: Option<SimFamilyArg>,
    #[arg(long, value_enum)]
    pub standardize: Option<StandardizeArg>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub nlambda: Option<usize>,
    #[arg(long)]
    pub lambda_min_ratio: Option<f64>,
    /// Rule ids for survivor curves, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub rule: Vec<String>,
    #[arg(long, value_delimiter = ',', value_parser = parse_strategy)]
    pub strategy: Vec<Strategy>,
    #[arg(long)]
    pub reps: Option<usize>,
    /// Falls back to the STRONGSCREEN_SEED environment variable.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

fn parse_format(s: &str) -> std::result::Result<DataFormat, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_strategy(s: &str) -> std::result::Result<Strategy, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_scheme(s: &str) -> std::result::Result<CoefScheme, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Exit code for a library error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::MaxSweepsExceeded { .. } | Error::NotConverged { .. } => 2,
        _ => 1,
    }
}

/// Parses `args` (including the program name) and runs the command, writing
/// results to `out` unless an `--output` path is given.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let rendered = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(err, "{rendered}");
            } else {
                let _ = write!(out, "{rendered}");
            }
            return code;
        }
    };
    let result = match &cli.command {
        Command::Fit(a) => cmd_fit(a, out),
        Command::Screen(a) => cmd_screen(a, out),
        Command::Experiment(a) => cmd_experiment(a, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn with_output<F>(path: Option<&PathBuf>, out: &mut dyn Write, f: F) -> Result<()>
where
    F: FnOnce(&mut dyn Write) -> Result<()>,
{
    match path {
        Some(p) if p.as_os_str() != "-" => {
            let mut w = io::output_writer(Some(p))?;
            f(&mut *w)?;
            w.flush()?;
            Ok(())
        }
        _ => f(out),
    }
}

fn load_regression(data: &DataArgs, family: FamilyArg) -> Result<Standardized> {
    let ds = io::read_dataset(&data.input, data.format, data.header)?;
    let mode = StandardizeMode::from(data.standardize);
    let fam = match family {
        FamilyArg::Binomial => Family::Binomial,
        _ => Family::Gaussian,
    };
    experiments::Simulated {
        x: ds.x,
        y: ds.y,
        beta: Vec::new(),
    }
    .prepare(mode, fam)
}

fn group_spec(data: &DataArgs, p: usize) -> Result<GroupSpec> {
    if data.group_sizes.is_empty() {
        return Err(Error::InvalidConfig("--family group requires --group-sizes".into()));
    }
    GroupSpec::from_sizes(&data.group_sizes, p)
}

fn solver_config(nlambda: Option<usize>, ratio: Option<f64>, n: usize, p: usize) -> SolverConfig {
    let mut cfg = SolverConfig::for_shape(n, p);
    if let Some(k) = nlambda {
        cfg.grid_size = k;
    }
    if let Some(r) = ratio {
        cfg.grid_ratio = r;
    }
    cfg
}

fn write_telemetry(path: &PathBuf, sol: &PathSolution) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "lambda",
        "strong_set_size",
        "ever_active_size",
        "eligible_size",
        "kkt_violations_strong",
        "kkt_violations_full",
        "rule_violations",
        "sweeps",
        "converged",
    ])?;
    for s in &sol.steps {
        w.write_record([
            s.lambda.to_string(),
            s.strong_set_size.to_string(),
            s.ever_active_size.to_string(),
            s.eligible_size.to_string(),
            s.kkt_violations_strong.to_string(),
            s.kkt_violations_full.to_string(),
            s.rule_violations.to_string(),
            s.sweeps.to_string(),
            s.converged.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn write_glasso_telemetry(path: &PathBuf, sol: &glasso::GlassoPath) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "lambda",
        "discarded_rows",
        "discarded_rows_global",
        "discarded_elements",
        "rule_violations",
        "repairs",
        "cycles",
        "max_offdiag_residual",
    ])?;
    for s in &sol.steps {
        w.write_record([
            s.lambda.to_string(),
            s.discarded_rows.to_string(),
            s.discarded_rows_global.to_string(),
            s.discarded_elements.to_string(),
            s.rule_violations.to_string(),
            s.repairs.to_string(),
            s.cycles.to_string(),
            s.check.max_offdiag_residual.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn cmd_fit(args: &FitArgs, out: &mut dyn Write) -> Result<i32> {
    let spacing = match args.spacing {
        SpacingArg::Log => GridSpacing::Log,
        SpacingArg::Linear => GridSpacing::Linear,
    };
    if args.family == FamilyArg::Glasso {
        let rows = io::read_csv_rows(&args.data.input, args.data.header)?;
        let s = glasso::empirical_covariance(&rows)?;
        let mut cfg = GlassoConfig {
            spacing,
            ..GlassoConfig::default()
        };
        if let Some(k) = args.nlambda {
            cfg.grid_size = k;
        }
        if let Some(r) = args.lambda_min_ratio {
            cfg.grid_ratio = r;
        }
        if let Some(v) = args.max_sweeps {
            cfg.max_cycles = v;
        }
        if let Some(v) = args.cd_tolerance {
            cfg.tolerance = v;
        }
        if let Some(v) = args.kkt_tolerance {
            cfg.kkt_tolerance = v;
        }
        let rule = match args.glasso_rule {
            GlassoRuleArg::Row => GlassoScreening::RowWise,
            GlassoRuleArg::Element => GlassoScreening::Elementwise,
            GlassoRuleArg::None => GlassoScreening::None,
        };
        let grid = glasso::default_glasso_grid(&s, &cfg)?;
        let path = glasso::solve_glasso_path(&s, &grid, &cfg, rule)?;
        let records: Vec<CoefRecord> = path
            .steps
            .iter()
            .flat_map(|st| io::precision_records(st.lambda, &st.pair.theta))
            .collect();
        with_output(args.output.as_ref(), out, |w| io::write_coef_records(w, &records))?;
        if let Some(t) = &args.telemetry {
            write_glasso_telemetry(t, &path)?;
        }
        return Ok(0);
    }

    let data = load_regression(&args.data, args.family)?;
    let (x, y) = (&data.x, &data.y);
    let mut cfg = solver_config(args.nlambda, args.lambda_min_ratio, x.n_rows(), x.n_cols());
    cfg.spacing = spacing;
    cfg.strategy = args.strategy;
    cfg.alpha = args.alpha;
    if let Some(v) = args.max_sweeps {
        cfg.max_sweeps = v;
    }
    if let Some(v) = args.cd_tolerance {
        cfg.cd_tolerance = v;
    }
    if let Some(v) = args.kkt_tolerance {
        cfg.kkt_tolerance = v;
    }
    cfg.validate()?;
    let path = match args.family {
        FamilyArg::Gaussian => {
            let grid = lasso::default_grid(x, y, &cfg)?;
            lasso::solve_path(x, y, &grid, &cfg)?
        }
        FamilyArg::Binomial => {
            let grid = logistic::default_logistic_grid(x, y, &cfg)?;
            logistic::solve_path_logistic(x, y, &grid, &cfg)?
        }
        FamilyArg::Group => {
            let groups = group_spec(&args.data, x.n_cols())?;
            let grid = group::default_group_grid(x, y, &groups, &cfg)?;
            group::solve_group_path(x, y, &groups, &grid, &cfg)?
        }
        FamilyArg::Glasso => unreachable!(),
    };
    let transform = (!args.standardized_coefs).then_some(&data.transform);
    let records: Vec<CoefRecord> = path
        .steps
        .iter()
        .flat_map(|s| io::coef_records(s.lambda, &s.coefs, transform))
        .collect();
    with_output(args.output.as_ref(), out, |w| io::write_coef_records(w, &records))?;
    if let Some(t) = &args.telemetry {
        write_telemetry(t, &path)?;
    }
    Ok(if path.all_converged() { 0 } else { 2 })
}

fn abs_scores(x: &DesignMatrix, r: &[f64]) -> Result<Vec<f64>> {
    Ok(x.inner_products(r)?.iter().map(|v| v.abs()).collect())
}

fn group_norms(c: &[f64], groups: &GroupSpec) -> Vec<f64> {
    (0..groups.n_groups())
        .map(|g| c[groups.range(g)].iter().map(|v| v * v).sum::<f64>().sqrt())
        .collect()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn sigmoid(eta: f64) -> f64 {
    1.0 / (1.0 + (-eta).exp())
}

/// Target vector (residual or score residual) of the fit at `lambda_prev`,
/// or at the null model when `lambda_prev >= lambda_max`.
fn sequential_target(
    args: &ScreenArgs,
    x: &DesignMatrix,
    y: &ResponseVector,
    lambda_prev: f64,
    lambda_max: f64,
    groups: Option<&GroupSpec>,
) -> Result<Vec<f64>> {
    let ybar = y.mean();
    let null_target = || -> Vec<f64> {
        match args.family {
            FamilyArg::Binomial => y.values().iter().map(|v| v - ybar).collect(),
            _ => y.values().to_vec(),
        }
    };
    if lambda_prev >= lambda_max {
        return Ok(null_target());
    }
    let cfg = SolverConfig::for_shape(x.n_rows(), x.n_cols());
    let zero = Coefficients::zeros(x.n_cols());
    let all: Vec<usize> = (0..x.n_cols()).collect();
    let coefs: Coefficients = match args.family {
        FamilyArg::Gaussian => {
            let fit = lasso::coord_descent(
                x,
                y,
                args.alpha * lambda_prev,
                (1.0 - args.alpha) * lambda_prev,
                &zero,
                &all,
                &cfg,
            )?;
            fit.require_converged()?.coefs
        }
        FamilyArg::Binomial => {
            let st = logistic::fit_logistic(
                x,
                y,
                lambda_prev,
                &logistic::LogisticState::null(x.n_cols(), y)?,
                &all,
                &cfg,
            )?;
            let eta = x.mul_coefs(&st.beta)?;
            return Ok(y
                .values()
                .iter()
                .zip(&eta)
                .map(|(yi, e)| yi - sigmoid(e + st.intercept))
                .collect());
        }
        FamilyArg::Group => {
            group::group_block_descent(x, y, groups.expect("group spec"), lambda_prev, &zero, &cfg)?
        }
        FamilyArg::Glasso => unreachable!(),
    };
    crate::design::residual(x, y, &coefs)
}

fn is_sequential(rule: RuleId) -> bool {
    matches!(
        rule,
        RuleId::StrongSequential
            | RuleId::StrongENSequential
            | RuleId::StrongLogisticSequential
            | RuleId::StrongGeneral
            | RuleId::SeqSafeExperimental
            | RuleId::StrongGroup
    )
}

pub fn cmd_screen(args: &ScreenArgs, out: &mut dyn Write) -> Result<i32> {
    let rules = args
        .rule
        .iter()
        .map(|r| r.parse::<RuleId>())
        .collect::<Result<Vec<_>>>()?;
    if args.family == FamilyArg::Glasso {
        return Err(Error::InvalidConfig(
            "screen works on regression data; use fit --family glasso for covariance screening".into(),
        ));
    }
    let data = load_regression(&args.data, args.family)?;
    let (x, y) = (&data.x, &data.y);
    let groups = if args.family == FamilyArg::Group {
        Some(group_spec(&args.data, x.n_cols())?)
    } else {
        None
    };
    if !(args.alpha > 0.0 && args.alpha <= 1.0) {
        return Err(Error::InvalidConfig(format!("alpha must lie in (0, 1], got {}", args.alpha)));
    }
    let lambda_max = match args.family {
        FamilyArg::Gaussian => lasso::path_lambda_max(x, y, args.alpha)?,
        FamilyArg::Binomial => logistic::logistic_lambda_max(x, y)?,
        FamilyArg::Group => group::group_lambda_max(x, y, groups.as_ref().expect("groups"))?,
        FamilyArg::Glasso => unreachable!(),
    };
    let lambda = match (args.lambda, args.lambda_frac) {
        (Some(l), _) => l,
        (None, Some(f)) => f * lambda_max,
        (None, None) => {
            return Err(Error::InvalidConfig("one of --lambda or --lambda-frac is required".into()))
        }
    };
    let lambda_prev = args.lambda_prev.unwrap_or(lambda_max);
    if !(lambda > 0.0) || lambda_prev < lambda {
        return Err(Error::InvalidConfig(format!(
            "need 0 < lambda <= lambda-prev, got lambda={lambda} lambda-prev={lambda_prev}"
        )));
    }

    let null_target: Vec<f64> = match args.family {
        FamilyArg::Binomial => {
            let ybar = y.mean();
            y.values().iter().map(|v| v - ybar).collect()
        }
        _ => y.values().to_vec(),
    };
    let c0 = abs_scores(x, &null_target)?;
    let needs_seq = rules.iter().any(|r| is_sequential(*r));
    let seq_target = if needs_seq {
        sequential_target(args, x, y, lambda_prev, lambda_max, groups.as_ref())?
    } else {
        null_target.clone()
    };
    let c_seq = abs_scores(x, &seq_target)?;
    let norms = x.col_norms().to_vec();
    let y_norm = norm(&null_target);

    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["rule", "lambda", "lambda_ref", "threshold", "survivors", "kept"])?;
    for rule in rules {
        let (mask, lambda_ref): (ScreenMask, f64) = match rule {
            RuleId::StrongGroup => {
                let g = groups.as_ref().ok_or_else(|| {
                    Error::InvalidConfig("strong_group requires --family group".into())
                })?;
                (screening::strong_group(&group_norms(&c_seq, g), lambda, lambda_prev), lambda_prev)
            }
            RuleId::GlassoRow | RuleId::GlassoElement => {
                return Err(Error::InvalidConfig(format!(
                    "{rule} applies to covariance matrices; use fit --family glasso"
                )))
            }
            _ => {
                let sequential = is_sequential(rule);
                let mut inputs = RuleInputs::new(
                    if sequential { c_seq.clone() } else { c0.clone() },
                    lambda,
                    if sequential { lambda_prev } else { lambda_max },
                );
                inputs.col_norms = norms.clone();
                inputs.alpha = args.alpha;
                inputs.a = args.slope;
                inputs.target_norm = if sequential { norm(&seq_target) } else { y_norm };
                match rule {
                    RuleId::SafeBasic => {
                        inputs.lambda = args.alpha * lambda;
                        inputs.lambda_ref = args.alpha * lambda_max;
                    }
                    RuleId::SafeEN => {
                        inputs.lambda = args.alpha * lambda;
                        inputs.lambda2 = (1.0 - args.alpha) * lambda;
                        inputs.lambda_ref = args.alpha * lambda_max;
                    }
                    RuleId::SeqSafeExperimental => {
                        inputs.lambda_ref = c_seq.iter().fold(0.0, |m: f64, v| m.max(*v));
                    }
                    _ => {}
                }
                let r = inputs.lambda_ref;
                (screening::apply_rule(rule, &inputs)?, r)
            }
        };
        let threshold = match &mask.threshold {
            Threshold::Uniform(t) => t.to_string(),
            Threshold::PerUnit(_) => String::new(),
        };
        let kept: Vec<String> = (0..mask.keep.len())
            .filter(|&j| mask.keep[j])
            .map(|j| (j + 1).to_string())
            .collect();
        w.write_record([
            rule.name().to_string(),
            lambda.to_string(),
            lambda_ref.to_string(),
            threshold,
            mask.n_kept().to_string(),
            kept.join(" "),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    with_output(args.output.as_ref(), out, |o| Ok(o.write_all(&bytes)?))?;
    Ok(0)
}

/// One experiment to run, after presets and overrides are applied.
#[derive(Debug, Clone)]
pub struct Job {
    pub scenario: String,
    pub kind: ExperimentKind,
    pub spec: SimSpec,
    pub config: SolverConfig,
    pub mode: StandardizeMode,
    pub rules: Vec<RuleId>,
    pub strategies: Vec<Strategy>,
    pub p_list: Vec<usize>,
    pub reps: usize,
}

fn preset_jobs(figure: u8, seed: u64) -> Result<Vec<Job>> {
    let base = |scenario: &str, kind, spec: SimSpec| Job {
        scenario: scenario.to_string(),
        kind,
        config: SolverConfig::for_shape(spec.n, spec.p),
        spec: SimSpec { seed, ..spec },
        mode: StandardizeMode::CenterAndScale,
        rules: vec![
            RuleId::SafeBasic,
            RuleId::SeqSafeExperimental,
            RuleId::StrongBasic,
            RuleId::StrongSequential,
        ],
        strategies: vec![Strategy::Naive, Strategy::Combined],
        p_list: Vec::new(),
        reps: 1,
    };
    let dense = |rho| SimSpec {
        n: 100,
        p: 1000,
        rho,
        ..SimSpec::default()
    };
    Ok(match figure {
        1 => vec![
            base("dense_rho0", ExperimentKind::Survivors, dense(0.0)),
            base("dense_rho0.5", ExperimentKind::Survivors, dense(0.5)),
            base(
                "sparse",
                ExperimentKind::Survivors,
                SimSpec {
                    design: DesignKind::SparseBinary { density: 0.05 },
                    ..dense(0.0)
                },
            ),
        ],
        3 => {
            let mut equal = base("unstandardized_equal", ExperimentKind::Survivors, dense(0.0));
            equal.mode = StandardizeMode::CenterOnly;
            let mut spread = base(
                "unstandardized_spread50",
                ExperimentKind::Survivors,
                SimSpec {
                    scale_spread: 50.0,
                    ..dense(0.0)
                },
            );
            spread.mode = StandardizeMode::CenterOnly;
            vec![equal, spread]
        }
        4 => [0.5, 0.0]
            .iter()
            .map(|&rho| {
                let spec = SimSpec {
                    n: 100,
                    p: 100,
                    rho,
                    coef_scheme: CoefScheme::Pm2,
                    ..SimSpec::default()
                };
                let mut job = base(&format!("violations_rho{rho}"), ExperimentKind::Violations, spec);
                job.config.grid_size = 80;
                job.p_list = vec![20, 50, 100, 200, 500, 1000];
                job.reps = 20;
                job
            })
            .collect(),
        5 => {
            let spec = SimSpec {
                n: 200,
                p: 2000,
                design: DesignKind::SparseBinary { density: 0.01 },
                family: Family::Binomial,
                ..SimSpec::default()
            };
            let mut job = base("logistic_sparse", ExperimentKind::Survivors, spec);
            job.rules = vec![RuleId::StrongLogisticGlobal, RuleId::StrongLogisticSequential];
            vec![job]
        }
        6 => {
            let spec = SimSpec {
                n: 200,
                p: 20_000,
                rho: 0.7,
                nonzero_frac: 50.0 / 20_000.0,
                coef_scheme: CoefScheme::PositiveDecreasing,
                ..SimSpec::default()
            };
            vec![base("strong_vs_ever_active", ExperimentKind::StrongSets, spec)]
        }
        7 => {
            let spec = SimSpec {
                n: 100,
                p: 100,
                ..SimSpec::default()
            };
            let mut job = base("glasso", ExperimentKind::Glasso, spec);
            job.config.grid_size = GlassoConfig::default().grid_size;
            vec![job]
        }
        other => {
            return Err(Error::InvalidConfig(format!(
                "no preset for figure {other}; valid: 1, 3, 4, 5, 6, 7"
            )))
        }
    })
}

/// Resolves presets, flags and the seed into concrete jobs.
pub fn experiment_jobs(args: &ExperimentArgs) -> Result<Vec<Job>> {
    let seed = match args.seed {
        Some(s) => s,
        None => match std::env::var(SEED_ENV) {
            Ok(v) => v.trim().parse().map_err(|_| {
                Error::InvalidConfig(format!("{SEED_ENV} must be an unsigned integer, got '{v}'"))
            })?,
            Err(_) => {
                return Err(Error::InvalidConfig(format!(
                    "a seed is required: pass --seed or set {SEED_ENV}"
                )))
            }
        },
    };
    let mut jobs = match args.paper_figure {
        Some(f) => preset_jobs(f, seed)?,
        None => {
            let kind = args.kind.unwrap_or(ExperimentKind::Survivors);
            let spec = SimSpec {
                seed,
                ..SimSpec::default()
            };
            vec![Job {
                scenario: format!("{kind:?}").to_lowercase(),
                kind,
                config: SolverConfig::default(),
                spec,
                mode: StandardizeMode::CenterAndScale,
                rules: vec![RuleId::SafeBasic, RuleId::StrongBasic, RuleId::StrongSequential],
                strategies: vec![
                    Strategy::Naive,
                    Strategy::EverActiveOnly,
                    Strategy::StrongOnly,
                    Strategy::Combined,
                ],
                p_list: Vec::new(),
                reps: 1,
            }]
        }
    };
    let rules = args
        .rule
        .iter()
        .map(|r| r.parse::<RuleId>())
        .collect::<Result<Vec<_>>>()?;
    for job in &mut jobs {
        if let Some(k) = args.kind {
            job.kind = k;
        }
        if let Some(s) = &args.scenario {
            job.scenario = s.clone();
        }
        let s = &mut job.spec;
        if let Some(v) = args.n {
            s.n = v;
        }
        if let Some(v) = args.p {
            s.p = v;
            job.p_list = vec![v];
        }
        if !args.p_list.is_empty() {
            job.p_list = args.p_list.clone();
        }
        if let Some(v) = args.rho {
            s.rho = v;
        }
        if let Some(v) = args.nonzero_frac {
            s.nonzero_frac = v;
        }
        if let Some(v) = args.coef_scheme {
            s.coef_scheme = v;
        }
        if let Some(v) = args.snr {
            s.snr = v;
        }
        if let Some(d) = args.density {
            s.design = DesignKind::SparseBinary { density: d };
        }
        if let Some(v) = args.scale_spread {
            s.scale_spread = v;
        }
        if let Some(f) = args.family {
            s.family = match f {
                SimFamilyArg::Gaussian => Family::Gaussian,
                SimFamilyArg::Binomial => Family::Binomial,
            };
        }
        if let Some(m) = args.standardize {
            job.mode = m.into();
        }
        let grid_size = job.config.grid_size;
        job.config = SolverConfig {
            grid_size,
            ..SolverConfig::for_shape(s.n, s.p)
        };
        if let Some(k) = args.nlambda {
            job.config.grid_size = k;
        }
        if let Some(r) = args.lambda_min_ratio {
            job.config.grid_ratio = r;
        }
        if let Some(a) = args.alpha {
            job.config.alpha = a;
        }
        if !rules.is_empty() {
            job.rules = rules.clone();
        }
        if !args.strategy.is_empty() {
            job.strategies = args.strategy.clone();
        }
        if let Some(r) = args.reps {
            job.reps = r;
        }
        if job.p_list.is_empty() {
            job.p_list = vec![s.p];
        }
        job.config.validate()?;
        s.validate()?;
    }
    Ok(jobs)
}

fn strong_set_rows(job: &Job) -> Result<ExperimentResult> {
    let sim = experiments::simulate(&job.spec)?;
    let data = sim.prepare(job.mode, job.spec.family)?;
    let cfg = job.config.clone().with_strategy(Strategy::Combined);
    let path = match job.spec.family {
        Family::Gaussian => {
            let grid = lasso::default_grid(&data.x, &data.y, &cfg)?;
            lasso::solve_path(&data.x, &data.y, &grid, &cfg)?
        }
        Family::Binomial => {
            let grid = logistic::default_logistic_grid(&data.x, &data.y, &cfg)?;
            logistic::solve_path_logistic(&data.x, &data.y, &grid, &cfg)?
        }
    };
    if !path.all_converged() {
        return Err(Error::MaxSweepsExceeded {
            sweeps: path.steps.iter().map(|s| s.sweeps).max().unwrap_or(0),
        });
    }
    let mut result = ExperimentResult::default();
    for s in &path.steps {
        for (rule, count, violations) in [
            (RuleId::StrongSequential.name(), s.strong_set_size, Some(s.rule_violations as f64)),
            ("ever_active", s.ever_active_size, None),
            ("active", s.coefs.nnz(), None),
        ] {
            result.rows.push(ExperimentRow {
                scenario: job.scenario.clone(),
                seed: Some(job.spec.seed),
                lambda: Some(s.lambda),
                pve: None,
                rule: Some(rule.to_string()),
                strategy: Some(Strategy::Combined.name().to_string()),
                survivors: Some(count as f64),
                violations,
                seconds: None,
            });
        }
    }
    Ok(result)
}

pub fn run_job(job: &Job) -> Result<ExperimentResult> {
    match job.kind {
        ExperimentKind::Survivors => {
            experiments::survivor_curves(&job.spec, &job.rules, &job.config, job.mode, &job.scenario)
        }
        ExperimentKind::Violations => {
            let summaries =
                experiments::violation_study(&job.spec, &job.p_list, job.reps, &job.config, job.mode)?;
            if let Some(bad) = summaries.iter().find(|s| !s.telemetry_agrees()) {
                return Err(Error::InvalidConfig(format!(
                    "violation count disagrees with solver telemetry at p={}",
                    bad.p
                )));
            }
            Ok(experiments::violation_rows(&summaries, &job.scenario, job.spec.seed))
        }
        ExperimentKind::Timing => experiments::timing_bench(
            &job.spec,
            &job.strategies,
            &job.config,
            job.mode,
            &job.scenario,
            1e-6,
        ),
        ExperimentKind::StrongSets => strong_set_rows(job),
        ExperimentKind::Slope => {
            let entries = experiments::slope_scan(
                job.spec.n,
                job.spec.p,
                job.spec.seed..job.spec.seed + job.reps as u64,
                job.config.grid_size,
                job.config.grid_ratio,
            )?;
            Ok(experiments::slope_rows(&entries, &job.scenario))
        }
        ExperimentKind::Glasso => {
            let cfg = GlassoConfig {
                grid_size: job.config.grid_size,
                ..GlassoConfig::default()
            };
            experiments::glasso_survivors(job.spec.n, job.spec.p, job.spec.seed, &cfg, &job.scenario)
        }
    }
}

pub fn cmd_experiment(args: &ExperimentArgs, out: &mut dyn Write) -> Result<i32> {
    if args.threads == 0 {
        return Err(Error::InvalidConfig("--threads must be at least 1".into()));
    }
    let jobs = experiment_jobs(args)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.threads)
        .build()
        .map_err(|e| Error::InvalidConfig(e.to_string()))?;
    let mut result = ExperimentResult::default();
    for job in &jobs {
        result.extend(pool.install(|| run_job(job))?);
    }
    with_output(args.output.as_ref(), out, |w| result.write_csv(w))?;
    Ok(0)
}
