//! Discard rules.
//!
//! Every rule is a pure function of precomputed statistics (inner products,
//! norms, penalty levels) and returns a [`ScreenMask`]. A unit is discarded
//! only when its statistic is strictly below the rule's threshold; ties are
//! kept. Thresholds may be negative, which simply keeps everything.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Identifies the rule that produced a mask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RuleId {
    SafeBasic,
    StrongBasic,
    StrongSequential,
    SafeEN,
    StrongENGlobal,
    StrongENSequential,
    StrongLogisticGlobal,
    StrongLogisticSequential,
    StrongGroup,
    StrongGeneral,
    SeqSafeExperimental,
    GlassoRow,
    GlassoElement,
}

impl RuleId {
    pub const ALL: [RuleId; 13] = [
        RuleId::SafeBasic,
        RuleId::StrongBasic,
        RuleId::StrongSequential,
        RuleId::SafeEN,
        RuleId::StrongENGlobal,
        RuleId::StrongENSequential,
        RuleId::StrongLogisticGlobal,
        RuleId::StrongLogisticSequential,
        RuleId::StrongGroup,
        RuleId::StrongGeneral,
        RuleId::SeqSafeExperimental,
        RuleId::GlassoRow,
        RuleId::GlassoElement,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RuleId::SafeBasic => "safe_basic",
            RuleId::StrongBasic => "strong_basic",
            RuleId::StrongSequential => "strong_sequential",
            RuleId::SafeEN => "safe_en",
            RuleId::StrongENGlobal => "strong_en_global",
            RuleId::StrongENSequential => "strong_en_sequential",
            RuleId::StrongLogisticGlobal => "strong_logistic_global",
            RuleId::StrongLogisticSequential => "strong_logistic_sequential",
            RuleId::StrongGroup => "strong_group",
            RuleId::StrongGeneral => "strong_general",
            RuleId::SeqSafeExperimental => "seq_safe_experimental",
            RuleId::GlassoRow => "glasso_row",
            RuleId::GlassoElement => "glasso_element",
        }
    }

    pub fn valid_names() -> String {
        Self::ALL
            .iter()
            .map(|r| r.name())
            .collect::<Vec<_>>()
            .join(", ")
    }

    /// Whether the rule uses the residual at the previous penalty.
    pub fn is_sequential(self) -> bool {
        matches!(
            self,
            RuleId::StrongSequential
                | RuleId::StrongENSequential
                | RuleId::StrongLogisticSequential
                | RuleId::StrongGroup
                | RuleId::StrongGeneral
                | RuleId::SeqSafeExperimental
                | RuleId::GlassoRow
                | RuleId::GlassoElement
        )
    }
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RuleId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        RuleId::ALL
            .iter()
            .copied()
            .find(|r| r.name() == key)
            .ok_or_else(|| Error::UnknownRule {
                name: s.to_string(),
                valid: RuleId::valid_names(),
            })
    }
}

/// Right-hand side of a rule: one value for every unit, or one per unit.
#[derive(Debug, Clone, PartialEq)]
pub enum Threshold {
    Uniform(f64),
    PerUnit(Vec<f64>),
}

impl Threshold {
    pub fn at(&self, j: usize) -> f64 {
        match self {
            Threshold::Uniform(t) => *t,
            Threshold::PerUnit(t) => t[j],
        }
    }
}

/// Keep/discard decision for every predictor (or group) under one rule.
#[derive(Debug, Clone, PartialEq)]
pub struct ScreenMask {
    pub keep: Vec<bool>,
    pub threshold: Threshold,
    pub rule: RuleId,
}

impl ScreenMask {
    fn from_threshold(stats: &[f64], threshold: Threshold, rule: RuleId) -> Self {
        let keep = stats
            .iter()
            .enumerate()
            .map(|(j, &s)| !(s < threshold.at(j)))
            .collect();
        ScreenMask {
            keep,
            threshold,
            rule,
        }
    }

    pub fn len(&self) -> usize {
        self.keep.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keep.is_empty()
    }

    pub fn n_kept(&self) -> usize {
        self.keep.iter().filter(|k| **k).count()
    }

    pub fn kept(&self) -> Vec<usize> {
        self.indices(true)
    }

    pub fn discarded(&self) -> Vec<usize> {
        self.indices(false)
    }

    pub fn is_discarded(&self, j: usize) -> bool {
        !self.keep[j]
    }

    fn indices(&self, want: bool) -> Vec<usize> {
        self.keep
            .iter()
            .enumerate()
            .filter(|(_, k)| **k == want)
            .map(|(j, _)| j)
            .collect()
    }
}

fn safe_threshold(lambda: f64, lambda_max: f64, norm: f64, y_norm: f64) -> f64 {
    lambda - norm * y_norm * (lambda_max - lambda) / lambda_max
}

/// Basic SAFE rule: discard `j` when `|x_j^T y| < λ - ‖x_j‖‖y‖(λmax - λ)/λmax`.
pub fn safe_basic(
    c_abs: &[f64],
    lambda: f64,
    lambda_max: f64,
    col_norms: &[f64],
    y_norm: f64,
) -> ScreenMask {
    let t = col_norms
        .iter()
        .map(|&n| safe_threshold(lambda, lambda_max, n, y_norm))
        .collect();
    ScreenMask::from_threshold(c_abs, Threshold::PerUnit(t), RuleId::SafeBasic)
}

/// Global strong rule: discard `j` when `|x_j^T y| < 2λ - λmax`.
pub fn strong_basic(c_abs: &[f64], lambda: f64, lambda_max: f64) -> ScreenMask {
    ScreenMask::from_threshold(
        c_abs,
        Threshold::Uniform(2.0 * lambda - lambda_max),
        RuleId::StrongBasic,
    )
}

/// Sequential strong rule: discard `j` when `|x_j^T r| < 2λ - λ0`, with `r`
/// the residual of the solution at `λ0`.
pub fn strong_sequential(c_abs_at_residual: &[f64], lambda: f64, lambda_prev: f64) -> ScreenMask {
    ScreenMask::from_threshold(
        c_abs_at_residual,
        Threshold::Uniform(2.0 * lambda - lambda_prev),
        RuleId::StrongSequential,
    )
}

/// SAFE rule for the elastic net, via the augmented design whose column norms
/// are `sqrt(‖x_j‖² + λ2)`. With `λ2 = 0` this is exactly [`safe_basic`].
pub fn safe_en(
    c_abs: &[f64],
    lambda1: f64,
    lambda2: f64,
    col_norms: &[f64],
    y_norm: f64,
    lambda1_max: f64,
) -> ScreenMask {
    let t = col_norms
        .iter()
        .map(|&n| {
            let eff = if lambda2 == 0.0 {
                n
            } else {
                (n * n + lambda2).sqrt()
            };
            safe_threshold(lambda1, lambda1_max, eff, y_norm)
        })
        .collect();
    ScreenMask::from_threshold(c_abs, Threshold::PerUnit(t), RuleId::SafeEN)
}

/// Strong rules in the mixing parametrization `(αλ, (1-α)λ)`:
/// threshold `α(2λ - λref)`, with `λref = λmax` (global) or `λ0` (sequential).
pub fn strong_en(
    c_abs: &[f64],
    lambda: f64,
    lambda_ref: f64,
    alpha: f64,
    sequential: bool,
) -> ScreenMask {
    let rule = if sequential {
        RuleId::StrongENSequential
    } else {
        RuleId::StrongENGlobal
    };
    ScreenMask::from_threshold(
        c_abs,
        Threshold::Uniform(alpha * (2.0 * lambda - lambda_ref)),
        rule,
    )
}

/// Logistic strong rules. `c_abs_vs_probs` holds `|x_j^T (y - p)|` where `p`
/// is `ybar·1` (global) or the fitted probabilities at `λ0` (sequential).
pub fn strong_logistic(
    c_abs_vs_probs: &[f64],
    lambda: f64,
    lambda_ref: f64,
    sequential: bool,
) -> ScreenMask {
    let rule = if sequential {
        RuleId::StrongLogisticSequential
    } else {
        RuleId::StrongLogisticGlobal
    };
    ScreenMask::from_threshold(
        c_abs_vs_probs,
        Threshold::Uniform(2.0 * lambda - lambda_ref),
        rule,
    )
}

/// Group-lasso sequential rule over block norms `‖X_ℓ^T r‖₂`: discard the
/// group when its norm is below `2λ - λ0`.
pub fn strong_group(block_norms: &[f64], lambda: f64, lambda_prev: f64) -> ScreenMask {
    ScreenMask::from_threshold(
        block_norms,
        Threshold::Uniform(2.0 * lambda - lambda_prev),
        RuleId::StrongGroup,
    )
}

/// General strong rule for penalties whose subgradients satisfy `‖s_k‖_q ≤ A`:
/// discard unit `k` when the dual-norm of its gradient block at `β̂(λ0)` is
/// below `(1 + A)λ - Aλ0`.
pub fn strong_general(grad_norms: &[f64], a: f64, lambda: f64, lambda_prev: f64) -> ScreenMask {
    ScreenMask::from_threshold(
        grad_norms,
        Threshold::Uniform((1.0 + a) * lambda - a * lambda_prev),
        RuleId::StrongGeneral,
    )
}

/// Sequential SAFE-style rule. The reference penalty is recomputed as
/// `max_j |x_j^T r|` at the supplied residual and returned alongside the
/// mask. This rule is unproven: callers must verify KKT afterwards.
pub fn seq_safe_experimental(
    c_abs_at_residual: &[f64],
    lambda: f64,
    col_norms: &[f64],
    r_norm: f64,
) -> (ScreenMask, f64) {
    let lambda0 = c_abs_at_residual.iter().fold(0.0_f64, |m, v| m.max(*v));
    (
        seq_safe_with_reference(c_abs_at_residual, lambda, lambda0, col_norms, r_norm),
        lambda0,
    )
}

/// [`seq_safe_experimental`] with an explicit reference penalty `λ0`.
pub fn seq_safe_with_reference(
    c_abs_at_residual: &[f64],
    lambda: f64,
    lambda0: f64,
    col_norms: &[f64],
    r_norm: f64,
) -> ScreenMask {
    let t = col_norms
        .iter()
        .map(|&n| {
            if lambda0 > 0.0 {
                lambda - r_norm * n * (lambda0 - lambda) / lambda0
            } else {
                lambda
            }
        })
        .collect();
    ScreenMask::from_threshold(
        c_abs_at_residual,
        Threshold::PerUnit(t),
        RuleId::SeqSafeExperimental,
    )
}

/// Graphical-lasso row rule. Returns `true` when row/column `i` can be
/// discarded: `max_j |σ⁰_ij - s_ij| < 2λ - λ0` over the off-diagonal entries.
pub fn glasso_row_rule(sigma0_row: &[f64], s_row: &[f64], lambda: f64, lambda_prev: f64) -> bool {
    let stat = sigma0_row
        .iter()
        .zip(s_row)
        .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
    stat < 2.0 * lambda - lambda_prev
}

/// Elementwise graphical-lasso rule over the off-diagonal entries of a
/// `p × p` row-major pair `(Σ̂(λ0), S)`. Diagonal entries are always kept.
pub fn glasso_element_rule(
    sigma0: &[f64],
    s: &[f64],
    p: usize,
    lambda: f64,
    lambda_prev: f64,
) -> ScreenMask {
    let t = 2.0 * lambda - lambda_prev;
    let keep = (0..p * p)
        .map(|k| {
            let (i, j) = (k / p, k % p);
            i == j || !((sigma0[k] - s[k]).abs() < t)
        })
        .collect();
    ScreenMask {
        keep,
        threshold: Threshold::Uniform(t),
        rule: RuleId::GlassoElement,
    }
}

/// Statistics a rule may draw on. Unused fields are ignored by rules that do
/// not need them.
#[derive(Debug, Clone)]
pub struct RuleInputs {
    /// `|x_j^T target|`: response for global rules, residual for sequential ones.
    pub c_abs: Vec<f64>,
    pub lambda: f64,
    /// `λmax` for global rules, `λ0` for sequential ones.
    pub lambda_ref: f64,
    pub col_norms: Vec<f64>,
    /// `‖y‖` for SAFE rules, `‖r‖` for the sequential SAFE rule.
    pub target_norm: f64,
    pub alpha: f64,
    pub lambda2: f64,
    pub a: f64,
}

impl RuleInputs {
    pub fn new(c_abs: Vec<f64>, lambda: f64, lambda_ref: f64) -> Self {
        let p = c_abs.len();
        RuleInputs {
            c_abs,
            lambda,
            lambda_ref,
            col_norms: vec![1.0; p],
            target_norm: 0.0,
            alpha: 1.0,
            lambda2: 0.0,
            a: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "lambda must be positive, got {}",
                self.lambda
            )));
        }
        if self.lambda > self.lambda_ref {
            return Err(Error::InvalidConfig(format!(
                "lambda {} exceeds reference penalty {}",
                self.lambda, self.lambda_ref
            )));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "alpha must lie in (0, 1], got {}",
                self.alpha
            )));
        }
        if self.a < 0.0 || self.lambda2 < 0.0 {
            return Err(Error::InvalidConfig("A and lambda2 must be non-negative".into()));
        }
        if self.col_norms.len() != self.c_abs.len() {
            return Err(Error::DimensionMismatch {
                expected: self.c_abs.len(),
                found: self.col_norms.len(),
            });
        }
        Ok(())
    }
}

/// Dispatches a vector rule by id. The glasso rules operate on matrices and
/// are not available here.
pub fn apply_rule(rule: RuleId, inputs: &RuleInputs) -> Result<ScreenMask> {
    inputs.validate()?;
    let i = inputs;
    Ok(match rule {
        RuleId::SafeBasic => safe_basic(&i.c_abs, i.lambda, i.lambda_ref, &i.col_norms, i.target_norm),
        RuleId::StrongBasic => strong_basic(&i.c_abs, i.lambda, i.lambda_ref),
        RuleId::StrongSequential => strong_sequential(&i.c_abs, i.lambda, i.lambda_ref),
        RuleId::SafeEN => safe_en(
            &i.c_abs,
            i.lambda,
            i.lambda2,
            &i.col_norms,
            i.target_norm,
            i.lambda_ref,
        ),
        RuleId::StrongENGlobal => strong_en(&i.c_abs, i.lambda, i.lambda_ref, i.alpha, false),
        RuleId::StrongENSequential => strong_en(&i.c_abs, i.lambda, i.lambda_ref, i.alpha, true),
        RuleId::StrongLogisticGlobal => strong_logistic(&i.c_abs, i.lambda, i.lambda_ref, false),
        RuleId::StrongLogisticSequential => {
            strong_logistic(&i.c_abs, i.lambda, i.lambda_ref, true)
        }
        RuleId::StrongGroup => strong_group(&i.c_abs, i.lambda, i.lambda_ref),
        RuleId::StrongGeneral => strong_general(&i.c_abs, i.a, i.lambda, i.lambda_ref),
        RuleId::SeqSafeExperimental => {
            seq_safe_with_reference(&i.c_abs, i.lambda, i.lambda_ref, &i.col_norms, i.target_norm)
        }
        RuleId::GlassoRow | RuleId::GlassoElement => {
            return Err(Error::InvalidConfig(format!(
                "{rule} operates on covariance matrices, not predictor statistics"
            )))
        }
    })
}
