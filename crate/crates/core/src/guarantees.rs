//! Conditions under which the strong rules cannot fail, and an empirical
//! monitor for the unit slope bound `|c_j'(λ)| ≤ 1`, where
//! `c_j(λ) = x_jᵀ(y - Xβ̂(λ))`.

use nalgebra::DMatrix;

use crate::design::{residual, DesignMatrix, ResponseVector};
use crate::error::{Error, Result};
use crate::grid::LambdaGrid;
use crate::lasso::{solve_path, SolverConfig};
use crate::path::Strategy;
use crate::screening;

/// Relative slack allowed when testing diagonal dominance, so that designs
/// whose margin is exactly zero in exact arithmetic are not rejected by
/// rounding in the numerical inverse.
pub const DOMINANCE_SLACK: f64 = 1e-8;

/// Outcome of the diagonal-dominance test on `(XᵀX)⁻¹`.
#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub holds: bool,
    /// `min_i (|A_ii| - Σ_{j≠i} |A_ij|)`.
    pub worst_row_margin: f64,
}

/// `XᵀX` as a dense matrix.
pub fn gram(x: &DesignMatrix) -> DMatrix<f64> {
    let p = x.n_cols();
    let cols: Vec<Vec<f64>> = (0..p).map(|j| x.column(j)).collect();
    let mut g = DMatrix::zeros(p, p);
    for a in 0..p {
        for b in 0..=a {
            let v = crate::design::dot(&cols[a], &cols[b]);
            g[(a, b)] = v;
            g[(b, a)] = v;
        }
    }
    g
}

/// Whether `(XᵀX)⁻¹` is diagonally dominant. Requires full column rank.
pub fn diag_dominance_certificate(x: &DesignMatrix) -> Result<Certificate> {
    if x.n_rows() < x.n_cols() {
        return Err(Error::RankDeficient);
    }
    gram_certificate(&gram(x))
}

/// Diagonal-dominance test for the inverse of a given Gram matrix.
pub fn gram_certificate(g: &DMatrix<f64>) -> Result<Certificate> {
    let inv = invert_spd(g)?;
    Ok(dominance(&inv))
}

fn invert_spd(g: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let scale = g.diagonal().amax();
    let chol = g.clone().cholesky().ok_or(Error::RankDeficient)?;
    let l = chol.l();
    let min_pivot = l.diagonal().iter().fold(f64::INFINITY, |m, v| m.min(*v));
    if !(min_pivot * min_pivot > 1e-12 * scale) {
        return Err(Error::RankDeficient);
    }
    Ok(chol.inverse())
}

fn dominance(a: &DMatrix<f64>) -> Certificate {
    let p = a.nrows();
    let mut worst = f64::INFINITY;
    let mut scale = 0.0_f64;
    for i in 0..p {
        let diag = a[(i, i)].abs();
        scale = scale.max(diag);
        let off: f64 = (0..p).filter(|&j| j != i).map(|j| a[(i, j)].abs()).sum();
        worst = worst.min(diag - off);
    }
    Certificate {
        holds: worst >= -DOMINANCE_SLACK * scale,
        worst_row_margin: worst,
    }
}

/// Closed-form inverse of the equicorrelation Gram matrix (unit diagonal,
/// off-diagonal `r`): `I/(1-r) - r·11ᵀ/((1-r)(1+r(p-1)))`.
pub fn equicorrelation_inverse(p: usize, r: f64) -> Result<DMatrix<f64>> {
    let lower = if p > 1 { -1.0 / (p - 1) as f64 } else { f64::NEG_INFINITY };
    if p == 0 || !(r > lower && r < 1.0) {
        return Err(Error::InvalidCorrelation { p, r });
    }
    let a = 1.0 / (1.0 - r);
    let b = r * a / (1.0 + r * (p - 1) as f64);
    Ok(DMatrix::from_fn(p, p, |i, j| if i == j { a - b } else { -b }))
}

/// Equicorrelation Gram matrix with off-diagonal `r`.
pub fn equicorrelation_gram(p: usize, r: f64) -> DMatrix<f64> {
    DMatrix::from_fn(p, p, |i, j| if i == j { 1.0 } else { r })
}

/// A square design whose Gram matrix is `g`: the transposed Cholesky factor.
pub fn design_from_gram(g: &DMatrix<f64>) -> Result<DesignMatrix> {
    let chol = g.clone().cholesky().ok_or(Error::RankDeficient)?;
    let xt = chol.l().transpose();
    let p = g.nrows();
    let data: Vec<f64> = xt.iter().copied().collect();
    DesignMatrix::dense(p, p, data)
}

/// The `p × p` lower-triangular matrix of ones.
pub fn lower_triangular_ones(p: usize) -> DesignMatrix {
    let data = (0..p * p)
        .map(|k| {
            let (j, i) = (k / p, k % p);
            if i >= j {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    DesignMatrix::dense(p, p, data).expect("square design")
}

/// A finite-difference slope exceeding the bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeViolation {
    pub predictor: usize,
    /// Segment `k` spans grid points `k` and `k + 1`.
    pub segment: usize,
    pub slope: f64,
}

/// A rule failure: `predictor` was discarded at grid point `step` but is
/// nonzero in the exact solution there.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RuleViolation {
    pub predictor: usize,
    pub step: usize,
}

#[derive(Debug, Clone)]
pub struct SlopeTrace {
    pub lambdas: Vec<f64>,
    /// `slopes[k][j]`: slope of `c_j` between grid points `k` and `k + 1`.
    pub slopes: Vec<Vec<f64>>,
    pub max_abs_slope: f64,
    pub violating_segments: Vec<SlopeViolation>,
    pub sequential_violations: Vec<RuleViolation>,
    pub basic_violations: Vec<RuleViolation>,
}

impl SlopeTrace {
    /// Whether every sequential-rule violation at step `k` sits on a flagged
    /// segment `k - 1` for the same predictor.
    pub fn violations_explained_by_slopes(&self) -> bool {
        self.sequential_violations.iter().all(|v| {
            v.step > 0
                && self
                    .violating_segments
                    .iter()
                    .any(|s| s.predictor == v.predictor && s.segment + 1 == v.step)
        })
    }
}

/// Slope tolerance above 1 used when flagging segments.
pub const SLOPE_TOLERANCE: f64 = 1e-6;

/// Solves the exact path on `grid` and reports finite-difference slopes of
/// every `c_j`, flagged segments, and both strong rules' violations.
pub fn slope_monitor(
    x: &DesignMatrix,
    y: &ResponseVector,
    grid: &LambdaGrid,
    config: &SolverConfig,
) -> Result<SlopeTrace> {
    let cfg = config.clone().with_strategy(Strategy::Naive);
    let path = solve_path(x, y, grid, &cfg)?;
    if !path.all_converged() {
        let sweeps = path.steps.iter().map(|s| s.sweeps).max().unwrap_or(0);
        return Err(Error::MaxSweepsExceeded { sweeps });
    }
    let c0: Vec<f64> = x.inner_products(y.values())?;
    let c0_abs: Vec<f64> = c0.iter().map(|v| v.abs()).collect();
    let lambda_max = grid.lambda_max();
    let mut cs = Vec::with_capacity(path.steps.len());
    for step in &path.steps {
        let r = residual(x, y, &step.coefs)?;
        cs.push(x.inner_products(&r)?);
    }
    let lambdas = path.lambdas();
    let p = x.n_cols();

    let mut slopes = Vec::with_capacity(lambdas.len().saturating_sub(1));
    let mut violating_segments = Vec::new();
    let mut max_abs_slope = 0.0_f64;
    for k in 0..lambdas.len().saturating_sub(1) {
        let dl = lambdas[k + 1] - lambdas[k];
        let row: Vec<f64> = (0..p).map(|j| (cs[k + 1][j] - cs[k][j]) / dl).collect();
        for (j, &s) in row.iter().enumerate() {
            max_abs_slope = max_abs_slope.max(s.abs());
            if s.abs() > 1.0 + SLOPE_TOLERANCE {
                violating_segments.push(SlopeViolation {
                    predictor: j,
                    segment: k,
                    slope: s,
                });
            }
        }
        slopes.push(row);
    }

    let mut sequential_violations = Vec::new();
    let mut basic_violations = Vec::new();
    for (k, step) in path.steps.iter().enumerate() {
        let lambda = lambdas[k];
        let basic = screening::strong_basic(&c0_abs, lambda, lambda_max);
        let prev_scores: Vec<f64> = if k == 0 {
            c0_abs.clone()
        } else {
            cs[k - 1].iter().map(|v| v.abs()).collect()
        };
        let seq = screening::strong_sequential(&prev_scores, lambda, grid.previous(k));
        for (j, _) in step.coefs.iter() {
            if !basic.keep[j] {
                basic_violations.push(RuleViolation { predictor: j, step: k });
            }
            if !seq.keep[j] {
                sequential_violations.push(RuleViolation { predictor: j, step: k });
            }
        }
    }

    Ok(SlopeTrace {
        lambdas,
        slopes,
        max_abs_slope,
        violating_segments,
        sequential_violations,
        basic_violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_grid, GridSpacing};

    #[test]
    fn orthonormal_design_is_certified() {
        let x = DesignMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        let c = diag_dominance_certificate(&x).unwrap();
        assert!(c.holds);
        assert!((c.worst_row_margin - 1.0).abs() < 1e-12);
    }

    #[test]
    fn lower_triangular_ones_is_certified() {
        for p in [2, 5, 20, 50] {
            let c = diag_dominance_certificate(&lower_triangular_ones(p)).unwrap();
            assert!(c.holds, "p={p}: {c:?}");
            assert!(c.worst_row_margin.abs() < 1e-8);
        }
    }

    #[test]
    fn negative_equicorrelation_fails() {
        // for r < 0 the margin is a - (p-2)|b|: still positive at p = 3
        assert!(gram_certificate(&equicorrelation_gram(3, -0.2)).unwrap().holds);
        assert!(!gram_certificate(&equicorrelation_gram(5, -0.2)).unwrap().holds);
        let x = design_from_gram(&equicorrelation_gram(5, -0.2)).unwrap();
        assert!(!diag_dominance_certificate(&x).unwrap().holds);
    }

    #[test]
    fn equicorrelation_closed_form() {
        assert_eq!(equicorrelation_inverse(3, 0.0).unwrap(), DMatrix::identity(3, 3));
        let inv = equicorrelation_inverse(2, 0.5).unwrap();
        let expected = DMatrix::from_row_slice(2, 2, &[4.0 / 3.0, -2.0 / 3.0, -2.0 / 3.0, 4.0 / 3.0]);
        assert!((inv - expected).amax() < 1e-15);
        let g = equicorrelation_gram(10, 0.3);
        let numeric = g.try_inverse().unwrap();
        assert!((equicorrelation_inverse(10, 0.3).unwrap() - numeric).amax() < 1e-10);
        assert!(matches!(
            equicorrelation_inverse(3, -0.6),
            Err(Error::InvalidCorrelation { .. })
        ));
        assert!(equicorrelation_inverse(3, 1.0).is_err());
    }

    #[test]
    fn rank_deficient_design_is_rejected() {
        let x = DesignMatrix::from_columns(&[vec![1.0, 2.0, 3.0], vec![2.0, 4.0, 6.0]]).unwrap();
        assert!(matches!(diag_dominance_certificate(&x), Err(Error::RankDeficient)));
        let wide = DesignMatrix::from_rows(&[vec![1.0, 0.0, 1.0]]).unwrap();
        assert!(matches!(diag_dominance_certificate(&wide), Err(Error::RankDeficient)));
    }

    #[test]
    fn orthonormal_slopes_are_bounded() {
        let x = DesignMatrix::from_rows(&[
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ])
        .unwrap();
        let y = ResponseVector::gaussian(vec![3.0, -2.0, 0.5]);
        let grid = make_grid(3.0, 200, 0.01, GridSpacing::Linear).unwrap();
        let trace = slope_monitor(&x, &y, &grid, &SolverConfig::default()).unwrap();
        assert!(trace.max_abs_slope <= 1.0 + 1e-6);
        assert!(trace.violating_segments.is_empty());
        assert!(trace.sequential_violations.is_empty() && trace.basic_violations.is_empty());
    }
}
