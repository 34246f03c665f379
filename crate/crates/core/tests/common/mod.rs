//! Test helpers: random problem generators and first-order reference solvers
//! that share no code with the library's coordinate-descent engines.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use strongscreen::group::GroupSpec;
use strongscreen::{standardize, DesignMatrix, RawMatrix, ResponseVector, StandardizeMode};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Standardized Gaussian problem with equicorrelated columns and a sparse truth.
pub fn gaussian_problem(n: usize, p: usize, rho: f64, seed: u64) -> (DesignMatrix, ResponseVector) {
    let mut r = rng(seed);
    let z: Vec<f64> = (0..n).map(|_| normal(&mut r)).collect();
    let mut cols = Vec::with_capacity(p);
    for _ in 0..p {
        cols.push(
            z.iter()
                .map(|zi| rho.sqrt() * zi + (1.0 - rho).sqrt() * normal(&mut r))
                .collect::<Vec<f64>>(),
        );
    }
    let k = (p / 4).max(1);
    let y: Vec<f64> = (0..n)
        .map(|i| {
            let signal: f64 = (0..k).map(|j| cols[j][i] * if j % 2 == 0 { 1.0 } else { -0.5 }).sum();
            signal + normal(&mut r)
        })
        .collect();
    let raw = RawMatrix::from_columns(&cols).unwrap();
    let s = standardize(&raw, &y, StandardizeMode::CenterAndScale).unwrap();
    (s.x, s.y)
}

/// Centered, unit-norm columns and a 0/1 response from a logistic model.
pub fn logistic_problem(n: usize, p: usize, seed: u64) -> (DesignMatrix, ResponseVector) {
    let mut r = rng(seed);
    let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..p).map(|_| normal(&mut r)).collect()).collect();
    let y: Vec<f64> = rows
        .iter()
        .map(|row| {
            let eta: f64 = row.iter().take(5).enumerate().map(|(j, v)| v * (1.0 - 0.3 * j as f64)).sum();
            let prob = 1.0 / (1.0 + (-eta).exp());
            if rand::Rng::random::<f64>(&mut r) < prob {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    let raw = RawMatrix::from_rows(&rows).unwrap();
    let s = strongscreen::design::standardize_with(
        &raw,
        &y,
        StandardizeMode::CenterAndScale,
        strongscreen::design::ResponseKind::Binary,
    )
    .unwrap();
    (s.x, s.y)
}

pub fn to_dmatrix(x: &DesignMatrix) -> DMatrix<f64> {
    let n = x.n_rows();
    let cols: Vec<Vec<f64>> = (0..x.n_cols()).map(|j| x.column(j)).collect();
    DMatrix::from_fn(n, x.n_cols(), |i, j| cols[j][i])
}

fn spectral_norm_sq(a: &DMatrix<f64>) -> f64 {
    let ata = a.transpose() * a;
    ata.symmetric_eigenvalues().iter().fold(0.0, |m, v| m.max(*v))
}

fn soft(v: f64, t: f64) -> f64 {
    v.signum() * (v.abs() - t).max(0.0)
}

/// Elastic-net objective `½‖y − Xβ‖² + λ₁‖β‖₁ + ½λ₂‖β‖²`.
pub fn en_objective(x: &DMatrix<f64>, y: &DVector<f64>, beta: &DVector<f64>, l1: f64, l2: f64) -> f64 {
    let r = y - x * beta;
    0.5 * r.norm_squared() + l1 * beta.lp_norm(1) + 0.5 * l2 * beta.norm_squared()
}

/// FISTA with adaptive restart for the elastic net.
pub fn fista_en(x: &DMatrix<f64>, y: &DVector<f64>, l1: f64, l2: f64, iters: usize) -> DVector<f64> {
    let p = x.ncols();
    let step = 1.0 / (spectral_norm_sq(x) + l2);
    let xty = x.transpose() * y;
    let gram = x.transpose() * x;
    let mut beta = DVector::zeros(p);
    let mut z = beta.clone();
    let mut t = 1.0_f64;
    let mut f_prev = en_objective(x, y, &beta, l1, l2);
    for _ in 0..iters {
        let grad = &gram * &z - &xty + z.scale(l2);
        let next = (&z - grad.scale(step)).map(|v| soft(v, step * l1));
        let f = en_objective(x, y, &next, l1, l2);
        if f > f_prev {
            // restart momentum
            z = beta.clone();
            t = 1.0;
            continue;
        }
        let t_next = (1.0 + (1.0 + 4.0 * t * t).sqrt()) / 2.0;
        z = &next + (&next - &beta).scale((t - 1.0) / t_next);
        beta = next;
        t = t_next;
        f_prev = f;
    }
    beta
}

/// `Σ log(1 + e^η) − yη + λ‖β‖₁`, intercept unpenalized.
pub fn logistic_objective(x: &DMatrix<f64>, y: &DVector<f64>, b0: f64, beta: &DVector<f64>, lambda: f64) -> f64 {
    let eta = x * beta;
    let mut f = 0.0;
    for i in 0..x.nrows() {
        let e = eta[i] + b0;
        let log1p = if e > 0.0 { e + (-e).exp().ln_1p() } else { e.exp().ln_1p() };
        f += log1p - y[i] * e;
    }
    f + lambda * beta.lp_norm(1)
}

/// FISTA with restart on `(β₀, β)`; the intercept takes a plain gradient step.
pub fn fista_logistic(x: &DMatrix<f64>, y: &DVector<f64>, lambda: f64, iters: usize) -> (f64, DVector<f64>) {
    let n = x.nrows();
    let p = x.ncols();
    let mut aug = DMatrix::from_element(n, p + 1, 1.0);
    aug.view_mut((0, 1), (n, p)).copy_from(x);
    let step = 4.0 / spectral_norm_sq(&aug);
    let mut theta = DVector::zeros(p + 1);
    let mut z = theta.clone();
    let mut t = 1.0_f64;
    let f = |v: &DVector<f64>| logistic_objective(x, y, v[0], &v.rows(1, p).into_owned(), lambda);
    let mut f_prev = f(&theta);
    for _ in 0..iters {
        let eta = &aug * &z;
        let resid = DVector::from_iterator(n, (0..n).map(|i| 1.0 / (1.0 + (-eta[i]).exp()) - y[i]));
        let grad = aug.transpose() * resid;
        let mut next = &z - grad.scale(step);
        for j in 1..=p {
            next[j] = soft(next[j], step * lambda);
        }
        let fv = f(&next);
        if fv > f_prev {
            z = theta.clone();
            t = 1.0;
            continue;
        }
        let t_next = (1.0 + (1.0 + 4.0 * t * t).sqrt()) / 2.0;
        z = &next + (&next - &theta).scale((t - 1.0) / t_next);
        theta = next;
        t = t_next;
        f_prev = fv;
    }
    (theta[0], theta.rows(1, p).into_owned())
}

/// `½‖y − Xβ‖² + λ Σ ‖β_ℓ‖₂`.
pub fn group_objective(x: &DMatrix<f64>, y: &DVector<f64>, groups: &GroupSpec, beta: &DVector<f64>, lambda: f64) -> f64 {
    let r = y - x * beta;
    let pen: f64 = (0..groups.n_groups())
        .map(|g| {
            let range = groups.range(g);
            beta.rows(range.start, range.len()).norm()
        })
        .sum();
    0.5 * r.norm_squared() + lambda * pen
}

pub fn fista_group(x: &DMatrix<f64>, y: &DVector<f64>, groups: &GroupSpec, lambda: f64, iters: usize) -> DVector<f64> {
    let p = x.ncols();
    let step = 1.0 / spectral_norm_sq(x);
    let xty = x.transpose() * y;
    let gram = x.transpose() * x;
    let prox = |v: DVector<f64>| {
        let mut out = v.clone();
        for g in 0..groups.n_groups() {
            let range = groups.range(g);
            let norm = v.rows(range.start, range.len()).norm();
            let shrink = if norm > step * lambda { 1.0 - step * lambda / norm } else { 0.0 };
            for j in range {
                out[j] = v[j] * shrink;
            }
        }
        out
    };
    let mut beta = DVector::zeros(p);
    let mut z = beta.clone();
    let mut t = 1.0_f64;
    let mut f_prev = group_objective(x, y, groups, &beta, lambda);
    for _ in 0..iters {
        let grad = &gram * &z - &xty;
        let next = prox(&z - grad.scale(step));
        let f = group_objective(x, y, groups, &next, lambda);
        if f > f_prev {
            z = beta.clone();
            t = 1.0;
            continue;
        }
        let t_next = (1.0 + (1.0 + 4.0 * t * t).sqrt()) / 2.0;
        z = &next + (&next - &beta).scale((t - 1.0) / t_next);
        beta = next;
        t = t_next;
        f_prev = f;
    }
    beta
}

/// `-log det Θ + tr(SΘ) + λ Σ_{i≠j} |Θ_ij|`; `+∞` outside the PD cone.
pub fn glasso_loss(s: &DMatrix<f64>, theta: &DMatrix<f64>, lambda: f64) -> f64 {
    let Some(chol) = theta.clone().cholesky() else {
        return f64::INFINITY;
    };
    let logdet: f64 = chol.l().diagonal().iter().map(|d| 2.0 * d.ln()).sum();
    let p = s.nrows();
    let mut pen = 0.0;
    for i in 0..p {
        for j in 0..p {
            if i != j {
                pen += theta[(i, j)].abs();
            }
        }
    }
    -logdet + (s * theta).trace() + lambda * pen
}

/// Proximal gradient on `Θ` with backtracking that keeps iterates positive
/// definite and enforces sufficient decrease.
pub fn prox_glasso(s: &DMatrix<f64>, lambda: f64, iters: usize) -> DMatrix<f64> {
    let p = s.nrows();
    let mut theta = DMatrix::from_fn(p, p, |i, j| if i == j { 1.0 / (s[(i, i)] + lambda) } else { 0.0 });
    let mut step = 1.0;
    let mut f = glasso_loss(s, &theta, lambda);
    for _ in 0..iters {
        let inv = theta.clone().try_inverse().expect("iterate is PD");
        let grad = s - &inv;
        let smooth = |t: &DMatrix<f64>| glasso_loss(s, t, 0.0);
        let g0 = smooth(&theta);
        let mut accepted = false;
        for _ in 0..60 {
            let cand = DMatrix::from_fn(p, p, |i, j| {
                let v = theta[(i, j)] - step * grad[(i, j)];
                if i == j {
                    v
                } else {
                    soft(v, step * lambda)
                }
            });
            let cand = (&cand + cand.transpose()) * 0.5;
            let gc = smooth(&cand);
            let d = &cand - &theta;
            if gc.is_finite() && gc <= g0 + grad.dot(&d) + d.norm_squared() / (2.0 * step) {
                let fc = glasso_loss(s, &cand, lambda);
                let change = d.abs().max();
                theta = cand;
                f = fc;
                accepted = true;
                if change < 1e-13 {
                    return theta;
                }
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
        step *= 1.5;
    }
    let _ = f;
    theta
}

/// Random SPD matrix `AᵀA/m + 0.1 I`.
pub fn random_covariance(p: usize, seed: u64) -> DMatrix<f64> {
    let mut r = rng(seed);
    let m = 3 * p;
    let a = DMatrix::from_fn(m, p, |_, _| normal(&mut r));
    a.transpose() * &a / m as f64 + DMatrix::identity(p, p) * 0.1
}

/// Independent Gaussian rows.
pub fn gaussian_rows(n: usize, p: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut r = rng(seed);
    (0..n).map(|_| (0..p).map(|_| normal(&mut r)).collect()).collect()
}
