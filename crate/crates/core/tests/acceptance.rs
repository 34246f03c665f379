//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any criterion fails.

mod common;

use std::time::Instant;

use common::*;
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use strongscreen::experiments::{self, CoefScheme, DesignKind, Family, SimSpec};
use strongscreen::glasso::{self, GlassoConfig, GlassoScreening};
use strongscreen::group::{self, GroupSpec};
use strongscreen::guarantees::{self, diag_dominance_certificate};
use strongscreen::lasso::{self, Penalty};
use strongscreen::logistic::{self, LogisticState};
use strongscreen::screening::{self, Threshold};
use strongscreen::{
    coord_descent, solve_path, Coefficients, DesignMatrix, PathSolution,
    ResponseVector, SolverConfig, StandardizeMode, Strategy,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

type Instance = (DesignMatrix, ResponseVector, PathSolution);

/// The 50 Gaussian instances shared by the first three criteria, with their
/// naive paths.
fn gaussian_instances() -> Vec<Instance> {
    (0..50u64)
        .map(|i| {
            let spec = SimSpec {
                n: 100,
                p: 200,
                rho: [0.0, 0.5, 0.8][(i % 3) as usize],
                seed: 1000 + i,
                ..SimSpec::default()
            };
            let sim = experiments::simulate(&spec).unwrap();
            let d = sim.prepare(StandardizeMode::CenterAndScale, Family::Gaussian).unwrap();
            let cfg = SolverConfig::for_shape(100, 200).with_strategy(Strategy::Naive);
            let grid = lasso::default_grid(&d.x, &d.y, &cfg).unwrap();
            assert_eq!(grid.len(), 100);
            let path = solve_path(&d.x, &d.y, &grid, &cfg).unwrap();
            (d.x, d.y, path)
        })
        .collect()
}

fn exactness(instances: &[Instance]) -> Outcome {
    let mut worst = 0.0_f64;
    let mut clean = true;
    for (x, y, naive) in instances {
        let grid = strongscreen::LambdaGrid::new(naive.lambdas(), naive.lambda_max).unwrap();
        for s in [Strategy::Combined, Strategy::StrongOnly, Strategy::EverActiveOnly] {
            let cfg = SolverConfig::for_shape(100, 200).with_strategy(s);
            let path = solve_path(x, y, &grid, &cfg).unwrap();
            clean &= path.all_converged() && path.all_kkt_clean();
            worst = worst.max(path.max_deviation(naive));
        }
    }
    clean &= instances.iter().all(|(_, _, p)| p.all_converged() && p.all_kkt_clean());
    outcome(
        worst <= 1e-6 && clean,
        format!("max deviation {worst:.2e} over 150 screened paths, all KKT-clean: {clean}"),
    )
}

fn safe_discards(x: &DesignMatrix, y: &ResponseVector, lambda: f64, lambda_max: f64) -> screening::ScreenMask {
    let c: Vec<f64> = x.inner_products(y.values()).unwrap().iter().map(|v| v.abs()).collect();
    screening::safe_basic(&c, lambda, lambda_max, x.col_norms(), y.norm())
}

fn safe_safety(instances: &[Instance]) -> Outcome {
    let mut bad = 0;
    let mut discarded = 0;
    for (x, y, path) in instances {
        for step in &path.steps {
            let mask = safe_discards(x, y, step.lambda, path.lambda_max);
            for j in 0..x.n_cols() {
                if !mask.keep[j] {
                    discarded += 1;
                    if step.coefs.get(j).abs() > 1e-8 {
                        bad += 1;
                    }
                }
            }
        }
    }
    outcome(bad == 0, format!("{bad} unsafe discards out of {discarded}"))
}

fn dominance(instances: &[Instance]) -> Outcome {
    let mut bad = 0;
    for (x, y, path) in instances {
        let c: Vec<f64> = x.inner_products(y.values()).unwrap().iter().map(|v| v.abs()).collect();
        for step in &path.steps {
            let safe = safe_discards(x, y, step.lambda, path.lambda_max);
            let strong = screening::strong_basic(&c, step.lambda, path.lambda_max);
            bad += (0..x.n_cols()).filter(|&j| !safe.keep[j] && strong.keep[j]).count();
        }
    }
    outcome(bad == 0, format!("{bad} SAFE discards kept by the basic strong rule"))
}

/// Violations of both strong rules along a 500-point naive path.
fn strong_violations(x: &DesignMatrix, y: &ResponseVector) -> (usize, usize) {
    let cfg = SolverConfig {
        grid_size: 500,
        ..SolverConfig::for_shape(x.n_rows(), x.n_cols())
    }
    .with_strategy(Strategy::Naive);
    let grid = lasso::default_grid(x, y, &cfg).unwrap();
    let path = solve_path(x, y, &grid, &cfg).unwrap();
    assert!(path.all_converged());
    let c: Vec<f64> = x.inner_products(y.values()).unwrap().iter().map(|v| v.abs()).collect();
    let mut basic = 0;
    for step in &path.steps {
        let m = screening::strong_basic(&c, step.lambda, path.lambda_max);
        basic += step.coefs.iter().filter(|&(j, _)| !m.keep[j]).count();
    }
    (path.total_rule_violations(), basic)
}

fn certificate() -> Outcome {
    let mut designs: Vec<(String, DesignMatrix)> = Vec::new();
    for seed in 0..3 {
        let mut r = rng(seed);
        let a = DMatrix::from_fn(60, 20, |_, _| normal(&mut r));
        let q = a.qr().q();
        let cols: Vec<Vec<f64>> = (0..20).map(|j| q.column(j).iter().copied().collect()).collect();
        designs.push((format!("orthonormal#{seed}"), DesignMatrix::from_columns(&cols).unwrap()));
    }
    for p in [10, 50] {
        designs.push((format!("lower-triangular p={p}"), guarantees::lower_triangular_ones(p)));
    }
    for r in [0.0, 0.3, 0.7] {
        let g = guarantees::equicorrelation_gram(10, r);
        designs.push((format!("equicorrelated r={r}"), guarantees::design_from_gram(&g).unwrap()));
    }
    let mut failures = Vec::new();
    for (name, x) in &designs {
        let cert = diag_dominance_certificate(x).unwrap();
        if !cert.holds {
            failures.push(format!("{name}: certificate fails"));
        }
        for seed in 0..3 {
            let mut r = rng(77 + seed);
            let y = ResponseVector::gaussian((0..x.n_rows()).map(|_| normal(&mut r)).collect());
            let (seq, basic) = strong_violations(x, &y);
            if seq + basic > 0 {
                failures.push(format!("{name} seed {seed}: {seq} sequential, {basic} basic violations"));
            }
        }
    }
    let neg = guarantees::design_from_gram(&guarantees::equicorrelation_gram(5, -0.2)).unwrap();
    let neg_fails = !diag_dominance_certificate(&neg).unwrap().holds;
    if !neg_fails {
        failures.push("r=-0.2, p=5: certificate unexpectedly holds".into());
    }
    let pass = failures.is_empty();
    let detail = if pass {
        format!("{} certified designs with zero violations; r=-0.2 (p=5) not certified", designs.len())
    } else {
        failures.join("; ")
    };
    outcome(pass, detail)
}

fn violation_phenomenology() -> Outcome {
    let template = SimSpec {
        n: 100,
        rho: 0.5,
        nonzero_frac: 0.25,
        coef_scheme: CoefScheme::Pm2,
        seed: 4000,
        ..SimSpec::default()
    };
    let mut notes = Vec::new();
    let mut pass = true;
    for p in [20, 50, 100, 500, 1000] {
        let cfg = SolverConfig {
            grid_size: 80,
            ..SolverConfig::for_shape(100, p)
        };
        let s = &experiments::violation_study(&template, &[p], 20, &cfg, StandardizeMode::CenterAndScale).unwrap()[0];
        pass &= s.telemetry_agrees();
        if p >= 500 {
            pass &= s.total() == 0;
            notes.push(format!("p={p}: {} total", s.total()));
        } else {
            let m = s.max_mean_per_point();
            pass &= m <= 1.0;
            notes.push(format!("p={p}: max mean {m:.3}/point"));
        }
    }
    outcome(pass, notes.join(", "))
}

fn slope_counterexample() -> Outcome {
    let entries = experiments::slope_scan(50, 30, 0..200, 500, 1e-3).unwrap();
    let hits: Vec<_> = entries.iter().filter(|e| e.max_abs_slope > 1.0 + 1e-9).collect();
    let worst = entries.iter().map(|e| e.max_abs_slope).fold(0.0, f64::max);
    outcome(
        !hits.is_empty(),
        format!("{} of 200 seeds have a segment with |slope| > 1 (largest {worst:.3})", hits.len()),
    )
}

fn equicorrelation_closed_form() -> Outcome {
    let mut worst = 0.0_f64;
    for p in [2, 10, 50] {
        for r in [0.0, 0.3, 0.9] {
            let closed = guarantees::equicorrelation_inverse(p, r).unwrap();
            let numeric = guarantees::equicorrelation_gram(p, r).try_inverse().unwrap();
            worst = worst.max((closed - numeric).abs().max());
        }
    }
    outcome(worst <= 1e-10, format!("max entry difference {worst:.2e}"))
}

fn same_mask(a: &screening::ScreenMask, b: &screening::ScreenMask) -> bool {
    let thresholds_equal = match (&a.threshold, &b.threshold) {
        (Threshold::Uniform(x), Threshold::Uniform(y)) => x.to_bits() == y.to_bits(),
        (Threshold::PerUnit(x), Threshold::PerUnit(y)) => {
            x.iter().zip(y).all(|(u, v)| u.to_bits() == v.to_bits())
        }
        _ => false,
    };
    thresholds_equal && a.keep == b.keep
}

fn elastic_net_reductions() -> Outcome {
    let mut r = rng(8);
    let mut rule_mismatches = 0;
    for _ in 0..200 {
        let p = 30;
        let c: Vec<f64> = (0..p).map(|_| r.random::<f64>() * 2.0).collect();
        let norms: Vec<f64> = (0..p).map(|_| 0.5 + r.random::<f64>()).collect();
        let lmax = c.iter().fold(0.0_f64, |m, v| m.max(*v));
        let lambda = lmax * (0.05 + 0.9 * r.random::<f64>());
        let lprev = lambda + (lmax - lambda) * r.random::<f64>();
        let y_norm = 1.0 + 5.0 * r.random::<f64>();
        if !same_mask(
            &screening::safe_en(&c, lambda, 0.0, &norms, y_norm, lmax),
            &screening::safe_basic(&c, lambda, lmax, &norms, y_norm),
        ) {
            rule_mismatches += 1;
        }
        if !same_mask(
            &screening::strong_en(&c, lambda, lmax, 1.0, false),
            &screening::strong_basic(&c, lambda, lmax),
        ) {
            rule_mismatches += 1;
        }
        if !same_mask(
            &screening::strong_en(&c, lambda, lprev, 1.0, true),
            &screening::strong_sequential(&c, lambda, lprev),
        ) {
            rule_mismatches += 1;
        }
    }

    // native elastic net against the lasso on [X; √λ₂ I], y* = [y; 0]
    let (x, y) = gaussian_problem(80, 50, 0.3, 12);
    let l2 = 0.8;
    let cfg = SolverConfig::default();
    let grid = lasso::default_grid(&x, &y, &cfg).unwrap();
    let native = lasso::solve_path_with_penalty(&x, &y, &grid, &cfg, Penalty::FixedRidge { lambda2: l2 }).unwrap();
    let cols: Vec<Vec<f64>> = (0..50)
        .map(|j| {
            let mut c = x.column(j);
            c.extend((0..50).map(|k| if k == j { l2.sqrt() } else { 0.0 }));
            c
        })
        .collect();
    let xa = DesignMatrix::from_columns(&cols).unwrap();
    let mut ya = y.values().to_vec();
    ya.extend(std::iter::repeat_n(0.0, 50));
    let ya = ResponseVector::gaussian(ya);
    let augmented = solve_path(&xa, &ya, &grid, &cfg).unwrap();
    let dev = native.max_deviation(&augmented);
    outcome(
        rule_mismatches == 0 && dev <= 1e-8 && native.all_converged() && augmented.all_converged(),
        format!("{rule_mismatches} rule mismatches in 600 comparisons; augmented path deviation {dev:.2e}"),
    )
}

fn logistic_sparse() -> Outcome {
    let spec = SimSpec {
        n: 200,
        p: 2000,
        design: DesignKind::SparseBinary { density: 0.01 },
        family: Family::Binomial,
        seed: 9,
        ..SimSpec::default()
    };
    let sim = experiments::simulate(&spec).unwrap();
    let d = sim.prepare(StandardizeMode::CenterAndScale, Family::Binomial).unwrap();
    let cfg = SolverConfig::for_shape(200, 2000);
    let grid = logistic::default_logistic_grid(&d.x, &d.y, &cfg).unwrap();
    let naive = logistic::solve_path_logistic(&d.x, &d.y, &grid, &cfg.clone().with_strategy(Strategy::Naive)).unwrap();
    let screened = logistic::solve_path_logistic(&d.x, &d.y, &grid, &cfg).unwrap();
    let dev = naive.max_deviation(&screened);
    // Columns with two ones form cycles, so the active set can be linearly
    // dependent. A coefficient gap then only counts as agreement when it is a
    // null-space move: same linear predictor and same l1 norm.
    let mut eta_dev = 0.0_f64;
    let mut l1_dev = 0.0_f64;
    let mut tied_steps = 0;
    for (a, b) in naive.steps.iter().zip(&screened.steps) {
        if a.coefs.max_abs_diff(&b.coefs) <= 1e-5 {
            continue;
        }
        tied_steps += 1;
        let ea = d.x.mul_coefs(&a.coefs).unwrap();
        let eb = d.x.mul_coefs(&b.coefs).unwrap();
        for (u, v) in ea.iter().zip(&eb) {
            eta_dev = eta_dev.max((u + a.coefs.intercept - v - b.coefs.intercept).abs());
        }
        l1_dev = l1_dev.max((a.coefs.l1_norm() - b.coefs.l1_norm()).abs());
    }
    let violations = screened.total_rule_violations();
    let ok = naive.all_converged() && screened.all_converged();
    outcome(
        eta_dev <= 1e-5 && l1_dev <= 1e-5 && violations == 0 && ok,
        format!(
            "coefficient deviation {dev:.2e} ({tied_steps} steps with tied minimizers: linear predictor deviation {eta_dev:.2e}, l1 deviation {l1_dev:.2e}), {violations} sequential-rule violations, converged: {ok}"
        ),
    )
}

fn glasso_screening() -> Outcome {
    let rows = gaussian_rows(100, 30, 10);
    let s = glasso::empirical_covariance(&rows).unwrap();
    let cfg = GlassoConfig::default();
    let grid = glasso::default_glasso_grid(&s, &cfg).unwrap();
    let screened = glasso::solve_glasso_path(&s, &grid, &cfg, GlassoScreening::RowWise).unwrap();
    let plain = glasso::solve_glasso_path(&s, &grid, &cfg, GlassoScreening::None).unwrap();
    let dev = screened.max_theta_deviation(&plain);
    let checks = screened.steps.iter().all(|st| st.check.holds(st.lambda, cfg.kkt_tolerance));
    let violations: usize = screened.steps.iter().map(|st| st.rule_violations).sum();
    let discarded: usize = screened.steps.iter().map(|st| st.discarded_rows).sum();
    outcome(
        dev <= 1e-5 && checks && violations == 0,
        format!(
            "max |Θ| deviation {dev:.2e}, subgradient check at every λ: {checks}, {violations} row-rule violations ({discarded} rows discarded over the path)"
        ),
    )
}

fn timing_direction() -> Outcome {
    let mut notes = Vec::new();
    let mut pass = true;
    for rho in [0.0, 0.5] {
        let spec = SimSpec {
            n: 200,
            p: 20_000,
            rho,
            nonzero_frac: 30.0 / 20_000.0,
            coef_scheme: CoefScheme::AlternatingEqual,
            seed: 11,
            ..SimSpec::default()
        };
        let cfg = SolverConfig::for_shape(200, 20_000);
        match experiments::timing_bench(
            &spec,
            &[Strategy::Naive, Strategy::Combined],
            &cfg,
            StandardizeMode::CenterAndScale,
            "timing",
            1e-6,
        ) {
            Ok(res) => {
                let naive = res.rows[0].seconds.unwrap();
                let combined = res.rows[1].seconds.unwrap();
                pass &= combined <= naive;
                notes.push(format!("rho={rho}: naive {naive:.2}s, combined {combined:.2}s"));
            }
            Err(e) => {
                pass = false;
                notes.push(format!("rho={rho}: {e}"));
            }
        }
    }
    outcome(pass, format!("{} (outputs identical to 1e-6)", notes.join(", ")))
}

fn dvec(c: &Coefficients) -> DVector<f64> {
    DVector::from_vec(c.to_dense())
}

fn oracle_agreement() -> Outcome {
    let cfg = SolverConfig::default();
    let mut worst = [0.0_f64; 4];

    for seed in 0..10 {
        let (x, y) = gaussian_problem(50, 20, 0.3, 500 + seed);
        let (xm, yv) = (to_dmatrix(&x), DVector::from_vec(y.values().to_vec()));
        let l1 = 0.1 * lasso::path_lambda_max(&x, &y, 1.0).unwrap();
        let all: Vec<usize> = (0..20).collect();
        let fit = coord_descent(&x, &y, l1, 0.0, &Coefficients::zeros(20), &all, &cfg).unwrap();
        let d = en_objective(&xm, &yv, &dvec(&fit.coefs), l1, 0.0)
            - en_objective(&xm, &yv, &fista_en(&xm, &yv, l1, 0.0, 20_000), l1, 0.0);
        worst[0] = worst[0].max(d.abs());
    }
    for seed in 0..10 {
        let (x, y) = logistic_problem(80, 40, 600 + seed);
        let (xm, yv) = (to_dmatrix(&x), DVector::from_vec(y.values().to_vec()));
        let lambda = 0.15 * logistic::logistic_lambda_max(&x, &y).unwrap();
        let all: Vec<usize> = (0..40).collect();
        let st = logistic::fit_logistic(&x, &y, lambda, &LogisticState::null(40, &y).unwrap(), &all, &cfg).unwrap();
        let (b0, b) = fista_logistic(&xm, &yv, lambda, 30_000);
        let d = logistic_objective(&xm, &yv, st.intercept, &dvec(&st.beta), lambda)
            - logistic_objective(&xm, &yv, b0, &b, lambda);
        worst[1] = worst[1].max(d.abs());
    }
    for seed in 0..10 {
        let (x, y) = gaussian_problem(60, 24, 0.4, 700 + seed);
        let groups = GroupSpec::from_sizes(&[3, 5, 1, 4, 6, 5], 24).unwrap();
        let (xm, yv) = (to_dmatrix(&x), DVector::from_vec(y.values().to_vec()));
        let lambda = 0.3 * group::group_lambda_max(&x, &y, &groups).unwrap();
        let fit = group::group_block_descent(&x, &y, &groups, lambda, &Coefficients::zeros(24), &cfg).unwrap();
        let d = group_objective(&xm, &yv, &groups, &dvec(&fit), lambda)
            - group_objective(&xm, &yv, &groups, &fista_group(&xm, &yv, &groups, lambda, 20_000), lambda);
        worst[2] = worst[2].max(d.abs());
    }
    for seed in 0..10 {
        let s = random_covariance(5, 800 + seed);
        let lambda = 0.3 * glasso::glasso_lambda_max(&s);
        let pair = glasso::graphical_lasso(&s, lambda, None, &GlassoConfig::default()).unwrap();
        let d = -glasso::glasso_objective(&s, &pair.theta, lambda) - glasso_loss(&s, &prox_glasso(&s, lambda, 20_000), lambda);
        worst[3] = worst[3].max(d.abs());
    }
    let limits = [1e-6, 1e-5, 1e-6, 1e-4];
    let pass = worst.iter().zip(&limits).all(|(w, l)| w <= l);
    outcome(
        pass,
        format!(
            "max objective gaps: lasso {:.1e}, logistic {:.1e}, group {:.1e}, glasso {:.1e}",
            worst[0], worst[1], worst[2], worst[3]
        ),
    )
}

fn main() {
    let instances_start = Instant::now();
    let instances = gaussian_instances();
    let instances_secs = instances_start.elapsed().as_secs_f64();

    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        ("exactness equivalence", Box::new(|| exactness(&instances))),
        ("SAFE safety", Box::new(|| safe_safety(&instances))),
        ("strong-basic discards contain SAFE discards", Box::new(|| dominance(&instances))),
        ("diagonal-dominance certificate", Box::new(certificate)),
        ("violation phenomenology", Box::new(violation_phenomenology)),
        ("slope counter-example", Box::new(slope_counterexample)),
        ("equicorrelation closed form", Box::new(equicorrelation_closed_form)),
        ("elastic-net reductions", Box::new(elastic_net_reductions)),
        ("logistic path on sparse binary design", Box::new(logistic_sparse)),
        ("graphical lasso screening", Box::new(glasso_screening)),
        ("timing direction", Box::new(timing_direction)),
        ("oracle agreement", Box::new(oracle_agreement)),
    ];

    println!("naive paths for 50 instances: {instances_secs:.1}s");
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = run();
        let secs = start.elapsed().as_secs_f64();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        if !o.pass {
            failed += 1;
        }
        println!("criterion {:>2} {tag}: {name}: {} [{secs:.1}s]", k + 1, o.detail);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
