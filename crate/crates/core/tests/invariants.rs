mod common;

use common::*;
use proptest::prelude::*;
use strongscreen::group::{self, GroupSpec};
use strongscreen::logistic;
use strongscreen::screening;
use strongscreen::{lasso, solve_path, SolverConfig, Strategy};

fn small_cfg(strategy: Strategy) -> SolverConfig {
    SolverConfig {
        grid_size: 20,
        ..SolverConfig::default()
    }
    .with_strategy(strategy)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn screened_paths_match_naive(seed in 0u64..10_000, n in 20usize..50, p in 5usize..80, rho in 0.0f64..0.9) {
        let (x, y) = gaussian_problem(n, p, rho, seed);
        let naive_cfg = small_cfg(Strategy::Naive);
        let grid = lasso::default_grid(&x, &y, &naive_cfg).unwrap();
        let naive = solve_path(&x, &y, &grid, &naive_cfg).unwrap();
        for s in [Strategy::Combined, Strategy::StrongOnly, Strategy::EverActiveOnly] {
            let path = solve_path(&x, &y, &grid, &small_cfg(s)).unwrap();
            prop_assert!(path.all_kkt_clean());
            prop_assert!(path.max_deviation(&naive) <= 1e-6);
        }
    }

    #[test]
    fn safe_never_discards_active(seed in 0u64..10_000, n in 20usize..50, p in 5usize..80, rho in 0.0f64..0.9) {
        let (x, y) = gaussian_problem(n, p, rho, seed);
        let cfg = small_cfg(Strategy::Naive);
        let grid = lasso::default_grid(&x, &y, &cfg).unwrap();
        let path = solve_path(&x, &y, &grid, &cfg).unwrap();
        let c: Vec<f64> = x.inner_products(y.values()).unwrap().iter().map(|v| v.abs()).collect();
        for step in &path.steps {
            let safe = screening::safe_basic(&c, step.lambda, path.lambda_max, x.col_norms(), y.norm());
            let strong = screening::strong_basic(&c, step.lambda, path.lambda_max);
            for j in 0..p {
                if !safe.keep[j] {
                    prop_assert_eq!(step.coefs.get(j), 0.0);
                    prop_assert!(!strong.keep[j]);
                }
            }
        }
    }

    #[test]
    fn group_paths_match_naive(seed in 0u64..10_000, sizes in prop::collection::vec(1usize..5, 2..10)) {
        let p: usize = sizes.iter().sum();
        let (x, y) = gaussian_problem(40, p, 0.3, seed);
        let groups = GroupSpec::from_sizes(&sizes, p).unwrap();
        let cfg = small_cfg(Strategy::Naive);
        let grid = group::default_group_grid(&x, &y, &groups, &cfg).unwrap();
        let naive = group::solve_group_path(&x, &y, &groups, &grid, &cfg).unwrap();
        let combined = group::solve_group_path(&x, &y, &groups, &grid, &small_cfg(Strategy::Combined)).unwrap();
        prop_assert!(combined.max_deviation(&naive) <= 1e-6);
    }

    #[test]
    fn logistic_null_model_at_lambda_max(seed in 0u64..10_000, p in 3usize..30) {
        let (x, y) = logistic_problem(60, p, seed);
        let lmax = logistic::logistic_lambda_max(&x, &y).unwrap();
        let grid = strongscreen::LambdaGrid::new(vec![lmax], lmax).unwrap();
        let path = logistic::solve_path_logistic(&x, &y, &grid, &SolverConfig::default()).unwrap();
        prop_assert_eq!(path.steps[0].coefs.nnz(), 0);
    }
}
