//! Elastic-net paths for a few mixing values, plus the fixed-ridge form.

use strongscreen::experiments::{self, Family, SimSpec};
use strongscreen::lasso::{self, Penalty};
use strongscreen::{solve_path, SolverConfig, StandardizeMode};

fn main() -> strongscreen::Result<()> {
    let spec = SimSpec { n: 80, p: 300, rho: 0.6, seed: 5, ..SimSpec::default() };
    let data = experiments::simulate(&spec)?.prepare(StandardizeMode::CenterAndScale, Family::Gaussian)?;

    for alpha in [1.0, 0.5, 0.1] {
        let cfg = SolverConfig { alpha, ..SolverConfig::for_shape(spec.n, spec.p) };
        let grid = lasso::default_grid(&data.x, &data.y, &cfg)?;
        let path = solve_path(&data.x, &data.y, &grid, &cfg)?;
        let last = path.steps.last().unwrap();
        println!(
            "alpha {alpha:>4}: lambda_max {:.3}, final nnz {}, final l1 {:.3}, kkt clean {}",
            path.lambda_max,
            last.coefs.nnz(),
            last.coefs.l1_norm(),
            path.all_kkt_clean()
        );
    }

    // λ2 held fixed while the l1 penalty moves along the grid
    let cfg = SolverConfig::for_shape(spec.n, spec.p);
    let grid = lasso::default_grid(&data.x, &data.y, &cfg)?;
    let ridge = lasso::solve_path_with_penalty(&data.x, &data.y, &grid, &cfg, Penalty::FixedRidge { lambda2: 2.0 })?;
    let last = ridge.steps.last().unwrap();
    println!("fixed ridge λ2=2: final nnz {}, objective {:.4}", last.coefs.nnz(), last.objective);
    Ok(())
}
