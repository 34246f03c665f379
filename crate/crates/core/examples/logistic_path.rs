//! Sparse logistic regression on a simulated sparse binary design, with the
//! strong sequential rule checked at every λ.

use strongscreen::experiments::{self, DesignKind, Family, SimSpec};
use strongscreen::logistic;
use strongscreen::{SolverConfig, StandardizeMode};

fn main() -> strongscreen::Result<()> {
    let spec = SimSpec {
        n: 200,
        p: 2000,
        design: DesignKind::SparseBinary { density: 0.01 },
        family: Family::Binomial,
        seed: 9,
        ..SimSpec::default()
    };
    let data = experiments::simulate(&spec)?.prepare(StandardizeMode::CenterAndScale, Family::Binomial)?;
    let cfg = SolverConfig::for_shape(spec.n, spec.p);
    let grid = logistic::default_logistic_grid(&data.x, &data.y, &cfg)?;
    let path = logistic::solve_path_logistic(&data.x, &data.y, &grid, &cfg)?;

    for step in path.steps.iter().step_by(20) {
        println!(
            "λ {:.4}  nnz {:>4}  strong set {:>5}  intercept {:+.3}",
            step.lambda,
            step.coefs.nnz(),
            step.strong_set_size,
            step.coefs.intercept
        );
    }
    println!(
        "rule violations {}, converged {}",
        path.total_rule_violations(),
        path.all_converged()
    );
    Ok(())
}
