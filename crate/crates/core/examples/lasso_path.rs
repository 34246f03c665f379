//! Fits a lasso path on simulated data and prints the support as λ shrinks.

use strongscreen::experiments::{self, Family, SimSpec};
use strongscreen::{lasso, solve_path, SolverConfig, StandardizeMode};

fn main() -> strongscreen::Result<()> {
    let spec = SimSpec { n: 100, p: 500, rho: 0.3, seed: 1, ..SimSpec::default() };
    let sim = experiments::simulate(&spec)?;
    let data = sim.prepare(StandardizeMode::CenterAndScale, Family::Gaussian)?;

    let cfg = SolverConfig::for_shape(spec.n, spec.p);
    let grid = lasso::default_grid(&data.x, &data.y, &cfg)?;
    let path = solve_path(&data.x, &data.y, &grid, &cfg)?;

    println!("lambda_max = {:.4}", path.lambda_max);
    println!("{:>10} {:>6} {:>8} {:>8} {:>6}", "lambda", "nnz", "strong", "ever", "sweeps");
    for step in path.steps.iter().step_by(10) {
        println!(
            "{:>10.4} {:>6} {:>8} {:>8} {:>6}",
            step.lambda,
            step.coefs.nnz(),
            step.strong_set_size,
            step.ever_active_size,
            step.sweeps
        );
    }

    // coefficients on the original scale at the last grid point
    let last = path.steps.last().unwrap();
    let orig = data.transform.to_original(&last.coefs);
    println!("intercept {:.4}, first coefficients:", orig.intercept);
    for (j, b) in orig.iter().take(5) {
        println!("  x{} = {:.4}", j + 1, b);
    }
    println!("all KKT-clean: {}", path.all_kkt_clean());
    Ok(())
}
