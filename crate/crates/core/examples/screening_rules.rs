//! Applies the SAFE and strong rules at a handful of λ values and compares
//! how many predictors each keeps with the true active set.

use strongscreen::experiments::{self, Family, SimSpec};
use strongscreen::screening::{self, RuleId, RuleInputs};
use strongscreen::{coord_descent, lasso, Coefficients, SolverConfig, StandardizeMode};

fn main() -> strongscreen::Result<()> {
    let spec = SimSpec { n: 100, p: 1000, seed: 3, ..SimSpec::default() };
    let data = experiments::simulate(&spec)?.prepare(StandardizeMode::CenterAndScale, Family::Gaussian)?;
    let (x, y) = (&data.x, &data.y);

    let c0: Vec<f64> = x.inner_products(y.values())?.iter().map(|v| v.abs()).collect();
    let lmax = lasso::path_lambda_max(x, y, 1.0)?;
    let all: Vec<usize> = (0..spec.p).collect();
    let cfg = SolverConfig::default();

    println!("{:>6} {:>6} {:>7} {:>10} {:>6}", "λ/λmax", "safe", "strong", "sequential", "active");
    let mut prev_lambda = lmax;
    let mut prev = Coefficients::zeros(spec.p);
    for frac in [0.9, 0.7, 0.5, 0.3, 0.2] {
        let lambda = frac * lmax;
        let safe = screening::safe_basic(&c0, lambda, lmax, x.col_norms(), y.norm());
        let strong = screening::strong_basic(&c0, lambda, lmax);

        // the sequential rule needs |x_j^T r| at the previous solution
        let fitted = x.mul_coefs(&prev)?;
        let r: Vec<f64> = y.values().iter().zip(&fitted).map(|(a, b)| a - b).collect();
        let c_prev: Vec<f64> = x.inner_products(&r)?.iter().map(|v| v.abs()).collect();
        let seq = screening::apply_rule(RuleId::StrongSequential, &RuleInputs::new(c_prev, lambda, prev_lambda))?;

        let fit = coord_descent(x, y, lambda, 0.0, &prev, &all, &cfg)?.require_converged()?;
        println!(
            "{:>6.2} {:>6} {:>7} {:>10} {:>6}",
            frac,
            safe.n_kept(),
            strong.n_kept(),
            seq.n_kept(),
            fit.coefs.nnz()
        );
        prev = fit.coefs;
        prev_lambda = lambda;
    }
    println!("valid rule ids: {}", RuleId::valid_names());
    Ok(())
}
