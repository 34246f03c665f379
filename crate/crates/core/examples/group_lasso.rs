//! Group lasso on blocks of correlated predictors.

use strongscreen::experiments::{self, Family, SimSpec};
use strongscreen::group::{self, GroupSpec};
use strongscreen::{SolverConfig, StandardizeMode};

fn main() -> strongscreen::Result<()> {
    let spec = SimSpec { n: 120, p: 200, rho: 0.2, nonzero_frac: 0.1, seed: 17, ..SimSpec::default() };
    let data = experiments::simulate(&spec)?.prepare(StandardizeMode::CenterAndScale, Family::Gaussian)?;
    let groups = GroupSpec::uniform(40, 5)?;

    let cfg = SolverConfig::for_shape(spec.n, spec.p);
    let grid = group::default_group_grid(&data.x, &data.y, &groups, &cfg)?;
    let path = group::solve_group_path(&data.x, &data.y, &groups, &grid, &cfg)?;

    for step in path.steps.iter().step_by(15) {
        let active_groups = (0..groups.n_groups())
            .filter(|&g| groups.range(g).any(|j| step.coefs.get(j) != 0.0))
            .count();
        println!(
            "λ {:.4}: {active_groups:>2} active groups, strong set {:>3} groups",
            step.lambda, step.strong_set_size
        );
    }
    println!("rule violations {}", path.total_rule_violations());
    Ok(())
}
