//! Average number of strong-rule violations per grid point as p grows.

use strongscreen::experiments::{self, CoefScheme, SimSpec};
use strongscreen::{SolverConfig, StandardizeMode};

fn main() -> strongscreen::Result<()> {
    let template = SimSpec { n: 100, rho: 0.5, coef_scheme: CoefScheme::Pm2, seed: 4000, ..SimSpec::default() };
    let ps = [20, 50, 100, 200];
    for &p in &ps {
        let cfg = SolverConfig { grid_size: 80, ..SolverConfig::for_shape(100, p) };
        let summary = &experiments::violation_study(&template, &[p], 5, &cfg, StandardizeMode::CenterAndScale)?[0];
        println!(
            "p {p:>4}: total {:>3}, worst mean per point {:.2}",
            summary.total(),
            summary.max_mean_per_point()
        );
    }
    Ok(())
}
