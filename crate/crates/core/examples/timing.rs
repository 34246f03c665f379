//! Wall-clock comparison of the path strategies on one p >> n problem.

use strongscreen::experiments::{self, CoefScheme, SimSpec};
use strongscreen::{SolverConfig, StandardizeMode, Strategy};

fn main() -> strongscreen::Result<()> {
    let spec = SimSpec {
        n: 200,
        p: 5000,
        nonzero_frac: 30.0 / 5000.0,
        coef_scheme: CoefScheme::AlternatingEqual,
        seed: 11,
        ..SimSpec::default()
    };
    let cfg = SolverConfig::for_shape(spec.n, spec.p);
    let result = experiments::timing_bench(&spec, &Strategy::ALL, &cfg, StandardizeMode::CenterAndScale, "timing", 1e-6)?;
    for row in &result.rows {
        println!(
            "{:<16} {:>7.3}s",
            row.strategy.as_deref().unwrap_or("?"),
            row.seconds.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
