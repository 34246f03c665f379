//! Scans pure-noise problems for stretches where some |x_j^T r| moves faster
//! than λ, which is what a strong-rule violation needs.

use strongscreen::experiments;

fn main() -> strongscreen::Result<()> {
    let entries = experiments::slope_scan(50, 30, 0..40, 500, 1e-3)?;
    let mut worst = &entries[0];
    for e in &entries {
        if e.max_abs_slope > worst.max_abs_slope {
            worst = e;
        }
    }
    let steep = entries.iter().filter(|e| e.max_abs_slope > 1.0).count();
    let violating = entries.iter().filter(|e| e.sequential_violations > 0).count();
    println!("{steep} of {} seeds have a segment with slope above 1", entries.len());
    println!("{violating} seeds show an actual sequential-rule violation");
    println!(
        "steepest: seed {} slope {:.3} over {} flagged segments",
        worst.seed, worst.max_abs_slope, worst.flagged_segments
    );
    println!("violations explained by flagged slopes: {}", entries.iter().all(|e| e.linked));
    Ok(())
}
