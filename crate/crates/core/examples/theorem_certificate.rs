//! Designs where the strong rules provably never err: the inverse Gram
//! matrix is diagonally dominant. Equicorrelation with r >= 0 qualifies;
//! negative r does not.

use strongscreen::guarantees::{self, diag_dominance_certificate};

fn main() -> strongscreen::Result<()> {
    for r in [0.0, 0.3, 0.7, -0.1, -0.2] {
        let g = guarantees::equicorrelation_gram(5, r);
        let x = guarantees::design_from_gram(&g)?;
        let cert = diag_dominance_certificate(&x)?;
        println!("equicorrelated r={r:>5}: holds {:<5} worst row margin {:+.4}", cert.holds, cert.worst_row_margin);
    }

    let closed = guarantees::equicorrelation_inverse(10, 0.3)?;
    let numeric = guarantees::equicorrelation_gram(10, 0.3).try_inverse().unwrap();
    println!("closed-form inverse error {:.1e}", (closed - numeric).abs().max());

    let tri = guarantees::lower_triangular_ones(20);
    println!("lower-triangular ones p=20: holds {}", diag_dominance_certificate(&tri)?.holds);
    Ok(())
}
