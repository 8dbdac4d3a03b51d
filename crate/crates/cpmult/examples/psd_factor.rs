//! Positive semidefiniteness with certificates either way.
//!
//! A PSD verdict comes with a low-rank Gram factor R (R*·R reconstructs the
//! matrix); a negative verdict comes with a witness vector whose Rayleigh
//! quotient is the offending negative eigenvalue.
//!
//! Run with: cargo run --example psd_factor

use num_complex::Complex64;

use cpmult::mat::{psd_check, rayleigh, ComplexMatrix};

fn main() -> cpmult::Result<()> {
    // The all-ones matrix is rank-one PSD: J = v*·v for the row of ones.
    let ones = ComplexMatrix::from_fn(3, 3, |_, _| Complex64::new(1.0, 0.0));
    let verdict = psd_check(&ones, 1e-9)?;
    println!("all-ones 3x3:");
    println!("  psd            = {}", verdict.is_psd);
    println!("  min eigenvalue = {:+.3e}", verdict.min_eigenvalue);
    let factor = verdict.factor.expect("affirmative verdicts carry a factor");
    println!("  factor rank    = {}", factor.rank);
    let recon = factor.r.adjoint().mul(&factor.r);
    println!(
        "  ‖R*R − A‖_F    = {:.3e}",
        recon.sub(&ones).norm_fro()
    );

    // Flip one off-diagonal pair past the diagonal and positivity breaks;
    // the witness certifies it without trusting the eigensolver twice.
    let spoiled = ComplexMatrix::from_real_rows(&[&[1.0, 2.0], &[2.0, 1.0]]);
    let verdict = psd_check(&spoiled, 1e-9)?;
    println!("\n[[1,2],[2,1]]:");
    println!("  psd            = {}", verdict.is_psd);
    println!("  min eigenvalue = {:+.3e}", verdict.min_eigenvalue);
    let witness = verdict.witness.expect("negative verdicts carry a witness");
    println!(
        "  witness Rayleigh quotient = {:+.3e}",
        rayleigh(&spoiled, &witness)
    );

    // A complex Hermitian example: the Gram factor of a Cauchy-type kernel
    // exposes its numerical rank long before the matrix looks singular.
    let nodes = [1.0, 2.0, 4.0, 8.0, 16.0];
    let cauchy = ComplexMatrix::from_fn(5, 5, |i, j| {
        Complex64::new(1.0 / (nodes[i] + nodes[j]), 0.0)
    });
    let verdict = psd_check(&cauchy, 1e-9)?;
    let factor = verdict.factor.unwrap();
    println!("\ncauchy kernel on 5 nodes:");
    println!("  psd            = {}", verdict.is_psd);
    println!("  numerical rank = {} (full size 5)", factor.rank);
    Ok(())
}
