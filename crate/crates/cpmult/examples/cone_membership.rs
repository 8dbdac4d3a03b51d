//! The cone of completely positive multipliers and its boundary.
//!
//! Over an algebra M, the multipliers Σᵢ bᵢᵗ⊗bᵢ† with bᵢ ∈ M are exactly
//! the completely positive ones: their Choi matrices are PSD and a Kraus
//! family certifies the decomposition. The transpose map is the classic
//! non-example — a positive map whose Choi matrix has eigenvalue −1.
//!
//! Run with: cargo run --example cone_membership

use num_complex::Complex64;

use cpmult::alg::VNAlg;
use cpmult::opmult::{cone_element, cp_multiplier_check, TensorMultiplier};
use cpmult::sample;

fn main() -> cpmult::Result<()> {
    let mut rng = sample::rng(17);
    let n = 3;
    let m = VNAlg::full(n);

    // A cone element from three random b's.
    let b_list: Vec<_> = (0..3).map(|_| sample::matrix(&mut rng, n, n)).collect();
    let phi = cone_element(&b_list, &m, 1e-9)?;
    let report = cp_multiplier_check(&phi, &m, 1e-9)?;
    println!("Σ bᵢᵗ⊗bᵢ† over M_3 with 3 random terms:");
    println!("  completely positive = {}", report.completely_positive);
    println!("  Choi min eigenvalue = {:+.3e}", report.choi_min_eigenvalue);
    let fam = report.kraus.as_ref().expect("CP verdicts carry a Kraus family");
    println!("  Kraus family length = {}", fam.count());
    println!("  reconstruction      = {:.3e}", report.reconstruction_residual);

    // The transpose multiplier: matrix of T ↦ Tᵗ in the column-stacking
    // identification is the swap (vec-commutation) matrix.
    let swap = cpmult::mat::ComplexMatrix::from_fn(n * n, n * n, |r, c| {
        if c == (r % n) * n + r / n {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let transpose = TensorMultiplier::accept(swap, &m, &m, 1e-9)?;
    let report = cp_multiplier_check(&transpose, &m, 1e-9)?;
    println!("\ntranspose map on M_3:");
    println!("  in the multiplier space = true (membership defect {:.1e})", transpose.membership_defect);
    println!("  completely positive     = {}", report.completely_positive);
    println!("  Choi min eigenvalue     = {:+.3} (exactly −1)", report.choi_min_eigenvalue);

    // Mixing the transpose toward a CP element crosses the cone boundary:
    // (1−t)·Σbᵗ⊗b† + t·swap leaves the cone once the Choi matrix dips.
    println!("\nmixing a cone element toward the transpose:");
    let base = cone_element(&b_list[..1], &m, 1e-9)?;
    for &t in &[0.0, 0.25, 0.5, 0.75, 1.0] {
        let mix = base
            .matrix
            .scale(Complex64::new(1.0 - t, 0.0))
            .add(&transpose.matrix.scale(Complex64::new(t, 0.0)));
        let phi = TensorMultiplier::accept(mix, &m, &m, 1e-9)?;
        let report = cp_multiplier_check(&phi, &m, 1e-9)?;
        println!(
            "  t = {:.2}: cp = {:<5} choi min = {:+.4}",
            t, report.completely_positive, report.choi_min_eigenvalue
        );
    }
    Ok(())
}
