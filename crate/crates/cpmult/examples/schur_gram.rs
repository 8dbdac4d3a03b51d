//! Positive Schur multipliers: Gram vectors, restriction, and lifting.
//!
//! A kernel φ on a finite point set is a positive Schur multiplier exactly
//! when φ_ij = ⟨a(x_i), a(x_j)⟩ for representing vectors a(x). The minimal
//! representation has rank(φ) coordinates; restricting to a subset Y and
//! re-lifting produces vectors for the whole set that extend the restricted
//! ones by zero padding, so nothing about the subset's geometry is redone.
//!
//! Run with: cargo run --example schur_gram

use num_complex::Complex64;

use cpmult::mat::ComplexMatrix;
use cpmult::schur::{
    is_minimal_rep, lift_representing, positive_schur_norm, representing_vectors, schur_apply,
    schur_norm_upper, Kernel,
};

fn main() -> cpmult::Result<()> {
    // A Gaussian kernel on five real points is strictly positive definite.
    let points = [0.0, 0.7, 1.1, 2.0, 3.2];
    let n = points.len();
    let values = ComplexMatrix::from_fn(n, n, |i, j| {
        let d: f64 = points[i] - points[j];
        Complex64::new((-d * d).exp(), 0.0)
    });
    let kernel = Kernel::from_matrix(values.clone())?;

    let rep = representing_vectors(&kernel, 1e-9)?;
    println!("gaussian kernel on {} points:", n);
    println!("  representation rank = {}", rep.rank);
    println!("  minimal             = {}", is_minimal_rep(&rep, 1e-9));
    println!(
        "  ‖gram − φ‖_max      = {:.3e}",
        rep.gram().sub(&kernel.values).norm_max()
    );

    // The positive Schur norm ‖S_φ‖ of a PSD kernel is its largest diagonal
    // entry (here 1), and the general upper bound from the representation
    // agrees.
    println!(
        "  positive Schur norm = {:.6}",
        positive_schur_norm(&kernel, 1e-9)?
    );
    println!("  norm upper bound    = {:.6}", schur_norm_upper(&kernel)?);

    // Schur multiplication against a test matrix stays below that norm.
    let t = ComplexMatrix::from_fn(n, n, |i, j| {
        Complex64::new(((i * 7 + j * 3) % 5) as f64 - 2.0, (i as f64) - (j as f64))
    });
    let st = schur_apply(&kernel, &t)?;
    println!(
        "  ‖S_φ(T)‖_F / ‖T‖_F  = {:.6}",
        st.norm_fro() / t.norm_fro()
    );

    // Restrict to three points and lift the restricted representation back.
    let subset = [0usize, 2, 4];
    let restricted = kernel.restrict(&subset)?;
    let a = representing_vectors(&restricted, 1e-9)?;
    let b = lift_representing(&kernel, &subset, &a, 1e-9)?;
    println!("\nrestriction to indices {:?}:", subset);
    println!("  restricted rank = {}", a.rank);
    println!("  lifted rank     = {}", b.rank);
    // At subset points the lifted vector is the restricted vector padded by
    // zeros — compare coordinates directly.
    for (k, &i) in subset.iter().enumerate() {
        let mut max_dev = 0.0f64;
        for c in 0..a.rank {
            max_dev = max_dev.max((b.vectors[i][c] - a.vectors[k][c]).norm());
        }
        let mut pad = 0.0f64;
        for c in a.rank..b.rank {
            pad = pad.max(b.vectors[i][c].norm());
        }
        println!(
            "  point {}: deviation {:.3e}, padding mass {:.3e}",
            i, max_dev, pad
        );
    }
    Ok(())
}
