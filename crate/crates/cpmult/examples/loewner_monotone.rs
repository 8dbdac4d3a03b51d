//! Operator monotonicity via Loewner matrices, cross-checked by an oracle.
//!
//! A smooth f is operator monotone on an interval iff every Loewner matrix
//! [f[x_i, x_j]] of divided differences over nodes in that interval is PSD.
//! The test runs that criterion over many node sets; an independent oracle
//! draws random matrix pairs A ≤ B and checks f(A) ≤ f(B) directly.
//!
//! Run with: cargo run --example loewner_monotone

use cpmult::kernels::{
    loewner_matrix, monotonicity_oracle, operator_monotone_test, ScalarFunction,
};
use cpmult::mat::psd_check;
use cpmult::sample;

fn main() -> cpmult::Result<()> {
    let mut rng = sample::rng(5);

    // Node sets inside (0, ∞), sizes 2..6.
    let mut node_sets = Vec::new();
    for k in 0..40 {
        let size = 2 + (k % 5);
        node_sets.push(sample::nodes(&mut rng, size, 0.1, 10.0));
    }

    println!("{:<10} {:>14} {:>14} {:>10}", "function", "loewner", "oracle", "agree");
    for f in [
        ScalarFunction::sqrt(),
        ScalarFunction::log1p(),
        ScalarFunction::power(0.5)?,
        ScalarFunction::identity(),
        ScalarFunction::square(),
        ScalarFunction::exp(),
    ] {
        let loewner = operator_monotone_test(&f, &node_sets, 1e-9)?;
        let oracle = monotonicity_oracle(&f, 3, 300, 0)?;
        println!(
            "{:<10} {:>14} {:>14} {:>10}",
            f.name,
            if loewner.all_pass { "monotone" } else { "not monotone" },
            if oracle.monotone { "monotone" } else { "not monotone" },
            loewner.all_pass == oracle.monotone
        );
    }

    // The smallest failure is visible by hand: for f(t) = t² on two nodes
    // the Loewner matrix is [[2x₁, x₁+x₂], [x₁+x₂, 2x₂]] with determinant
    // −(x₁−x₂)², negative whenever the nodes differ.
    let two = loewner_matrix(&ScalarFunction::square(), &[1.0, 2.0])?;
    let verdict = psd_check(&two.values, 1e-9)?;
    println!("\nsquare on nodes {{1, 2}}:");
    println!("  loewner matrix  = [[2, 3], [3, 4]]");
    println!("  min eigenvalue  = {:+.6} (exact: 3 − √10)", verdict.min_eigenvalue);
    println!("  determinant     = {:+.6} (exact: −1)", 2.0 * 4.0 - 3.0 * 3.0);
    Ok(())
}
