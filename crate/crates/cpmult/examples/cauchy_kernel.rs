//! The Cauchy kernel 1/(x+y) and its two Gram representations.
//!
//! On strictly positive nodes the kernel is PSD with the integral form
//! 1/(x+y) = ∫₀^∞ e^{−sx}·e^{−sy} ds. The exact representation comes from
//! pivoted Cholesky; the analytic one discretizes the integral with a
//! Gauss–Laguerre rule, so its vectors are literal samples of s ↦ e^{−sx}.
//! A single node x shows the L² norm identity ‖e^{−sx}‖² = 1/(2x).
//!
//! Run with: cargo run --example cauchy_kernel

use cpmult::kernels::cauchy_kernel;
use cpmult::mat::psd_check;

fn main() -> cpmult::Result<()> {
    // Eight log-spaced nodes across two decades.
    let nodes: Vec<f64> = (0..8)
        .map(|i| 0.1 * 100f64.powf(i as f64 / 7.0))
        .collect();
    let ck = cauchy_kernel(&nodes, 40)?;

    println!("nodes: {:?}", nodes.iter().map(|x| (x * 1000.0).round() / 1000.0).collect::<Vec<_>>());
    let verdict = psd_check(&ck.kernel.values, 1e-9)?;
    println!("kernel PSD          = {}", verdict.is_psd);
    println!("exact rank          = {}", ck.exact.rank);
    println!(
        "exact gram error    = {:.3e}",
        ck.exact.gram().sub(&ck.kernel.values).norm_max()
    );
    println!("quadrature error    = {:.3e} (40-point Gauss–Laguerre)", ck.quadrature_error);

    // The quadrature representation converges as points are added.
    println!("\nquadrature error by rule size:");
    for q in [5usize, 10, 20, 40, 80] {
        let ck = cauchy_kernel(&nodes, q)?;
        println!("  {:>3} points: {:.3e}", q, ck.quadrature_error);
    }

    // Single node: the representing vector's squared norm is the integral
    // ∫₀^∞ e^{−2sx} ds = 1/(2x).
    println!("\nsingle-node norm identity ‖a(x)‖² = 1/(2x):");
    for &x in &[0.25, 1.0, 4.0] {
        let one = cauchy_kernel(&[x], 40)?;
        let norm_sq: f64 = one.quadrature.vectors[0]
            .iter()
            .map(|v| v.norm_sqr())
            .sum();
        println!(
            "  x = {:>4}: quadrature {:.9}, exact {:.9}",
            x,
            norm_sq,
            1.0 / (2.0 * x)
        );
    }
    Ok(())
}
