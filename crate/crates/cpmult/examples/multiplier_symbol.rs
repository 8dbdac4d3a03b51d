//! Extracting the operator-sum symbol of a tensor multiplier.
//!
//! A multiplier φ over a pair of algebras (M, N) acts on matrices by
//! S_φ(T) = Σᵢ bᵢ·T·aᵢ with aᵢ ∈ M, bᵢ ∈ N. The symbol is recovered from
//! the matrix of S_φ by realignment and singular value decomposition, along
//! with the Haagerup-type bound ‖Σ aᵢaᵢ*‖^½·‖Σ bᵢbᵢ*‖^½ of the found
//! decomposition.
//!
//! Run with: cargo run --example multiplier_symbol

use num_complex::Complex64;

use cpmult::alg::VNAlg;
use cpmult::mat::{op_norm, ComplexMatrix};
use cpmult::opmult::{symbol, TensorMultiplier};
use cpmult::sample;

fn main() -> cpmult::Result<()> {
    let mut rng = sample::rng(13);

    // An elementary tensor aᵗ⊗b: one-term symbol, bound = ‖a‖·‖b‖.
    let a = sample::matrix(&mut rng, 3, 3);
    let b = sample::matrix(&mut rng, 3, 3);
    let phi = TensorMultiplier::elementary(&a, &b)?;
    let m = VNAlg::full(3);
    let sym = symbol(&phi, &m, &m, 1e-9)?;
    println!("elementary tensor a ⊗ b on M_3:");
    println!("  symbol length = {}", sym.count());
    println!(
        "  ph bound      = {:.6} vs ‖a‖·‖b‖ = {:.6}",
        sym.ph_bound,
        op_norm(&a)? * op_norm(&b)?
    );

    // The symbol acts correctly: check S_φ(T) = b·T·a on a random T.
    let t = sample::matrix(&mut rng, 3, 3);
    let expected = b.mul(&t).mul(&a);
    let got = sym.apply(&t)?;
    println!(
        "  ‖S_φ(T) − b·T·a‖_F = {:.3e}",
        got.sub(&expected).norm_fro()
    );

    // A Schur multiplier over the diagonal masa: the symbol's length is the
    // rank of the kernel, and the factors are diagonal.
    let n = 4;
    let kernel = ComplexMatrix::from_fn(n, n, |i, j| {
        Complex64::new(0.6f64.powi((i as i32 - j as i32).abs()), 0.0)
    });
    let mult_matrix = ComplexMatrix::from_fn(n * n, n * n, |r, c| {
        if r == c {
            kernel.get(r / n, r % n)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let diag = VNAlg::diagonal(n);
    let phi = TensorMultiplier::accept(mult_matrix, &diag, &diag, 1e-9)?;
    let sym = symbol(&phi, &diag, &diag, 1e-9)?;
    println!("\nschur multiplier of the 0.6^|i−j| kernel over the diagonal masa:");
    println!("  membership defect = {:.3e}", phi.membership_defect);
    println!("  symbol length     = {} (kernel rank {})", sym.count(), n);
    println!("  ph bound          = {:.6} (max kernel diagonal = 1)", sym.ph_bound);

    // Matrix units are the sharpest probes: S_φ(E_ij) = φ_ij·E_ij.
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let e = ComplexMatrix::unit(n, n, i, j);
            let image = sym.apply(&e)?;
            let target = e.scale(kernel.get(i, j));
            worst = worst.max(image.sub(&target).norm_fro());
        }
    }
    println!("  worst matrix-unit action error = {:.3e}", worst);

    // Every factor stays in the algebra.
    let mut defect = 0.0f64;
    for op in sym.a_ops.iter().chain(&sym.b_ops) {
        defect = defect.max(diag.membership_defect(op));
    }
    println!("  worst factor membership defect = {:.3e}", defect);
    Ok(())
}
