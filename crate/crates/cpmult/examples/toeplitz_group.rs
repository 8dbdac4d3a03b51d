//! Toeplitz kernels on finite groups and the dual positivity criterion.
//!
//! A function f on a finite group G induces the kernel N_f(g, h) = f(g⁻¹h).
//! For abelian G, positivity of N_f is equivalent to nonnegativity of every
//! character coefficient c_χ = Σ_g f(g)·conj(χ(g)) — a finite Bochner
//! theorem. Nonabelian groups still get the PSD verdict on N_f itself.
//!
//! Run with: cargo run --example toeplitz_group

use num_complex::Complex64;

use cpmult::kernels::{toeplitz_kernel, toeplitz_positive_check, FiniteGroup};

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn main() -> cpmult::Result<()> {
    // Z/6 with the autocorrelation of h = δ₀ + δ₁: automatically positive
    // definite because its Fourier coefficients are |ĥ(χ)|² = 2 + 2cos θ.
    let z6 = FiniteGroup::cyclic(6)?;
    let f = [re(2.0), re(1.0), re(0.0), re(0.0), re(0.0), re(1.0)];
    let report = toeplitz_positive_check(&z6, &f, 1e-9)?;
    println!("Z/6 with f = [2, 1, 0, 0, 0, 1]:");
    println!("  N_f positive semidefinite = {}", report.verdict.is_psd);
    let coeffs = report.coefficients.as_ref().expect("abelian group");
    print!("  character coefficients    =");
    for c in coeffs {
        print!(" {:+.3}", c.re);
    }
    println!();
    println!(
        "  min coefficient           = {:+.3} (matches min eigenvalue {:+.3})",
        coeffs.iter().map(|c| c.re).fold(f64::INFINITY, f64::min),
        report.verdict.min_eigenvalue
    );

    // Lower the value at the identity and the k = 3 coefficient
    // 1 + 2cos(π) = −1 goes negative together with the bottom eigenvalue.
    let g = [re(1.0), re(1.0), re(0.0), re(0.0), re(0.0), re(1.0)];
    let report = toeplitz_positive_check(&z6, &g, 1e-9)?;
    println!("\nZ/6 with f(e) lowered to 1:");
    println!("  N_f positive semidefinite = {}", report.verdict.is_psd);
    let coeffs = report.coefficients.as_ref().unwrap();
    println!(
        "  min coefficient           = {:+.3} (matches min eigenvalue {:+.3})",
        coeffs.iter().map(|c| c.re).fold(f64::INFINITY, f64::min),
        report.verdict.min_eigenvalue
    );

    // The kernel itself is the group-translated Toeplitz structure.
    let kernel = toeplitz_kernel(&z6, &f)?;
    println!("\nkernel row 0: first row of the circulant:");
    print!("  ");
    for j in 0..6 {
        print!("{:+.1} ", kernel.values.get(0, j).re);
    }
    println!();

    // Dihedral D_4 is nonabelian: no character shortcut, the PSD verdict
    // still decides. The class function 'constant on everything' is PSD.
    let d4 = FiniteGroup::dihedral(4)?;
    let ones = vec![re(1.0); d4.order];
    let report = toeplitz_positive_check(&d4, &ones, 1e-9)?;
    println!("\ndihedral group of order {}:", d4.order);
    println!("  abelian                   = {}", d4.is_abelian());
    println!("  N_1 positive semidefinite = {}", report.verdict.is_psd);
    println!(
        "  character route available = {}",
        report.coefficients.is_some()
    );
    Ok(())
}
