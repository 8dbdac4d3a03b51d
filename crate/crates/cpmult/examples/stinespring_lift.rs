//! Lifting a minimal Kraus family from a corner to the whole space.
//!
//! Take a completely positive map Φ on M_n that is bimodular over a small
//! algebra D, compress it to a corner p·(·)·p by a projection p ∈ D, and
//! compute a minimal family for the compression. The lift reconstructs a
//! minimal family W for Φ itself such that compressing W gives back the
//! corner family op-by-op, and every W-op commutes with D.
//!
//! Run with: cargo run --example stinespring_lift

use cpmult::alg::VNAlg;
use cpmult::cpmap::{minimal_kraus_of, superop_from_kraus, KrausFamily};
use cpmult::mat::ComplexMatrix;
use cpmult::sample;
use cpmult::stinelift::{compress_cp, lift_minimal_kraus};
use num_complex::Complex64;

fn main() -> cpmult::Result<()> {
    let mut rng = sample::rng(11);
    let dim = 4;

    // D = the diagonal masa in M_4. Its commutant is itself, so Kraus
    // operators drawn from the diagonal give a D-bimodular CP map (a Schur
    // multiplication in disguise).
    let d = VNAlg::diagonal(dim);
    let ops: Vec<ComplexMatrix> = (0..3)
        .map(|_| {
            let full = sample::matrix(&mut rng, dim, dim);
            ComplexMatrix::from_fn(dim, dim, |i, j| {
                if i == j {
                    full.get(i, i)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
        })
        .collect();
    let family = KrausFamily::new(dim, ops)?;
    let phi = superop_from_kraus(&family);

    // p = projection onto the first two coordinates: a projection inside D.
    let p = ComplexMatrix::from_fn(dim, dim, |i, j| {
        if i == j && i < 2 {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });

    // Compress and take a minimal family of the corner map.
    let psi = compress_cp(&phi, &p)?;
    let v = minimal_kraus_of(&psi, 1e-9)?;
    println!("corner family length = {}", v.count());

    // Lift: a minimal family for Φ extending the corner family.
    let lift = lift_minimal_kraus(&phi, &d, &p, &v, 1e-9)?;
    println!("lifted family length = {}", lift.family.count());
    println!("matched indices      = {:?}", lift.matched);
    println!("map residual         = {:.3e}", lift.map_residual);
    println!("restriction residual = {:.3e}", lift.restriction_residual);
    println!("commutant defect     = {:.3e}", lift.commutant_defect);

    // The compression of each matched lifted op reproduces the corner op.
    for (j, &w_idx) in lift.matched.iter().enumerate() {
        let compressed = lift.family.ops[w_idx].mul(&p);
        let err = compressed.sub(&v.ops[j]).norm_fro();
        println!("  ‖W[{}]·p − V[{}]‖_F = {:.3e}", w_idx, j, err);
    }
    Ok(())
}
