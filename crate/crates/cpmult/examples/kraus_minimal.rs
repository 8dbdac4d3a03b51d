//! Minimal Kraus families: strong independence, Choi rank, minimalization.
//!
//! Every completely positive map Φ(x) = Σᵢ aᵢ*·x·aᵢ has a minimal
//! operator-sum form whose length equals the rank of its Choi matrix, and a
//! redundant family compresses onto it by a deterministic change of frame.
//!
//! Run with: cargo run --example kraus_minimal

use cpmult::cpmap::{
    choi, is_strongly_independent, minimal_kraus_of, minimalize, superop_from_kraus, KrausFamily,
};
use cpmult::sample;

fn main() -> cpmult::Result<()> {
    let mut rng = sample::rng(7);

    // A CP map on 3x3 matrices from two random Kraus operators.
    let a1 = sample::matrix(&mut rng, 3, 3);
    let a2 = sample::matrix(&mut rng, 3, 3);
    let family = KrausFamily::new(3, vec![a1.clone(), a2.clone()])?;
    let map = superop_from_kraus(&family);
    let choi_rank = cpmult::cpmap::psd_rank(&choi(&map)?.matrix, 1e-9)?;
    println!("two random Kraus operators on C^3:");
    println!("  Choi rank = {}", choi_rank);

    let report = is_strongly_independent(&family, 1e-9)?;
    println!("  strongly independent = {}", report.independent);

    // Pad the family with redundancy: a duplicate and a linear combination.
    let a3 = a1.add(&a2.scale(num_complex::Complex64::new(0.5, -0.25)));
    let padded = KrausFamily::new(3, vec![a1, a2.clone(), a2, a3])?;
    println!("\npadded to {} operators (duplicate + combination):", padded.count());
    let report = is_strongly_independent(&padded, 1e-9)?;
    println!("  strongly independent = {}", report.independent);

    // Minimalization recovers a family of the Choi-rank length implementing
    // the same map.
    let min = minimalize(&padded, 1e-9)?;
    println!("  minimalized length   = {}", min.family.count());
    let same = superop_from_kraus(&min.family);
    let padded_map = superop_from_kraus(&padded);
    println!(
        "  map residual         = {:.3e}",
        cpmult::cpmap::superop_residual(&same, &padded_map)?
    );
    let report = is_strongly_independent(&min.family, 1e-9)?;
    println!("  strongly independent = {}", report.independent);

    // Going the other way: a minimal family straight from the map.
    let fresh = minimal_kraus_of(&padded_map, 1e-9)?;
    println!("\nminimal family from the super-operator alone:");
    println!("  length = {} (equals the Choi rank {})", fresh.count(), choi_rank);
    Ok(())
}
