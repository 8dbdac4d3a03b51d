//! Nested Kraus families along a filtration of projections.
//!
//! A filtered CP map assigns to every level p₁ ≤ p₂ ≤ … ≤ 1 a CP map on the
//! corner, consistent under compression. The nested construction produces
//! one Kraus family per level such that each family literally extends the
//! previous one: early ops compress onto the smaller corner's ops, later
//! ops annihilate it. The per-level block norms ‖Σᵢ Vₙᵢ*·Vₙᵢ‖ measure growth.
//!
//! Run with: cargo run --example nested_filtration

use cpmult::cpmap::SuperOp;
use cpmult::sample;
use cpmult::stinelift::{nested_kraus, FilteredCPMap, Filtration};

fn main() -> cpmult::Result<()> {
    let mut rng = sample::rng(23);
    let dim = 6;

    // Coordinate filtration 2 ≤ 4 ≤ 6 and a positive Schur kernel on C^6.
    let filtration = Filtration::coordinate(dim, &[2, 4, 6])?;
    let kernel = sample::psd(&mut rng, dim);
    let top = SuperOp::schur(&kernel);

    // Compress the top map through every level.
    let filtered = FilteredCPMap::from_top(filtration, &top, 1e-9)?;
    println!("filtration levels: {:?}", [2, 4, 6]);

    // Nested minimal families, one per level.
    let fam = nested_kraus(&filtered, 1e-9)?;
    for (k, level) in fam.levels.iter().enumerate() {
        println!(
            "level {}: {} ops, block norm {:.6}",
            k + 1,
            level.count(),
            fam.block_norms[k]
        );
    }
    println!("nesting residual = {:.3e}", fam.nesting_residual());

    // For a positive Schur kernel the block norm at each level is the max
    // diagonal entry of the restricted kernel.
    let cuts = [2usize, 4, 6];
    for (k, &cut) in cuts.iter().enumerate() {
        let max_diag = (0..cut)
            .map(|i| kernel.get(i, i).re)
            .fold(f64::NEG_INFINITY, f64::max);
        println!(
            "level {}: max kernel diagonal {:.6} vs block norm {:.6} (gap {:.1e})",
            k + 1,
            max_diag,
            fam.block_norms[k],
            (max_diag - fam.block_norms[k]).abs()
        );
    }

    // Nesting is verifiable op-by-op: compress a level-3 op to level 2.
    let p2 = &filtered.filtration.projections[1];
    let v3 = &fam.levels[2].ops;
    let v2 = &fam.levels[1].ops;
    for j in 0..v2.len() {
        let down = p2.mul(&v3[j]).mul(p2);
        println!(
            "‖p₂·V₃[{}]·p₂ − V₂[{}]‖_F = {:.3e}",
            j,
            j,
            down.sub(&v2[j]).norm_fro()
        );
    }
    Ok(())
}
