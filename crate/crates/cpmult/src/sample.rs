//! Seeded random instances for tests, examples, and the monotonicity oracle.
//!
//! Everything funnels through one ChaCha stream so a seed pins the whole
//! draw sequence.

use crate::mat::ComplexMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Deterministic RNG for a seed.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn cunit(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
}

/// Complex matrix with i.i.d. entries uniform in the centered unit box.
pub fn matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| cunit(rng))
}

/// Real matrix with i.i.d. entries uniform in [-0.5, 0.5].
pub fn real_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| Complex64::new(rng.gen::<f64>() - 0.5, 0.0))
}

/// Random Hermitian matrix (G + G*)/2.
pub fn hermitian(rng: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
    let g = matrix(rng, n, n);
    g.add(&g.adjoint()).scale(Complex64::new(0.5, 0.0))
}

/// Random PSD matrix G*·G (full rank almost surely).
pub fn psd(rng: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
    let g = matrix(rng, n, n);
    g.adjoint().mul(&g)
}

/// Random PSD matrix of rank at most `rank`.
pub fn psd_rank(rng: &mut ChaCha8Rng, n: usize, rank: usize) -> ComplexMatrix {
    let g = matrix(rng, rank, n);
    g.adjoint().mul(&g)
}

/// Random Hermitian matrix guaranteed not PSD: draw Hermitian, flip sign if
/// it happens to be PSD (so the result has a negative eigenvalue whenever
/// the draw is nonzero).
pub fn hermitian_not_psd(rng: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
    let h = hermitian(rng, n);
    let eig = crate::mat::herm_eig(&h).expect("sampled Hermitian");
    let scale = eig.values.iter().map(|v| v.abs()).fold(0.0, f64::max).max(1.0);
    if eig.values[0] >= -1e-9 * scale {
        // PSD draw (measure ~0 for n ≥ 2 but possible); push it below zero.
        let top = eig.values.last().copied().unwrap_or(1.0);
        h.sub(&ComplexMatrix::identity(n).scale(Complex64::new(top + 1.0, 0.0)))
    } else {
        h
    }
}

/// Random unitary matrix: Gram–Schmidt on a random complex matrix.
pub fn unitary(rng: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
    loop {
        let g = matrix(rng, n, n);
        if let Some(q) = gram_schmidt_columns(&g) {
            return q;
        }
    }
}

fn gram_schmidt_columns(g: &ComplexMatrix) -> Option<ComplexMatrix> {
    let n = g.rows();
    let mut cols: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    for j in 0..n {
        let mut v: Vec<Complex64> = (0..n).map(|i| g.get(i, j)).collect();
        for u in &cols {
            let ip: Complex64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            for k in 0..n {
                v[k] -= ip * u[k];
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-8 {
            return None;
        }
        for z in &mut v {
            *z /= norm;
        }
        cols.push(v);
    }
    Some(ComplexMatrix::from_fn(n, n, |i, j| cols[j][i]))
}

/// Strictly increasing nodes drawn from the open interval (lo, hi), pairwise
/// separated by at least 1e-6·(hi−lo).
pub fn nodes(rng: &mut ChaCha8Rng, count: usize, lo: f64, hi: f64) -> Vec<f64> {
    let sep = 1e-6 * (hi - lo);
    let mut out: Vec<f64> = Vec::with_capacity(count);
    while out.len() < count {
        let x = lo + (hi - lo) * rng.gen::<f64>();
        if out.iter().all(|&y| (x - y).abs() > sep) {
            out.push(x);
        }
    }
    out.sort_by(|a, b| a.partial_cmp(b).unwrap());
    out
}
