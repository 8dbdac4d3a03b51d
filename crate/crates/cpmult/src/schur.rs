//! Schur multipliers over finite weighted point sets: entrywise action,
//! positivity with certificates, Gram representing vectors, minimality,
//! representing-vector lifting, and exhaustion analysis.
//!
//! Weights are metadata: in orthonormalized coordinates the entrywise action
//! does not see the measure, so every verdict here is weight-free.

use crate::error::{Error, Result};
use crate::mat::{herm_eig, pivoted_cholesky, psd_check, ComplexMatrix, PsdVerdict};
use num_complex::Complex64;

/// Finite weighted point set (X, μ): unique labels, strictly positive weights.
#[derive(Clone, Debug)]
pub struct WeightedPointSet {
    pub labels: Vec<String>,
    pub weights: Vec<f64>,
}

impl WeightedPointSet {
    pub fn new(labels: Vec<String>, weights: Vec<f64>) -> Result<Self> {
        if labels.len() != weights.len() {
            return Err(Error::InvalidPointSet(format!(
                "{} labels vs {} weights",
                labels.len(),
                weights.len()
            )));
        }
        for (i, w) in weights.iter().enumerate() {
            if !(*w > 0.0) {
                return Err(Error::InvalidPointSet(format!(
                    "weight {} at point {} is not strictly positive",
                    w, i
                )));
            }
        }
        for i in 0..labels.len() {
            for j in (i + 1)..labels.len() {
                if labels[i] == labels[j] {
                    return Err(Error::InvalidPointSet(format!(
                        "duplicate label '{}' at positions {} and {}",
                        labels[i], i, j
                    )));
                }
            }
        }
        Ok(WeightedPointSet { labels, weights })
    }

    /// n points labeled x1..xn with unit weights.
    pub fn uniform(n: usize) -> Self {
        WeightedPointSet {
            labels: (1..=n).map(|i| format!("x{}", i)).collect(),
            weights: vec![1.0; n],
        }
    }

    pub fn size(&self) -> usize {
        self.labels.len()
    }

    /// Restriction to a subset of point indices.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        let mut labels = Vec::with_capacity(indices.len());
        let mut weights = Vec::with_capacity(indices.len());
        for &i in indices {
            if i >= self.size() {
                return Err(Error::InvalidPointSet(format!(
                    "index {} out of range for {} points",
                    i,
                    self.size()
                )));
            }
            labels.push(self.labels[i].clone());
            weights.push(self.weights[i]);
        }
        WeightedPointSet::new(labels, weights)
    }
}

/// Kernel φ on X×X, stored as the value matrix φ_ij = φ(x_i, x_j).
#[derive(Clone, Debug)]
pub struct Kernel {
    pub space: WeightedPointSet,
    pub values: ComplexMatrix,
}

impl Kernel {
    pub fn new(space: WeightedPointSet, values: ComplexMatrix) -> Result<Self> {
        let n = space.size();
        if values.rows() != n || values.cols() != n {
            return Err(Error::Shape(format!(
                "kernel is {}x{} over {} points",
                values.rows(),
                values.cols(),
                n
            )));
        }
        Ok(Kernel { space, values })
    }

    /// Kernel over the uniform point set of matching size.
    pub fn from_matrix(values: ComplexMatrix) -> Result<Self> {
        let n = values.rows();
        Self::new(WeightedPointSet::uniform(n), values)
    }

    /// Restriction φ|_{Y×Y} for a list of point indices.
    pub fn restrict(&self, indices: &[usize]) -> Result<Kernel> {
        let space = self.space.subset(indices)?;
        let values = ComplexMatrix::from_fn(indices.len(), indices.len(), |i, j| {
            self.values.get(indices[i], indices[j])
        });
        Kernel::new(space, values)
    }
}

/// Gram representation: vectors a(x) ∈ C^rank with ⟨a(x_i), a(x_j)⟩ = φ_ij,
/// the inner product conjugate-linear in the first slot.
#[derive(Clone, Debug)]
pub struct GramRep {
    pub space: WeightedPointSet,
    pub rank: usize,
    pub vectors: Vec<Vec<Complex64>>,
}

impl GramRep {
    pub fn new(space: WeightedPointSet, rank: usize, vectors: Vec<Vec<Complex64>>) -> Result<Self> {
        if vectors.len() != space.size() {
            return Err(Error::Shape(format!(
                "{} vectors over {} points",
                vectors.len(),
                space.size()
            )));
        }
        for (i, v) in vectors.iter().enumerate() {
            if v.len() != rank {
                return Err(Error::Shape(format!(
                    "vector {} has length {}, declared rank {}",
                    i,
                    v.len(),
                    rank
                )));
            }
        }
        Ok(GramRep {
            space,
            rank,
            vectors,
        })
    }

    /// The Gram matrix ⟨a(x_i), a(x_j)⟩.
    pub fn gram(&self) -> ComplexMatrix {
        let n = self.vectors.len();
        ComplexMatrix::from_fn(n, n, |i, j| {
            self.vectors[i]
                .iter()
                .zip(&self.vectors[j])
                .map(|(a, b)| a.conj() * b)
                .sum()
        })
    }

    /// ‖a(x)‖² per point.
    pub fn norms_sq(&self) -> Vec<f64> {
        self.vectors
            .iter()
            .map(|v| v.iter().map(|z| z.norm_sqr()).sum())
            .collect()
    }
}

/// Increasing subsets X_1 ⊆ … ⊆ X_N = X with per-level sup ‖a(x)‖² bounds.
#[derive(Clone, Debug)]
pub struct Exhaustion {
    pub subsets: Vec<Vec<usize>>,
    pub block_bounds: Vec<f64>,
}

/// Entrywise action T ↦ φ∘T.
pub fn schur_apply(phi: &Kernel, t: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = phi.space.size();
    if t.rows() != n || t.cols() != n {
        return Err(Error::Shape(format!(
            "operator is {}x{} over {} points",
            t.rows(),
            t.cols(),
            n
        )));
    }
    Ok(phi.values.hadamard(t))
}

/// Positivity of the entrywise map: at finite dimension S_φ positive ⟺
/// completely positive ⟺ the value matrix PSD; returns the PSD verdict with
/// certificate either way.
pub fn positive_schur_check(phi: &Kernel, tol: f64) -> Result<PsdVerdict> {
    psd_check(&phi.values, tol)
}

/// Minimal Gram representation from pivoted Cholesky: a(x_i) is column i of
/// the factor R (with R*·R = φ), so rank = numerical rank of φ.
pub fn representing_vectors(phi: &Kernel, tol: f64) -> Result<GramRep> {
    let factor = pivoted_cholesky(&phi.values, tol)?;
    let n = phi.space.size();
    let vectors = (0..n)
        .map(|j| (0..factor.rank).map(|k| factor.r.get(k, j)).collect())
        .collect();
    GramRep::new(phi.space.clone(), factor.rank, vectors)
}

/// Minimality: the vectors span all of C^rank (numerical rank of the stacked
/// family equals the declared rank).
pub fn is_minimal_rep(rep: &GramRep, tol: f64) -> bool {
    if rep.rank == 0 {
        return true;
    }
    // Gram of the coordinates: Σ_x a(x)a(x)* is rank×rank; full rank ⟺ span.
    let mut s = ComplexMatrix::zeros(rep.rank, rep.rank);
    for v in &rep.vectors {
        for i in 0..rep.rank {
            for j in 0..rep.rank {
                let incr = v[i] * v[j].conj();
                s.set(i, j, s.get(i, j) + incr);
            }
        }
    }
    match herm_eig(&s) {
        Ok(eig) => {
            let top = eig.values.iter().cloned().fold(0.0, f64::max);
            eig.values[0] > tol * f64::max(top, 1.0)
        }
        Err(_) => false,
    }
}

/// Lift a minimal representation of φ|_{Y×Y} to one of φ on all of X, keeping
/// b(y) = a(y) ⊕ 0 for y ∈ Y; the new coordinates come from the pivoted
/// Cholesky factor of the Schur complement of the Y-block.
pub fn lift_representing(
    phi: &Kernel,
    y: &[usize],
    a: &GramRep,
    tol: f64,
) -> Result<GramRep> {
    let n = phi.space.size();
    for &i in y {
        if i >= n {
            return Err(Error::InvalidPointSet(format!(
                "subset index {} out of range for {} points",
                i, n
            )));
        }
    }
    if a.vectors.len() != y.len() {
        return Err(Error::Shape(format!(
            "representation has {} vectors, subset has {} points",
            a.vectors.len(),
            y.len()
        )));
    }
    // φ must be PSD overall.
    let verdict = psd_check(&phi.values, tol)?;
    if !verdict.is_psd {
        return Err(Error::NotPsd {
            min_eigenvalue: verdict.min_eigenvalue,
            witness: verdict.witness.unwrap_or_default(),
        });
    }
    // a must be minimal…
    if !is_minimal_rep(a, tol) {
        return Err(Error::NotMinimalInput {
            relation: vec![],
            relation_norm: 0.0,
        });
    }
    // …and represent the restriction.
    let restricted = phi.restrict(y)?;
    let resid = a.gram().sub(&restricted.values).norm_fro()
        / f64::max(1.0, restricted.values.norm_fro());
    if resid > tol.max(1e-8) {
        return Err(Error::InconsistentRestriction { residual: resid });
    }

    let r_a = a.rank;
    let z: Vec<usize> = (0..n).filter(|i| !y.contains(i)).collect();

    // β(x) solves ⟨a(y), β(x)⟩ = φ(y, x) for all y; with A = [a(y)] as
    // columns this is β(x) = (AA*)⁻¹·A·φ_{Y,x}.
    let aa = ComplexMatrix::from_fn(r_a, r_a, |i, j| {
        a.vectors
            .iter()
            .map(|v| v[i] * v[j].conj())
            .sum::<Complex64>()
    });
    let aa_eig = herm_eig(&aa)?;
    let mut aa_inv = ComplexMatrix::zeros(r_a, r_a);
    for (k, &lam) in aa_eig.values.iter().enumerate() {
        // Minimality makes AA* positive definite.
        let inv = 1.0 / lam;
        for i in 0..r_a {
            for j in 0..r_a {
                let v =
                    aa_inv.get(i, j) + aa_eig.basis.get(i, k) * aa_eig.basis.get(j, k).conj() * inv;
                aa_inv.set(i, j, v);
            }
        }
    }
    let betas: Vec<Vec<Complex64>> = z
        .iter()
        .map(|&x| {
            // rhs = Σ_y a(y)·φ(y, x)
            let mut rhs = vec![Complex64::new(0.0, 0.0); r_a];
            for (yi, &yidx) in y.iter().enumerate() {
                let c = phi.values.get(yidx, x);
                for k in 0..r_a {
                    rhs[k] += a.vectors[yi][k] * c;
                }
            }
            (0..r_a)
                .map(|i| (0..r_a).map(|j| aa_inv.get(i, j) * rhs[j]).sum())
                .collect()
        })
        .collect();

    // Schur complement ψ(x, x′) = φ(x, x′) − ⟨β(x), β(x′)⟩ on Z×Z.
    let m = z.len();
    let psi = ComplexMatrix::from_fn(m, m, |i, j| {
        let ip: Complex64 = betas[i]
            .iter()
            .zip(&betas[j])
            .map(|(u, v)| u.conj() * v)
            .sum();
        phi.values.get(z[i], z[j]) - ip
    });
    // Symmetrize rounding before factoring.
    let psi = psi.add(&psi.adjoint()).scale(Complex64::new(0.5, 0.0));
    let factor = pivoted_cholesky(&psi, tol.max(1e-10))?;
    let s = factor.rank;

    let mut vectors: Vec<Vec<Complex64>> = vec![vec![Complex64::new(0.0, 0.0); r_a + s]; n];
    for (yi, &yidx) in y.iter().enumerate() {
        vectors[yidx][..r_a].copy_from_slice(&a.vectors[yi]);
    }
    for (zi, &zidx) in z.iter().enumerate() {
        vectors[zidx][..r_a].copy_from_slice(&betas[zi]);
        for k in 0..s {
            vectors[zidx][r_a + k] = factor.r.get(k, zi);
        }
    }
    GramRep::new(phi.space.clone(), r_a + s, vectors)
}

/// Level sets X_n = {x : ‖a(x)‖² ≤ t_n} for the given thresholds (sorted,
/// deduplicated); a final level covering all of X is appended when needed.
pub fn exhaustion_search(rep: &GramRep, thresholds: &[f64]) -> Exhaustion {
    let norms = rep.norms_sq();
    let mut ts: Vec<f64> = thresholds.to_vec();
    ts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ts.dedup();
    let all = norms.iter().cloned().fold(0.0, f64::max);
    if ts.last().map(|&t| t < all).unwrap_or(true) {
        ts.push(all);
    }
    let mut subsets = Vec::with_capacity(ts.len());
    let mut block_bounds = Vec::with_capacity(ts.len());
    for &t in &ts {
        let subset: Vec<usize> = (0..norms.len()).filter(|&i| norms[i] <= t).collect();
        let bound = subset.iter().map(|&i| norms[i]).fold(0.0, f64::max);
        subsets.push(subset);
        block_bounds.push(bound);
    }
    Exhaustion {
        subsets,
        block_bounds,
    }
}

/// ‖S_φ‖ = ‖S_φ‖_cb = max_i φ_ii for PSD φ (the norm of a CP Schur map is
/// attained at the diagonal pattern).
pub fn positive_schur_norm(phi: &Kernel, tol: f64) -> Result<f64> {
    let verdict = psd_check(&phi.values, tol)?;
    if !verdict.is_psd {
        return Err(Error::NotPsd {
            min_eigenvalue: verdict.min_eigenvalue,
            witness: verdict.witness.unwrap_or_default(),
        });
    }
    Ok((0..phi.values.rows())
        .map(|i| phi.values.get(i, i).re)
        .fold(0.0, f64::max))
}

fn max_row_norm(a: &ComplexMatrix) -> f64 {
    (0..a.rows())
        .map(|i| {
            (0..a.cols())
                .map(|j| a.get(i, j).norm_sqr())
                .sum::<f64>()
                .sqrt()
        })
        .fold(0.0, f64::max)
}

fn max_col_norm(a: &ComplexMatrix) -> f64 {
    (0..a.cols())
        .map(|j| {
            (0..a.rows())
                .map(|i| a.get(i, j).norm_sqr())
                .sum::<f64>()
                .sqrt()
        })
        .fold(0.0, f64::max)
}

/// Upper bound on ‖S_φ‖_cb: the best of several explicit factorizations
/// φ = A·B scored by (max row norm of A)·(max column norm of B).
///
/// Candidates: the two trivial splits (A or B the identity) and the split
/// through the singular value decomposition; for Hermitian PSD φ the
/// symmetric Cholesky split is included, making the bound equal to
/// `positive_schur_norm` there.
pub fn schur_norm_upper(phi: &Kernel) -> Result<f64> {
    let v = &phi.values;
    let n = v.rows();
    if n == 0 {
        return Ok(0.0);
    }
    let id = ComplexMatrix::identity(n);
    let mut best = f64::min(
        max_row_norm(v) * max_col_norm(&id),
        max_row_norm(&id) * max_col_norm(v),
    );

    // SVD split via the Gram eigendecomposition: φ = U·Σ·V*, factor through
    // Σ^{1/2} on both sides.
    let gram = v.adjoint().mul(v);
    let eig = herm_eig(&gram)?;
    let top = eig.values.iter().cloned().fold(0.0, f64::max);
    let mut right = ComplexMatrix::zeros(n, n); // Σ^{1/2}·V*
    let mut left = ComplexMatrix::zeros(n, n); // U·Σ^{1/2}
    for (k, &lam) in eig.values.iter().enumerate() {
        if lam <= 1e-14 * f64::max(top, 1.0) {
            continue;
        }
        let sigma = lam.max(0.0).sqrt();
        let root = sigma.sqrt();
        // u_k = φ·v_k / σ
        for i in 0..n {
            let mut u = Complex64::new(0.0, 0.0);
            for j in 0..n {
                u += v.get(i, j) * eig.basis.get(j, k);
            }
            left.set(i, k, u / sigma * root);
        }
        for j in 0..n {
            right.set(k, j, eig.basis.get(j, k).conj() * root);
        }
    }
    best = best.min(max_row_norm(&left) * max_col_norm(&right));

    // Symmetric split for PSD values.
    if v.hermitian_defect() <= 1e-10 * f64::max(1.0, v.norm_fro()) {
        if let Ok(verdict) = psd_check(v, 1e-9) {
            if verdict.is_psd {
                if let Some(f) = verdict.factor {
                    best = best.min(max_row_norm(&f.r.adjoint()) * max_col_norm(&f.r));
                }
            }
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mat::{op_norm, rayleigh};
    use crate::sample;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn cauchy_two_nodes() -> Kernel {
        Kernel::from_matrix(ComplexMatrix::from_real_rows(&[
            &[0.5, 1.0 / 3.0],
            &[1.0 / 3.0, 0.25],
        ]))
        .unwrap()
    }

    #[test]
    fn apply_is_entrywise() {
        let phi = Kernel::from_matrix(ComplexMatrix::from_real_rows(&[&[1.0, 2.0], &[2.0, 1.0]]))
            .unwrap();
        let t = ComplexMatrix::from_fn(2, 2, |_, _| c(1.0, 0.0));
        let out = schur_apply(&phi, &t).unwrap();
        assert!(out.sub(&phi.values).norm_fro() < 1e-15);

        // Delta pattern extracts the diagonal.
        let delta = Kernel::from_matrix(ComplexMatrix::identity(2)).unwrap();
        let x = ComplexMatrix::from_real_rows(&[&[1.0, 2.0], &[3.0, 4.0]]);
        let d = schur_apply(&delta, &x).unwrap();
        assert!(d.sub(&ComplexMatrix::diag(&[c(1.0, 0.0), c(4.0, 0.0)])).norm_fro() < 1e-15);
    }

    #[test]
    fn psd_check_examples() {
        let ones = Kernel::from_matrix(ComplexMatrix::from_fn(3, 3, |_, _| c(1.0, 0.0))).unwrap();
        assert!(positive_schur_check(&ones, 1e-9).unwrap().is_psd);

        let bad = Kernel::from_matrix(ComplexMatrix::from_real_rows(&[&[1.0, 2.0], &[2.0, 1.0]]))
            .unwrap();
        let v = positive_schur_check(&bad, 1e-9).unwrap();
        assert!(!v.is_psd);
        let w = v.witness.unwrap();
        // Witness proportional to (1, −1).
        assert!((w[0] + w[1]).norm() < 1e-10);

        assert!(positive_schur_check(&cauchy_two_nodes(), 1e-9).unwrap().is_psd);
    }

    #[test]
    fn representing_vectors_examples() {
        // All-ones: rank 1, a(x) = e₁.
        let ones = Kernel::from_matrix(ComplexMatrix::from_fn(3, 3, |_, _| c(1.0, 0.0))).unwrap();
        let rep = representing_vectors(&ones, 1e-9).unwrap();
        assert_eq!(rep.rank, 1);
        for v in &rep.vectors {
            assert!((v[0] - c(1.0, 0.0)).norm() < 1e-12);
        }

        // Identity: rank n, orthonormal.
        let id = Kernel::from_matrix(ComplexMatrix::identity(3)).unwrap();
        let rep = representing_vectors(&id, 1e-9).unwrap();
        assert_eq!(rep.rank, 3);
        assert!(rep.gram().sub(&id.values).norm_fro() < 1e-12);

        // Cauchy two nodes: pinned values.
        let rep = representing_vectors(&cauchy_two_nodes(), 1e-9).unwrap();
        assert_eq!(rep.rank, 2);
        assert!((rep.vectors[0][0] - c(0.70711, 0.0)).norm() < 1e-4);
        assert!(rep.vectors[0][1].norm() < 1e-12);
        assert!((rep.vectors[1][0] - c(0.47140, 0.0)).norm() < 1e-4);
        assert!((rep.vectors[1][1] - c(0.16667, 0.0)).norm() < 1e-4);
        assert!(is_minimal_rep(&rep, 1e-9));
    }

    #[test]
    fn minimality_detects_padding() {
        let space = WeightedPointSet::uniform(2);
        let all_e1 = GramRep::new(
            space,
            2,
            vec![vec![c(1.0, 0.0), c(0.0, 0.0)], vec![c(1.0, 0.0), c(0.0, 0.0)]],
        )
        .unwrap();
        assert!(!is_minimal_rep(&all_e1, 1e-9));

        let ortho = GramRep::new(
            WeightedPointSet::uniform(2),
            2,
            vec![vec![c(1.0, 0.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(1.0, 0.0)]],
        )
        .unwrap();
        assert!(is_minimal_rep(&ortho, 1e-9));
    }

    #[test]
    fn lift_representing_worked_example() {
        let phi = Kernel::from_matrix(ComplexMatrix::from_real_rows(&[&[1.0, 1.0], &[1.0, 2.0]]))
            .unwrap();
        let a = GramRep::new(
            WeightedPointSet::uniform(1),
            1,
            vec![vec![c(1.0, 0.0)]],
        )
        .unwrap();
        let b = lift_representing(&phi, &[0], &a, 1e-9).unwrap();
        assert_eq!(b.rank, 2);
        assert!((b.vectors[0][0] - c(1.0, 0.0)).norm() < 1e-12);
        assert!(b.vectors[0][1].norm() < 1e-12);
        assert!((b.vectors[1][0] - c(1.0, 0.0)).norm() < 1e-10);
        assert!((b.vectors[1][1] - c(1.0, 0.0)).norm() < 1e-10);
        assert!(b.gram().sub(&phi.values).norm_fro() < 1e-10);
    }

    #[test]
    fn lift_representing_full_subset_is_identity() {
        let mut rng = sample::rng(40);
        let phi = Kernel::from_matrix(sample::psd(&mut rng, 3)).unwrap();
        let a = representing_vectors(&phi, 1e-9).unwrap();
        let b = lift_representing(&phi, &[0, 1, 2], &a, 1e-9).unwrap();
        assert_eq!(b.rank, a.rank);
        for (u, v) in a.vectors.iter().zip(&b.vectors) {
            for (x, y) in u.iter().zip(v) {
                assert!((x - y).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn lift_representing_random_pattern() {
        let mut rng = sample::rng(41);
        for n in 2..=6usize {
            for _ in 0..20 {
                let phi = Kernel::from_matrix(sample::psd(&mut rng, n)).unwrap();
                let half: Vec<usize> = (0..n / 2).collect();
                let sub = phi.restrict(&half).unwrap();
                let a = representing_vectors(&sub, 1e-9).unwrap();
                let b = lift_representing(&phi, &half, &a, 1e-9).unwrap();
                // Restriction identity: exact zero pattern, values within tol.
                for (yi, &y) in half.iter().enumerate() {
                    for k in 0..b.rank {
                        let want = if k < a.rank {
                            a.vectors[yi][k]
                        } else {
                            c(0.0, 0.0)
                        };
                        assert!((b.vectors[y][k] - want).norm() < 1e-9);
                    }
                }
                assert!(
                    b.gram().sub(&phi.values).norm_fro()
                        < 1e-9 * f64::max(1.0, phi.values.norm_fro())
                );
                assert!(is_minimal_rep(&b, 1e-9));
            }
        }
    }

    #[test]
    fn lift_representing_rejects_bad_inputs() {
        let phi = Kernel::from_matrix(ComplexMatrix::from_real_rows(&[&[1.0, 2.0], &[2.0, 1.0]]))
            .unwrap();
        let a = GramRep::new(WeightedPointSet::uniform(1), 1, vec![vec![c(1.0, 0.0)]]).unwrap();
        match lift_representing(&phi, &[0], &a, 1e-9) {
            Err(Error::NotPsd { .. }) => {}
            other => panic!("{:?}", other.map(|_| ())),
        }

        let good = Kernel::from_matrix(ComplexMatrix::from_real_rows(&[&[1.0, 1.0], &[1.0, 2.0]]))
            .unwrap();
        let wrong = GramRep::new(WeightedPointSet::uniform(1), 1, vec![vec![c(3.0, 0.0)]]).unwrap();
        match lift_representing(&good, &[0], &wrong, 1e-9) {
            Err(Error::InconsistentRestriction { .. }) => {}
            other => panic!("{:?}", other.map(|_| ())),
        }

        let padded = GramRep::new(
            WeightedPointSet::uniform(1),
            2,
            vec![vec![c(1.0, 0.0), c(0.0, 0.0)]],
        )
        .unwrap();
        match lift_representing(&good, &[0], &padded, 1e-9) {
            Err(Error::NotMinimalInput { .. }) => {}
            other => panic!("{:?}", other.map(|_| ())),
        }
    }

    #[test]
    fn exhaustion_thresholds() {
        let rep = GramRep::new(
            WeightedPointSet::uniform(3),
            1,
            vec![
                vec![c(0.5f64.sqrt(), 0.0)],
                vec![c(5f64.sqrt(), 0.0)],
                vec![c(50f64.sqrt(), 0.0)],
            ],
        )
        .unwrap();
        let ex = exhaustion_search(&rep, &[1.0, 10.0, 100.0]);
        assert_eq!(
            ex.subsets.iter().map(|s| s.len()).collect::<Vec<_>>(),
            vec![1, 2, 3]
        );
        assert_eq!(ex.subsets.last().unwrap().len(), 3);
        for w in ex.block_bounds.windows(2) {
            assert!(w[0] <= w[1]);
        }

        // Missing coverage appends a final full level.
        let ex2 = exhaustion_search(&rep, &[1.0]);
        assert_eq!(ex2.subsets.last().unwrap().len(), 3);
    }

    #[test]
    fn positive_norm_examples() {
        let ones = Kernel::from_matrix(ComplexMatrix::from_fn(3, 3, |_, _| c(1.0, 0.0))).unwrap();
        assert!((positive_schur_norm(&ones, 1e-9).unwrap() - 1.0).abs() < 1e-12);
        assert!((positive_schur_norm(&cauchy_two_nodes(), 1e-9).unwrap() - 0.5).abs() < 1e-12);
        assert!((schur_norm_upper(&ones).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn norm_upper_rank_one() {
        let u = [c(1.0, 0.0), c(-2.0, 0.0), c(0.5, 0.0)];
        let v = [c(3.0, 0.0), c(1.0, 0.0), c(0.0, 1.0)];
        let phi = Kernel::from_matrix(ComplexMatrix::from_fn(3, 3, |i, j| u[i] * v[j].conj()))
            .unwrap();
        let bound = schur_norm_upper(&phi).unwrap();
        let want = 2.0 * 3.0; // max|u|·max|v|
        assert!((bound - want).abs() < 1e-9, "{}", bound);
        // Never below the largest entry.
        assert!(bound >= phi.values.norm_max() - 1e-12);
    }

    #[test]
    fn norm_brute_force_cross_check() {
        let mut rng = sample::rng(50);
        let phi = Kernel::from_matrix(sample::psd(&mut rng, 2)).unwrap();
        let norm = positive_schur_norm(&phi, 1e-9).unwrap();
        let mut best = 0.0f64;
        for _ in 0..300 {
            let t = sample::matrix(&mut rng, 2, 2);
            let ratio = op_norm(&schur_apply(&phi, &t).unwrap()).unwrap()
                / op_norm(&t).unwrap().max(1e-12);
            best = best.max(ratio);
        }
        assert!(best <= norm + 1e-9);
        // The diagonal pattern attains it.
        let which = if phi.values.get(0, 0).re >= phi.values.get(1, 1).re { 0 } else { 1 };
        let e = ComplexMatrix::unit(2, 2, which, which);
        let attained = op_norm(&schur_apply(&phi, &e).unwrap()).unwrap();
        assert!((attained - norm).abs() < 1e-12);
    }

    #[test]
    fn positivity_equivalence_bruteforce() {
        let mut rng = sample::rng(51);
        for trial in 0..16 {
            let n = 2 + trial % 2;
            let values = if trial % 2 == 0 {
                sample::psd(&mut rng, n)
            } else {
                sample::hermitian_not_psd(&mut rng, n)
            };
            let phi = Kernel::from_matrix(values).unwrap();
            let is_psd = positive_schur_check(&phi, 1e-9).unwrap().is_psd;
            let mut inputs = vec![
                ComplexMatrix::from_fn(n, n, |_, _| c(1.0, 0.0)),
                ComplexMatrix::identity(n),
            ];
            for _ in 0..6 {
                inputs.push(sample::psd(&mut rng, n));
            }
            let all_out_psd = inputs.iter().all(|t| {
                psd_check(&schur_apply(&phi, t).unwrap(), 1e-9)
                    .map(|v| v.is_psd)
                    .unwrap_or(false)
            });
            assert_eq!(is_psd, all_out_psd, "trial {}", trial);
        }
    }

    #[test]
    fn weight_invariance() {
        let mut rng = sample::rng(52);
        let values = sample::psd(&mut rng, 4);
        let uniform = Kernel::from_matrix(values.clone()).unwrap();
        let weighted = Kernel::new(
            WeightedPointSet::new(
                (0..4).map(|i| format!("p{}", i)).collect(),
                vec![0.1, 2.0, 30.0, 0.5],
            )
            .unwrap(),
            values,
        )
        .unwrap();
        let r1 = representing_vectors(&uniform, 1e-9).unwrap();
        let r2 = representing_vectors(&weighted, 1e-9).unwrap();
        assert_eq!(r1.rank, r2.rank);
        for (u, v) in r1.vectors.iter().zip(&r2.vectors) {
            for (x, y) in u.iter().zip(v) {
                assert_eq!(x, y);
            }
        }
        assert_eq!(
            positive_schur_norm(&uniform, 1e-9).unwrap(),
            positive_schur_norm(&weighted, 1e-9).unwrap()
        );
    }

    #[test]
    fn point_set_validation() {
        match WeightedPointSet::new(vec!["a".into(), "a".into()], vec![1.0, 1.0]) {
            Err(Error::InvalidPointSet(_)) => {}
            other => panic!("{:?}", other.map(|_| ())),
        }
        match WeightedPointSet::new(vec!["a".into()], vec![0.0]) {
            Err(Error::InvalidPointSet(_)) => {}
            other => panic!("{:?}", other.map(|_| ())),
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn gram_roundtrip_random_psd(seed in 0u64..10_000, n in 1usize..10) {
            let mut rng = sample::rng(seed);
            let phi = Kernel::from_matrix(sample::psd(&mut rng, n)).unwrap();
            let rep = representing_vectors(&phi, 1e-9).unwrap();
            let resid = rep.gram().sub(&phi.values).norm_fro();
            prop_assert!(resid <= 1e-9 * f64::max(1.0, phi.values.norm_fro()));
            prop_assert!(is_minimal_rep(&rep, 1e-9));
        }

        #[test]
        fn norm_upper_dominates_entries(seed in 0u64..10_000, n in 1usize..6) {
            let mut rng = sample::rng(seed);
            let phi = Kernel::from_matrix(sample::matrix(&mut rng, n, n)).unwrap();
            let bound = schur_norm_upper(&phi).unwrap();
            prop_assert!(bound >= phi.values.norm_max() - 1e-10);
        }
    }
}
