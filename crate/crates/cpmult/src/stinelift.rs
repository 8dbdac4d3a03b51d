//! Constructive lifting of minimal Kraus representations across subspace
//! inclusions, and nested Kraus families over a projection filtration
//! (graded Stinespring data).
//!
//! Every object lives on the ambient space: a map or operator "on pH" is an
//! ambient matrix supported on the corner, so restriction identities are
//! literal matrix equations and no coordinate plumbing is needed.

use crate::alg::VNAlg;
use crate::cpmap::{
    apply_cp, canonicalize_phases, choi, hs_gram, is_strongly_independent, kraus_from_choi,
    superop_from_kraus, KrausFamily, SuperOp,
};
use crate::error::{Error, Result};
use crate::mat::{herm_eig, op_norm, ComplexMatrix};
use num_complex::Complex64;

/// Relative defect of p from being an orthogonal projection.
pub fn projection_defect(p: &ComplexMatrix) -> f64 {
    if !p.is_square() {
        return f64::INFINITY;
    }
    let herm = p.sub(&p.adjoint()).norm_fro();
    let idem = p.mul(p).sub(p).norm_fro();
    f64::max(herm, idem) / f64::max(1.0, p.norm_fro())
}

/// Increasing projections p₁ ≤ … ≤ p_N = I on the ambient space.
#[derive(Clone, Debug)]
pub struct Filtration {
    pub dim: usize,
    pub projections: Vec<ComplexMatrix>,
}

impl Filtration {
    pub fn new(dim: usize, projections: Vec<ComplexMatrix>, tol: f64) -> Result<Self> {
        if projections.is_empty() {
            return Err(Error::InconsistentFiltration {
                level: 0,
                reason: "no projections".into(),
            });
        }
        for (k, p) in projections.iter().enumerate() {
            if p.rows() != dim || p.cols() != dim {
                return Err(Error::InconsistentFiltration {
                    level: k + 1,
                    reason: format!("projection is {}x{}, ambient is {}", p.rows(), p.cols(), dim),
                });
            }
            let d = projection_defect(p);
            if d > tol {
                return Err(Error::InconsistentFiltration {
                    level: k + 1,
                    reason: format!("not an orthogonal projection (defect {:.3e})", d),
                });
            }
        }
        for k in 0..projections.len() - 1 {
            let lo = &projections[k];
            let hi = &projections[k + 1];
            let d = lo.mul(hi).sub(lo).norm_fro();
            if d > tol * f64::max(1.0, lo.norm_fro()) {
                return Err(Error::InconsistentFiltration {
                    level: k + 1,
                    reason: format!("levels {} and {} are not increasing (defect {:.3e})", k + 1, k + 2, d),
                });
            }
        }
        let last = projections.last().unwrap();
        let d = last.sub(&ComplexMatrix::identity(dim)).norm_fro();
        if d > tol * (dim as f64).max(1.0) {
            return Err(Error::InconsistentFiltration {
                level: projections.len(),
                reason: format!("top projection is not the identity (defect {:.3e})", d),
            });
        }
        Ok(Filtration { dim, projections })
    }

    /// Coordinate filtration: p_k projects onto the first cuts[k] coordinates;
    /// the last cut must equal the dimension.
    pub fn coordinate(dim: usize, cuts: &[usize]) -> Result<Self> {
        let projections = cuts
            .iter()
            .map(|&c| {
                ComplexMatrix::from_fn(dim, dim, |i, j| {
                    if i == j && i < c {
                        Complex64::new(1.0, 0.0)
                    } else {
                        Complex64::new(0.0, 0.0)
                    }
                })
            })
            .collect();
        Self::new(dim, projections, 1e-12)
    }

    pub fn levels(&self) -> usize {
        self.projections.len()
    }

    /// Atoms q₁ = p₁, q_k = p_k − p_{k−1}, dropping vanishing steps.
    pub fn atoms(&self) -> Vec<ComplexMatrix> {
        let mut out = Vec::new();
        let mut prev = ComplexMatrix::zeros(self.dim, self.dim);
        for p in &self.projections {
            let q = p.sub(&prev);
            if q.norm_fro() > 1e-10 {
                out.push(q);
            }
            prev = p.clone();
        }
        out
    }

    /// The commutative algebra spanned by the atoms (every p_k lies in it).
    pub fn atom_algebra(&self) -> Result<VNAlg> {
        VNAlg::new(self.dim, self.atoms(), 1e-8)
    }
}

/// CP maps Φₙ supported on the corners pₙ·(·)·pₙ, with the compression
/// consistency compress_cp(Φₙ, p_m) = Φ_m for m ≤ n.
#[derive(Clone, Debug)]
pub struct FilteredCPMap {
    pub filtration: Filtration,
    pub blocks: Vec<SuperOp>,
}

impl FilteredCPMap {
    pub fn new(filtration: Filtration, blocks: Vec<SuperOp>, tol: f64) -> Result<Self> {
        if blocks.len() != filtration.levels() {
            return Err(Error::Shape(format!(
                "{} blocks for {} filtration levels",
                blocks.len(),
                filtration.levels()
            )));
        }
        let n = filtration.dim;
        for (k, b) in blocks.iter().enumerate() {
            if b.in_shape != (n, n) || b.out_shape != (n, n) {
                return Err(Error::Shape(format!(
                    "block {} does not act on ambient {}x{} matrices",
                    k + 1,
                    n,
                    n
                )));
            }
            let supported = compress_cp(b, &filtration.projections[k])?;
            let d = supported.matrix.sub(&b.matrix).norm_fro()
                / f64::max(1.0, b.matrix.norm_fro());
            if d > tol {
                return Err(Error::InconsistentRestriction { residual: d }.at_level(k + 1));
            }
        }
        for k in 0..blocks.len() - 1 {
            let down = compress_cp(&blocks[k + 1], &filtration.projections[k])?;
            let d = down.matrix.sub(&blocks[k].matrix).norm_fro()
                / f64::max(1.0, blocks[k].matrix.norm_fro());
            if d > tol {
                return Err(Error::InconsistentRestriction { residual: d }.at_level(k + 2));
            }
        }
        Ok(FilteredCPMap { filtration, blocks })
    }

    /// Compress one ambient map down every level of the filtration.
    pub fn from_top(filtration: Filtration, top: &SuperOp, tol: f64) -> Result<Self> {
        let blocks: Result<Vec<SuperOp>> = filtration
            .projections
            .iter()
            .map(|p| compress_cp(top, p))
            .collect();
        Self::new(filtration, blocks?, tol)
    }
}

/// Kraus families Vₙ per level, nested so that the first count(V_{n−1}) ops
/// of Vₙ compress onto V_{n−1} and the later ops annihilate the earlier
/// corner. `block_norms[n]` reports ‖Σᵢ Vₙᵢ*·Vₙᵢ‖.
#[derive(Clone, Debug)]
pub struct FilteredKrausFamily {
    pub filtration: Filtration,
    pub levels: Vec<KrausFamily>,
    pub block_norms: Vec<f64>,
}

impl FilteredKrausFamily {
    pub fn new(filtration: Filtration, levels: Vec<KrausFamily>, tol: f64) -> Result<Self> {
        if levels.len() != filtration.levels() {
            return Err(Error::Shape(format!(
                "{} families for {} filtration levels",
                levels.len(),
                filtration.levels()
            )));
        }
        let fam = FilteredKrausFamily {
            block_norms: block_norms(&levels)?,
            filtration,
            levels,
        };
        let resid = fam.nesting_residual();
        if resid > tol {
            return Err(Error::InconsistentRestriction { residual: resid });
        }
        Ok(fam)
    }

    /// Largest defect over all nesting requirements: corner support at every
    /// level, early ops compressing onto the previous level's ops, later ops
    /// annihilating the previous corner, and counts non-decreasing
    /// (a count drop reports as infinite).
    pub fn nesting_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for (k, fam) in self.levels.iter().enumerate() {
            let p = &self.filtration.projections[k];
            for op in &fam.ops {
                worst = worst.max(op.sub(&p.mul(op).mul(p)).norm_fro());
            }
            if k == 0 {
                continue;
            }
            let prev = &self.levels[k - 1];
            if fam.count() < prev.count() {
                return f64::INFINITY;
            }
            let q = &self.filtration.projections[k - 1];
            for (j, op) in fam.ops.iter().enumerate() {
                let down = q.mul(op).mul(q);
                let target = if j < prev.count() {
                    prev.ops[j].clone()
                } else {
                    ComplexMatrix::zeros(fam.dim, fam.dim)
                };
                worst = worst.max(down.sub(&target).norm_fro());
            }
        }
        worst
    }
}

fn block_norms(levels: &[KrausFamily]) -> Result<Vec<f64>> {
    levels
        .iter()
        .map(|fam| {
            let mut s = ComplexMatrix::zeros(fam.dim, fam.dim);
            for op in &fam.ops {
                s = s.add(&op.adjoint().mul(op));
            }
            op_norm(&s)
        })
        .collect()
}

/// Compression of a CP map to a corner: x ↦ p·Φ(p·x·p)·p, as an ambient map
/// supported on the corner.
pub fn compress_cp(phi: &SuperOp, p: &ComplexMatrix) -> Result<SuperOp> {
    if phi.in_shape != phi.out_shape || phi.in_shape.0 != phi.in_shape.1 {
        return Err(Error::Shape(
            "compression expects an endomorphism of square matrices".into(),
        ));
    }
    let n = phi.in_shape.0;
    if p.rows() != n || p.cols() != n {
        return Err(Error::Shape(format!(
            "projection is {}x{}, map acts on {}x{}",
            p.rows(),
            p.cols(),
            n,
            n
        )));
    }
    let d = projection_defect(p);
    if d > 1e-8 {
        return Err(Error::Input(format!(
            "compression needs an orthogonal projection (defect {:.3e})",
            d
        )));
    }
    let q = p.transpose().kron(p);
    SuperOp::square(n, n, q.mul(&phi.matrix).mul(&q))
}

/// Result of lifting a minimal family across a subspace inclusion.
#[derive(Clone, Debug)]
pub struct Lift {
    /// The lifted minimal family W, in the interleaved deterministic order.
    pub family: KrausFamily,
    /// matched[j] = index into `family` of the op whose compression is V[j].
    pub matched: Vec<usize>,
    /// ‖Φ_W − Φ‖_F / max(1, ‖Φ‖_F) over super-operator matrices.
    pub map_residual: f64,
    /// max_j ‖W[matched[j]]·p − V[j]‖_F.
    pub restriction_residual: f64,
    /// Largest commutation defect of a W op against the algebra basis.
    pub commutant_defect: f64,
}

/// Lift a minimal Kraus family of the compression Ψ = compress_cp(Φ, p) to a
/// minimal family of Φ extending it: W[matched[j]]·p = V[j], the remaining
/// ops annihilate pH, and all ops commute with the algebra.
///
/// Preconditions (all checked): Φ completely positive and d2-bimodular, p a
/// projection in d2, V strongly independent, implementing Ψ, with entries
/// commuting with p·d2·p.
pub fn lift_minimal_kraus(
    phi: &SuperOp,
    d2: &VNAlg,
    p: &ComplexMatrix,
    v: &KrausFamily,
    tol: f64,
) -> Result<Lift> {
    if phi.in_shape != phi.out_shape || phi.in_shape.0 != phi.in_shape.1 {
        return Err(Error::Shape(
            "lifting expects an endomorphism of square matrices".into(),
        ));
    }
    let n = phi.in_shape.0;
    if d2.dim != n {
        return Err(Error::Shape(format!(
            "algebra ambient {} does not match map dimension {}",
            d2.dim, n
        )));
    }
    if v.dim != n {
        return Err(Error::Shape(format!(
            "family dimension {} does not match map dimension {} (families live on the ambient space)",
            v.dim, n
        )));
    }

    // p is a projection inside d2.
    let pd = projection_defect(p);
    if pd > tol.max(1e-10) {
        return Err(Error::Input(format!(
            "p is not an orthogonal projection (defect {:.3e})",
            pd
        )));
    }
    let span = d2.span();
    let member = span.membership_defect(p);
    if member > tol {
        return Err(Error::ProjectionNotInAlgebra { defect: member });
    }

    // Φ completely positive: canonical minimal ambient family.
    let a_fam = kraus_from_choi(&choi(phi)?, tol)?;

    // Φ d2-bimodular.
    let bim = crate::cpmap::check_bimodular(phi, &d2.basis, tol)?;
    if !bim.bimodular {
        return Err(Error::NotBimodular { defect: bim.defect });
    }

    // V strongly independent…
    let indep = is_strongly_independent(v, tol)?;
    if !indep.independent {
        return Err(Error::NotMinimalInput {
            relation: indep.relation.unwrap_or_default(),
            relation_norm: indep.smallest_singular,
        });
    }
    // …implements the compression…
    let compressed = compress_cp(phi, p)?;
    let v_map = superop_from_kraus(v);
    let implement = v_map.matrix.sub(&compressed.matrix).norm_fro()
        / f64::max(1.0, compressed.matrix.norm_fro());
    if implement > tol {
        return Err(Error::InconsistentRestriction { residual: implement });
    }
    // …and its entries commute with p·d2·p.
    for (i, op) in v.ops.iter().enumerate() {
        let mut defect = op.sub(&p.mul(op).mul(p)).norm_fro() / f64::max(1.0, op.norm_fro());
        for d in &d2.basis {
            let pdp = p.mul(d).mul(p);
            let comm = op.mul(&pdp).sub(&pdp.mul(op)).norm_fro();
            defect = defect.max(comm / f64::max(1.0, op.norm_fro() * pdp.norm_fro()));
        }
        if defect > tol {
            return Err(Error::MembershipViolation { index: i, defect });
        }
    }

    // Split the compressed coefficient space: retained rows recombine the
    // canonical family into a minimal family M of the compression, kernel
    // rows give the complement ops annihilating pH.
    let alpha = a_fam.count();
    let r_ops: Vec<ComplexMatrix> = a_fam.ops.iter().map(|a| p.mul(a).mul(p)).collect();
    let g_r = hs_gram(&r_ops);
    let eig = herm_eig(&g_r)?;
    let top_r = eig.values.iter().cloned().fold(0.0, f64::max);
    let top_a = a_fam
        .ops
        .iter()
        .map(|a| a.norm_fro().powi(2))
        .fold(0.0, f64::max);
    // Absolute guard (second term) keeps pure-noise spectra in the kernel
    // when the compression vanishes.
    let threshold = tol * top_r.max(0.0) + tol * tol * f64::max(top_a, 1.0);

    let mut kept: Vec<Vec<Complex64>> = Vec::new();
    let mut kernel: Vec<Vec<Complex64>> = Vec::new();
    for (k, &lam) in eig.values.iter().enumerate() {
        if lam > threshold {
            kept.push(eig.vector(k));
        } else {
            kernel.push(eig.vector(k));
        }
    }
    let r_prime = kept.len();
    if r_prime != v.count() {
        return Err(Error::InconsistentRestriction {
            residual: (r_prime as f64 - v.count() as f64).abs(),
        });
    }

    // Minimal family of the compression from the retained rows; its Gram is
    // diagonal with the retained eigenvalues.
    let m_ops: Vec<ComplexMatrix> = kept
        .iter()
        .map(|row| {
            let mut m = ComplexMatrix::zeros(n, n);
            for (k, rk) in r_ops.iter().enumerate() {
                m = m.add(&rk.scale(row[k]));
            }
            m
        })
        .collect();

    // V and M are minimal families of the same map, so V_j = Σ_ℓ (U₀)_{jℓ}M_ℓ
    // for a unitary U₀; solve by Hilbert–Schmidt least squares.
    let cross = ComplexMatrix::from_fn(r_prime, r_prime, |i, j| {
        m_ops[i]
            .data()
            .iter()
            .zip(v.ops[j].data().iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    });
    let mut u0t = ComplexMatrix::zeros(r_prime, r_prime);
    // Gram of M is diag(retained eigenvalues); divide rows of the cross Gram.
    {
        let retained: Vec<f64> = eig
            .values
            .iter()
            .cloned()
            .filter(|&lam| lam > threshold)
            .collect();
        for (i, &lam) in retained.iter().enumerate() {
            for j in 0..r_prime {
                u0t.set(i, j, cross.get(i, j) / lam);
            }
        }
    }
    let u0 = u0t.transpose();
    let unitary_defect = u0
        .mul(&u0.adjoint())
        .sub(&ComplexMatrix::identity(r_prime))
        .norm_fro();
    if unitary_defect > 1e-6 {
        return Err(Error::InconsistentRestriction {
            residual: unitary_defect,
        });
    }

    // Matched ops: B_j = Σ_k (U₀Λ′)_{jk}·a_k, so B_j·p = V_j.
    let mut b_ops: Vec<ComplexMatrix> = Vec::with_capacity(r_prime);
    for j in 0..r_prime {
        let mut b = ComplexMatrix::zeros(n, n);
        for (k, a) in a_fam.ops.iter().enumerate() {
            let mut coeff = Complex64::new(0.0, 0.0);
            for l in 0..r_prime {
                coeff += u0.get(j, l) * kept[l][k];
            }
            b = b.add(&a.scale(coeff));
        }
        b_ops.push(b);
    }

    // Complement ops from kernel rows annihilate pH and stay independent.
    let mut c_ops: Vec<ComplexMatrix> = kernel
        .iter()
        .map(|row| {
            let mut c = ComplexMatrix::zeros(n, n);
            for (k, a) in a_fam.ops.iter().enumerate() {
                c = c.add(&a.scale(row[k]));
            }
            c
        })
        .collect();
    canonicalize_phases(&mut c_ops);

    // Deterministic interleaving b₁, c₁, b₂, c₂, …, dropping exhausted runs.
    let mut ops: Vec<ComplexMatrix> = Vec::with_capacity(alpha);
    let mut matched = vec![0usize; r_prime];
    for t in 0..r_prime.max(c_ops.len()) {
        if t < r_prime {
            matched[t] = ops.len();
            ops.push(b_ops[t].clone());
        }
        if t < c_ops.len() {
            ops.push(c_ops[t].clone());
        }
    }
    let family = KrausFamily { dim: n, ops };

    let w_map = superop_from_kraus(&family);
    let map_residual =
        w_map.matrix.sub(&phi.matrix).norm_fro() / f64::max(1.0, phi.matrix.norm_fro());
    let mut restriction_residual = 0.0f64;
    for (j, &wi) in matched.iter().enumerate() {
        restriction_residual =
            restriction_residual.max(family.ops[wi].mul(p).sub(&v.ops[j]).norm_fro());
    }
    let mut commutant_defect = 0.0f64;
    for op in &family.ops {
        commutant_defect = commutant_defect.max(d2.commutation_defect(op));
    }

    Ok(Lift {
        family,
        matched,
        map_residual,
        restriction_residual,
        commutant_defect,
    })
}

/// Reorder a lift so the matched ops come first in V-order, followed by the
/// complement ops; positional nesting for `FilteredKrausFamily`.
fn matched_first(lift: &Lift) -> KrausFamily {
    let mut ops = Vec::with_capacity(lift.family.count());
    for &mi in &lift.matched {
        ops.push(lift.family.ops[mi].clone());
    }
    for (i, op) in lift.family.ops.iter().enumerate() {
        if !lift.matched.contains(&i) {
            ops.push(op.clone());
        }
    }
    KrausFamily {
        dim: lift.family.dim,
        ops,
    }
}

/// Nested minimal Kraus families along the filtration, lifting level by
/// level; bimodularity is taken over the filtration's atom algebra.
pub fn nested_kraus(f: &FilteredCPMap, tol: f64) -> Result<FilteredKrausFamily> {
    let atoms = f.filtration.atom_algebra()?;
    nested_kraus_over(f, &atoms, tol)
}

/// Nested families with bimodularity over a caller-supplied algebra; every
/// filtration projection must lie in it.
pub fn nested_kraus_over(f: &FilteredCPMap, d: &VNAlg, tol: f64) -> Result<FilteredKrausFamily> {
    let first = kraus_from_choi(&choi(&f.blocks[0])?, tol).map_err(|e| e.at_level(1))?;
    let mut levels = vec![first];
    for k in 1..f.blocks.len() {
        let p_prev = &f.filtration.projections[k - 1];
        let lift = lift_minimal_kraus(&f.blocks[k], d, p_prev, &levels[k - 1], tol)
            .map_err(|e| e.at_level(k + 1))?;
        levels.push(matched_first(&lift));
    }
    FilteredKrausFamily::new(f.filtration.clone(), levels, tol.max(1e-8))
}

/// Graded Stinespring data: the dilation multiplicity together with the
/// nested families and the pairing-identity residual at the top level.
#[derive(Clone, Debug)]
pub struct GradedStinespring {
    pub multiplicity: usize,
    pub family: FilteredKrausFamily,
    pub pairing_residual: f64,
}

/// Dilate a filtered CP map: multiplicity = top-level Kraus count, and the
/// pairing (Φ(a)ξ, η) = Σᵢ (a·Vᵢξ, Vᵢη) is verified over matrix units and
/// standard basis vectors.
pub fn graded_stinespring(f: &FilteredCPMap, tol: f64) -> Result<GradedStinespring> {
    let family = nested_kraus(f, tol)?;
    let multiplicity = family.levels.iter().map(|v| v.count()).max().unwrap_or(0);
    let top_fam = family.levels.last().expect("validated nonempty");
    let top_map = f.blocks.last().expect("validated nonempty");
    let n = f.filtration.dim;
    let mut pairing_residual = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let a = ComplexMatrix::unit(n, n, i, j);
            let lhs = top_map.apply(&a)?;
            let rhs = apply_cp(top_fam, &a)?;
            pairing_residual = pairing_residual.max(lhs.sub(&rhs).norm_max());
        }
    }
    Ok(GradedStinespring {
        multiplicity,
        family,
        pairing_residual,
    })
}
