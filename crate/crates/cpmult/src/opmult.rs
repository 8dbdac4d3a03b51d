//! Operator multipliers over finite-dimensional von Neumann algebras: the
//! θ-identification between H^⸸⊗K and matrices, multipliers as tensors over
//! M^o⊗N, operator-sum symbols with Haagerup-type bounds, the completely
//! positive cone with its Kraus certificates, covering families, and
//! filtered ("local") multipliers.
//!
//! The opposite algebra M^o is represented by transposition in the ambient
//! basis (a^⸸ ↦ aᵗ), so M^o⊗N is a concrete subspace of (mn)×(mn) matrices
//! and membership is a Frobenius projection distance.

use num_complex::Complex64;

pub use crate::alg::{commutant, Span, VNAlg};
use crate::cpmap::{
    bimodular_defect_pair, choi, kraus_from_choi, KrausFamily, SuperOp,
};
use crate::error::{Error, Result};
use crate::mat::{op_norm, ComplexMatrix};
use crate::stinelift::{
    nested_kraus_over, projection_defect, FilteredCPMap, FilteredKrausFamily, Filtration,
};

/// θ: H^⸸⊗K → matrices, θ(x^⸸⊗y) = y·x*. With composite coordinates
/// ξ_{i·n+j} (H-index slow) this is column-unstacking: θ(ξ)[j][i] = ξ_{i·n+j},
/// an n×m matrix.
pub fn theta(xi: &[Complex64], dim_h: usize, dim_k: usize) -> Result<ComplexMatrix> {
    if xi.len() != dim_h * dim_k {
        return Err(Error::Shape(format!(
            "vector length {} but dim_h·dim_k = {}",
            xi.len(),
            dim_h * dim_k
        )));
    }
    Ok(ComplexMatrix::from_vec_col(xi, dim_k, dim_h))
}

/// Exact inverse of θ: column-stacking of an n×m matrix.
pub fn theta_inv(t: &ComplexMatrix) -> Vec<Complex64> {
    t.vec_col()
}

/// Multiplier candidate on H^⸸⊗K coordinates: an (mn)×(mn) matrix together
/// with its recorded membership defect against M^o⊗N.
#[derive(Clone, Debug)]
pub struct TensorMultiplier {
    pub dim_h: usize,
    pub dim_k: usize,
    pub matrix: ComplexMatrix,
    /// Frobenius distance (relative) from `matrix` to span{aᵗ⊗b}.
    pub membership_defect: f64,
}

/// Span of {aᵗ⊗b : a ∈ basis(M), b ∈ basis(N)} inside (mn)×(mn) matrices.
fn pair_span(m_alg: &VNAlg, n_alg: &VNAlg) -> Result<Span> {
    let mut gens = Vec::with_capacity(m_alg.basis.len() * n_alg.basis.len());
    for a in &m_alg.basis {
        let at = a.transpose();
        for b in &n_alg.basis {
            gens.push(at.kron(b));
        }
    }
    let mn = m_alg.dim * n_alg.dim;
    Span::new((mn, mn), &gens)
}

impl TensorMultiplier {
    /// Accept `matrix` as an (M, N)-multiplier: records the membership
    /// defect against M^o⊗N and rejects when it exceeds tol.
    pub fn accept(
        matrix: ComplexMatrix,
        m_alg: &VNAlg,
        n_alg: &VNAlg,
        tol: f64,
    ) -> Result<Self> {
        let (m, n) = (m_alg.dim, n_alg.dim);
        if matrix.rows() != m * n || matrix.cols() != m * n {
            return Err(Error::Shape(format!(
                "multiplier matrix is {}x{}, expected {}x{}",
                matrix.rows(),
                matrix.cols(),
                m * n,
                m * n
            )));
        }
        let span = pair_span(m_alg, n_alg)?;
        let defect = span.membership_defect(&matrix);
        if defect > tol {
            return Err(Error::NotMultiplier { defect });
        }
        Ok(TensorMultiplier {
            dim_h: m,
            dim_k: n,
            matrix,
            membership_defect: defect,
        })
    }

    /// Elementary tensor aᵗ⊗b (a on H, b on K); in span by construction.
    pub fn elementary(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<Self> {
        if !a.is_square() || !b.is_square() {
            return Err(Error::Shape("elementary factors must be square".into()));
        }
        Ok(TensorMultiplier {
            dim_h: a.rows(),
            dim_k: b.rows(),
            matrix: a.transpose().kron(b),
            membership_defect: 0.0,
        })
    }
}

/// The multiplication map S_φ: T ↦ θ(φ·θ⁻¹(T)) on n×m matrices. Because θ is
/// column-stacking, the super-operator matrix is φ itself; in particular
/// S_{aᵗ⊗b}(T) = b·T·a.
pub fn s_phi(phi: &TensorMultiplier, tol: f64) -> Result<SuperOp> {
    if phi.membership_defect > tol {
        return Err(Error::NotMultiplier {
            defect: phi.membership_defect,
        });
    }
    SuperOp::new(
        (phi.dim_k, phi.dim_h),
        (phi.dim_k, phi.dim_h),
        phi.matrix.clone(),
    )
}

/// Operator-sum symbol: S_φ(x) = Σ_i b_i·x·a_i with a_i ∈ M, b_i ∈ N, and
/// the Haagerup-type bound ‖Σ a_ia_i*‖^{1/2}·‖Σ b_ib_i*‖^{1/2} of the found
/// decomposition (an upper estimate, tight for CP multipliers).
#[derive(Clone, Debug)]
pub struct MultiplierSymbol {
    pub a_ops: Vec<ComplexMatrix>,
    pub b_ops: Vec<ComplexMatrix>,
    pub ph_bound: f64,
}

impl MultiplierSymbol {
    pub fn count(&self) -> usize {
        self.a_ops.len()
    }

    /// Σ_i b_i·x·a_i.
    pub fn apply(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        if self.a_ops.is_empty() {
            return Err(Error::Input("empty symbol".into()));
        }
        let (nk, nh) = (self.b_ops[0].rows(), self.a_ops[0].rows());
        if x.rows() != nk || x.cols() != nh {
            return Err(Error::Shape(format!(
                "symbol expects {}x{} inputs, got {}x{}",
                nk,
                nh,
                x.rows(),
                x.cols()
            )));
        }
        let mut out = ComplexMatrix::zeros(nk, nh);
        for (a, b) in self.a_ops.iter().zip(&self.b_ops) {
            out = out.add(&b.mul(x).mul(a));
        }
        Ok(out)
    }
}

/// ‖Σ c_i c_i†‖_op^{1/2} over a family.
fn row_bound(ops: &[ComplexMatrix]) -> Result<f64> {
    if ops.is_empty() {
        return Ok(0.0);
    }
    let n = ops[0].rows();
    let mut s = ComplexMatrix::zeros(n, n);
    for c in ops {
        s = s.add(&c.mul(&c.adjoint()));
    }
    Ok(op_norm(&s)?.max(0.0).sqrt())
}

/// Haagerup-type bound of a family pair.
pub fn ph_bound_of(a_ops: &[ComplexMatrix], b_ops: &[ComplexMatrix]) -> Result<f64> {
    Ok(row_bound(a_ops)? * row_bound(b_ops)?)
}

/// Operator-sum decomposition of an accepted multiplier by realignment +
/// singular value decomposition, with memberships a_i ∈ M, b_i ∈ N asserted.
pub fn symbol(
    phi: &TensorMultiplier,
    m_alg: &VNAlg,
    n_alg: &VNAlg,
    tol: f64,
) -> Result<MultiplierSymbol> {
    if phi.membership_defect > tol {
        return Err(Error::NotMultiplier {
            defect: phi.membership_defect,
        });
    }
    let (m, n) = (phi.dim_h, phi.dim_k);
    if m_alg.dim != m || n_alg.dim != n {
        return Err(Error::Shape(format!(
            "algebras act on ({}, {}), multiplier on ({}, {})",
            m_alg.dim, n_alg.dim, m, n
        )));
    }
    // Realignment: R[(i·m+i′),(j·n+j′)] = φ[(i·n+j),(i′·n+j′)], so that
    // φ = Σ_k a_kᵗ⊗b_k ⟺ R = Σ_k vec_row(a_kᵗ)·vec_row(b_k)ᵀ.
    let r = ComplexMatrix::from_fn(m * m, n * n, |p, q| {
        let (i, ip) = (p / m, p % m);
        let (j, jp) = (q / n, q % n);
        phi.matrix.get(i * n + j, ip * n + jp)
    });
    // SVD through the Gram matrix R†R: for every eigenpair (λ, v) the term
    // (Rv)·(conj v)ᵀ is an exact slice of R, and summing over a full
    // eigenbasis reproduces R to roundoff. Terms with ‖Rv‖ at noise level
    // are dropped; each costs at most its norm in reconstruction error.
    let gram = r.adjoint().mul(&r);
    let eig = crate::mat::herm_eig(&gram)?;
    let scale = f64::max(1.0, r.norm_fro());
    let drop = 1e-11 * scale;
    let mut a_ops = Vec::new();
    let mut b_ops = Vec::new();
    for k in 0..gram.rows() {
        let v = eig.vector(k);
        let mut rv = vec![Complex64::new(0.0, 0.0); m * m];
        for (p, slot) in rv.iter_mut().enumerate() {
            *slot = (0..n * n).map(|q| r.get(p, q) * v[q]).sum();
        }
        let norm = rv.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm <= drop {
            continue;
        }
        // Balance the two factors: ‖x‖ = ‖y‖ = √‖Rv‖.
        let root = norm.sqrt();
        // a_kᵗ from the row-major m²-vector x = Rv/√‖Rv‖.
        let at = ComplexMatrix::from_fn(m, m, |i, ip| rv[i * m + ip] / root);
        let b = ComplexMatrix::from_fn(n, n, |j, jp| v[j * n + jp].conj() * root);
        a_ops.push(at.transpose());
        b_ops.push(b);
    }
    for (index, a) in a_ops.iter().enumerate() {
        let defect = m_alg.membership_defect(a);
        if defect > tol {
            return Err(Error::MembershipViolation { index, defect });
        }
    }
    for (index, b) in b_ops.iter().enumerate() {
        let defect = n_alg.membership_defect(b);
        if defect > tol {
            return Err(Error::MembershipViolation { index, defect });
        }
    }
    let ph_bound = ph_bound_of(&a_ops, &b_ops)?;
    Ok(MultiplierSymbol {
        a_ops,
        b_ops,
        ph_bound,
    })
}

/// Cone element Σ_k b_kᵗ⊗b_k* for b_k ∈ M; the induced S_φ(x) = Σ b_k*·x·b_k
/// is completely positive by construction.
pub fn cone_element(b_list: &[ComplexMatrix], m_alg: &VNAlg, tol: f64) -> Result<TensorMultiplier> {
    if b_list.is_empty() {
        return Err(Error::Input("empty generator list".into()));
    }
    let m = m_alg.dim;
    for (index, b) in b_list.iter().enumerate() {
        if b.rows() != m || b.cols() != m {
            return Err(Error::Shape(format!(
                "generator {} is {}x{}, algebra dimension {}",
                index,
                b.rows(),
                b.cols(),
                m
            )));
        }
        let defect = m_alg.membership_defect(b);
        if defect > tol {
            return Err(Error::MembershipViolation { index, defect });
        }
    }
    let mut matrix = ComplexMatrix::zeros(m * m, m * m);
    for b in b_list {
        matrix = matrix.add(&b.transpose().kron(&b.adjoint()));
    }
    TensorMultiplier::accept(matrix, m_alg, m_alg, tol.max(1e-9))
}

/// Verdict of the completely-positive-multiplier test.
#[derive(Clone, Debug)]
pub struct CpMultiplierReport {
    /// True ⟺ Choi of S_φ is PSD and its minimal Kraus family lies in M.
    pub completely_positive: bool,
    pub choi_min_eigenvalue: f64,
    /// Minimal Kraus family b_k with φ = Σ b_kᵗ⊗b_k* (when CP).
    pub kraus: Option<KrausFamily>,
    /// Largest membership defect of a Kraus op against M.
    pub membership_defect: f64,
    /// ‖φ − Σ b_kᵗ⊗b_k*‖_F / max(1, ‖φ‖_F) (when CP).
    pub reconstruction_residual: f64,
}

/// Membership of φ in the cone P(M): Choi positivity of S_φ plus membership
/// of the minimal Kraus family in M, with the cone reconstruction residual.
pub fn cp_multiplier_check(
    phi: &TensorMultiplier,
    m_alg: &VNAlg,
    tol: f64,
) -> Result<CpMultiplierReport> {
    if phi.membership_defect > tol {
        return Err(Error::NotMultiplier {
            defect: phi.membership_defect,
        });
    }
    if phi.dim_h != phi.dim_k || phi.dim_h != m_alg.dim {
        return Err(Error::Shape(format!(
            "cone test needs a square multiplier over M: dims ({}, {}) vs algebra {}",
            phi.dim_h, phi.dim_k, m_alg.dim
        )));
    }
    let map = s_phi(phi, tol)?;
    let c = choi(&map)?;
    let family = match kraus_from_choi(&c, crate::mat::TOL_PSD) {
        Ok(f) => f,
        Err(Error::NotCompletelyPositive {
            min_eigenvalue, ..
        }) => {
            return Ok(CpMultiplierReport {
                completely_positive: false,
                choi_min_eigenvalue: min_eigenvalue,
                kraus: None,
                membership_defect: 0.0,
                reconstruction_residual: f64::INFINITY,
            })
        }
        Err(e) => return Err(e),
    };
    let membership_defect = family
        .ops
        .iter()
        .map(|b| m_alg.membership_defect(b))
        .fold(0.0, f64::max);
    let m = phi.dim_h;
    let mut rec = ComplexMatrix::zeros(m * m, m * m);
    for b in &family.ops {
        rec = rec.add(&b.transpose().kron(&b.adjoint()));
    }
    let reconstruction_residual =
        rec.sub(&phi.matrix).norm_fro() / f64::max(1.0, phi.matrix.norm_fro());
    let eig = crate::mat::herm_eig(&c.matrix)?;
    Ok(CpMultiplierReport {
        completely_positive: membership_defect <= tol
            && reconstruction_residual <= crate::mat::TOL_RECON.max(tol),
        choi_min_eigenvalue: eig.values[0],
        kraus: Some(family),
        membership_defect,
        reconstruction_residual,
    })
}

/// Covering family (p_n, q_n) of commuting projections with ∨ p_n⊗q_n = I.
#[derive(Clone, Debug)]
pub struct CoveringFamily {
    pub pairs: Vec<(ComplexMatrix, ComplexMatrix)>,
}

impl CoveringFamily {
    pub fn new(pairs: Vec<(ComplexMatrix, ComplexMatrix)>, tol: f64) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::Input("empty covering family".into()));
        }
        let tol = tol.max(1e-10);
        for (k, (p, q)) in pairs.iter().enumerate() {
            if projection_defect(p) > tol || projection_defect(q) > tol {
                return Err(Error::Input(format!("pair {} is not a projection pair", k)));
            }
        }
        check_commuting(&pairs.iter().map(|(p, _)| p.clone()).collect::<Vec<_>>(), tol)?;
        check_commuting(&pairs.iter().map(|(_, q)| q.clone()).collect::<Vec<_>>(), tol)?;
        // Join via the joint spectral decomposition of the commuting family:
        // ∨ P_n = I ⟺ Π (I − P_n) = 0.
        let (m, n) = (pairs[0].0.rows(), pairs[0].1.rows());
        let id = ComplexMatrix::identity(m * n);
        let mut residue = id.clone();
        for (p, q) in &pairs {
            if p.rows() != m || q.rows() != n {
                return Err(Error::Shape("covering pairs of mixed dimensions".into()));
            }
            residue = residue.mul(&id.sub(&p.transpose().kron(q)));
        }
        let defect = residue.norm_fro();
        if defect > tol * (m * n) as f64 {
            return Err(Error::Input(format!(
                "covering join differs from identity (residue norm {:.3e})",
                defect
            )));
        }
        Ok(CoveringFamily { pairs })
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Nesting defect max_k ‖p_k·p_{k+1} − p_k‖ (and the q side).
    pub fn nesting_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for w in self.pairs.windows(2) {
            let (lo_p, lo_q) = &w[0];
            let (hi_p, hi_q) = &w[1];
            worst = worst.max(lo_p.mul(hi_p).sub(lo_p).norm_fro());
            worst = worst.max(lo_q.mul(hi_q).sub(lo_q).norm_fro());
        }
        worst
    }
}

fn check_commuting(ps: &[ComplexMatrix], tol: f64) -> Result<()> {
    for i in 0..ps.len() {
        for j in (i + 1)..ps.len() {
            let norm = ps[i].mul(&ps[j]).sub(&ps[j].mul(&ps[i])).norm_fro();
            if norm > tol {
                return Err(Error::NotCommuting { i, j, norm });
            }
        }
    }
    Ok(())
}

/// Atoms of the abelian algebra generated by commuting projections: binary
/// splitting by each p and its complement; the result is a family of
/// orthogonal projections summing to I, with each p a subsum.
fn atoms_of(ps: &[ComplexMatrix], tol: f64) -> Result<Vec<ComplexMatrix>> {
    if ps.is_empty() {
        return Err(Error::Input("no projections".into()));
    }
    check_commuting(ps, tol.max(1e-10))?;
    let n = ps[0].rows();
    let id = ComplexMatrix::identity(n);
    let mut atoms = vec![id.clone()];
    for p in ps {
        let mut next = Vec::new();
        for a in &atoms {
            let inside = a.mul(p);
            let outside = a.mul(&id.sub(p));
            if inside.norm_fro() > 1e-9 * (n as f64) {
                next.push(inside);
            }
            if outside.norm_fro() > 1e-9 * (n as f64) {
                next.push(outside);
            }
        }
        atoms = next;
    }
    Ok(atoms)
}

/// Refine a covering family into the orthogonal atom families (e_i), (f_j)
/// of the abelian algebras generated by (p_n) and (q_n).
pub fn refine_covering(
    c: &CoveringFamily,
    tol: f64,
) -> Result<(Vec<ComplexMatrix>, Vec<ComplexMatrix>)> {
    let ps: Vec<ComplexMatrix> = c.pairs.iter().map(|(p, _)| p.clone()).collect();
    let qs: Vec<ComplexMatrix> = c.pairs.iter().map(|(_, q)| q.clone()).collect();
    Ok((atoms_of(&ps, tol)?, atoms_of(&qs, tol)?))
}

/// Symbol assembled from blockwise symbols, with per-atom column/row norms.
#[derive(Clone, Debug)]
pub struct AssembledSymbol {
    pub symbol: MultiplierSymbol,
    /// Per e-atom ‖Σ_k (a_k e_i)(a_k e_i)*‖^{1/2}.
    pub column_norms: Vec<f64>,
    /// Per f-atom ‖Σ_k (f_j b_k)(f_j b_k)*‖^{1/2}.
    pub row_norms: Vec<f64>,
}

fn check_atom_family(atoms: &[ComplexMatrix], tol: f64) -> Result<()> {
    if atoms.is_empty() {
        return Err(Error::InconsistentAtoms("empty atom family".into()));
    }
    let n = atoms[0].rows();
    let mut sum = ComplexMatrix::zeros(n, n);
    for (k, a) in atoms.iter().enumerate() {
        if a.rows() != n || a.cols() != n {
            return Err(Error::InconsistentAtoms(format!(
                "atom {} has mismatched shape",
                k
            )));
        }
        if projection_defect(a) > tol {
            return Err(Error::InconsistentAtoms(format!(
                "atom {} is not a projection",
                k
            )));
        }
        sum = sum.add(a);
    }
    for i in 0..atoms.len() {
        for j in (i + 1)..atoms.len() {
            let d = atoms[i].mul(&atoms[j]).norm_fro();
            if d > tol * (n as f64) {
                return Err(Error::InconsistentAtoms(format!(
                    "atoms {} and {} are not orthogonal (overlap {:.3e})",
                    i, j, d
                )));
            }
        }
    }
    if sum.sub(&ComplexMatrix::identity(n)).norm_fro() > tol * (n as f64) {
        return Err(Error::InconsistentAtoms(
            "atoms do not sum to the identity".into(),
        ));
    }
    Ok(())
}

/// Assemble blockwise symbols (blocks[i][j] acting as x ↦ f_j·S_ij(x)·e_i)
/// into one symbol implementing the direct sum: plain concatenation of the
/// families padded by the atom projections, finite-family analogue of the
/// weighted scheme needed for infinite sums.
pub fn assemble_block_symbols(
    blocks: &[Vec<MultiplierSymbol>],
    e_atoms: &[ComplexMatrix],
    f_atoms: &[ComplexMatrix],
    tol: f64,
) -> Result<AssembledSymbol> {
    let tol = tol.max(1e-10);
    check_atom_family(e_atoms, tol)?;
    check_atom_family(f_atoms, tol)?;
    if blocks.len() != e_atoms.len() || blocks.iter().any(|row| row.len() != f_atoms.len()) {
        return Err(Error::InconsistentAtoms(format!(
            "block grid is {}x{:?}, atoms are {}x{}",
            blocks.len(),
            blocks.first().map(|r| r.len()),
            e_atoms.len(),
            f_atoms.len()
        )));
    }
    let mut a_ops = Vec::new();
    let mut b_ops = Vec::new();
    for (i, row) in blocks.iter().enumerate() {
        for (j, sym) in row.iter().enumerate() {
            if sym.a_ops.len() != sym.b_ops.len() {
                return Err(Error::InconsistentAtoms(format!(
                    "block ({}, {}) has mismatched families",
                    i, j
                )));
            }
            for (a, b) in sym.a_ops.iter().zip(&sym.b_ops) {
                a_ops.push(a.mul(&e_atoms[i]));
                b_ops.push(f_atoms[j].mul(b));
            }
        }
    }
    let column_norms = e_atoms
        .iter()
        .map(|e| row_bound(&a_ops.iter().map(|a| a.mul(e)).collect::<Vec<_>>()))
        .collect::<Result<Vec<f64>>>()?;
    let row_norms = f_atoms
        .iter()
        .map(|f| row_bound(&b_ops.iter().map(|b| f.mul(b)).collect::<Vec<_>>()))
        .collect::<Result<Vec<f64>>>()?;
    let ph_bound = ph_bound_of(&a_ops, &b_ops)?;
    Ok(AssembledSymbol {
        symbol: MultiplierSymbol {
            a_ops,
            b_ops,
            ph_bound,
        },
        column_norms,
        row_norms,
    })
}

/// Filtered multiplier: an increasing covering with one compressed block per
/// level, consecutive blocks compression-consistent.
#[derive(Clone, Debug)]
pub struct FilteredMultiplier {
    pub covering: CoveringFamily,
    pub blocks: Vec<TensorMultiplier>,
}

impl FilteredMultiplier {
    pub fn new(covering: CoveringFamily, blocks: Vec<TensorMultiplier>, tol: f64) -> Result<Self> {
        let tol = tol.max(1e-9);
        if blocks.len() != covering.len() {
            return Err(Error::Shape(format!(
                "{} blocks for {} covering pairs",
                blocks.len(),
                covering.len()
            )));
        }
        let nest = covering.nesting_defect();
        if nest > tol {
            return Err(Error::InconsistentFiltration {
                level: 0,
                reason: format!("covering pairs are not nested (defect {:.3e})", nest),
            });
        }
        let (m, n) = (covering.pairs[0].0.rows(), covering.pairs[0].1.rows());
        for (k, block) in blocks.iter().enumerate() {
            if block.dim_h != m || block.dim_k != n {
                return Err(Error::InconsistentFiltration {
                    level: k + 1,
                    reason: "block dimensions differ from the covering".into(),
                });
            }
            let (p, q) = &covering.pairs[k];
            let c = p.transpose().kron(q);
            let compressed = c.mul(&block.matrix).mul(&c);
            let support = compressed.sub(&block.matrix).norm_fro()
                / f64::max(1.0, block.matrix.norm_fro());
            if support > tol {
                return Err(Error::InconsistentFiltration {
                    level: k + 1,
                    reason: format!("block not supported on its corner (defect {:.3e})", support),
                });
            }
            if k + 1 < blocks.len() {
                let from_next = c.mul(&blocks[k + 1].matrix).mul(&c);
                let mismatch = from_next.sub(&block.matrix).norm_fro()
                    / f64::max(1.0, block.matrix.norm_fro());
                if mismatch > tol {
                    return Err(Error::InconsistentFiltration {
                        level: k + 2,
                        reason: format!(
                            "compression of level {} disagrees with level {} (defect {:.3e})",
                            k + 2,
                            k + 1,
                            mismatch
                        ),
                    });
                }
            }
        }
        Ok(FilteredMultiplier { covering, blocks })
    }

    /// Build the blocks by compressing a top-level multiplier to every pair.
    pub fn from_top(
        covering: CoveringFamily,
        top: &TensorMultiplier,
        tol: f64,
    ) -> Result<Self> {
        let blocks = covering
            .pairs
            .iter()
            .map(|(p, q)| {
                let c = p.transpose().kron(q);
                TensorMultiplier {
                    dim_h: top.dim_h,
                    dim_k: top.dim_k,
                    matrix: c.mul(&top.matrix).mul(&c),
                    membership_defect: top.membership_defect,
                }
            })
            .collect();
        Self::new(covering, blocks, tol)
    }

    pub fn levels(&self) -> usize {
        self.blocks.len()
    }
}

/// Per-level result of the filtered multiplier analysis.
#[derive(Clone, Debug)]
pub struct LevelReport {
    /// Defect of the block against span{(a·p)ᵗ⊗(b·q)}.
    pub membership_defect: f64,
    pub symbol: MultiplierSymbol,
    pub ph_bound: f64,
}

/// Filtered multiplier report with a growth classification.
#[derive(Clone, Debug)]
pub struct FilteredReport {
    pub levels: Vec<LevelReport>,
    /// "uniformly bounded" when every level's ph_bound is within 10% of the
    /// top level's; otherwise "strictly local growth".
    pub classification: String,
    /// True when every covering projection is central (in the algebra and
    /// its commutant).
    pub central: bool,
}

/// Corner algebra M·p for p ∈ M′ (basis {a_i·p}, unital on the corner but
/// represented ambiently; not unital as an ambient algebra unless p = I).
fn corner_span(alg: &VNAlg, p: &ComplexMatrix) -> Result<Span> {
    let gens: Vec<ComplexMatrix> = alg.basis.iter().map(|a| a.mul(p)).collect();
    Span::new((alg.dim, alg.dim), &gens)
}

/// Per-level membership, symbol, and ph_bound for a filtered multiplier over
/// (M, N), plus the growth classification and the centrality flag.
pub fn filtered_multiplier_check(
    fm: &FilteredMultiplier,
    m_alg: &VNAlg,
    n_alg: &VNAlg,
    tol: f64,
) -> Result<FilteredReport> {
    let mut central = true;
    for (k, (p, q)) in fm.covering.pairs.iter().enumerate() {
        if m_alg.commutation_defect(p) > tol.max(1e-8) {
            return Err(Error::InconsistentFiltration {
                level: k + 1,
                reason: "covering projection does not commute with M".into(),
            });
        }
        if n_alg.commutation_defect(q) > tol.max(1e-8) {
            return Err(Error::InconsistentFiltration {
                level: k + 1,
                reason: "covering projection does not commute with N".into(),
            });
        }
        central = central
            && m_alg.membership_defect(p) <= tol.max(1e-8)
            && n_alg.membership_defect(q) <= tol.max(1e-8);
    }
    let mut levels = Vec::with_capacity(fm.levels());
    for (k, block) in fm.blocks.iter().enumerate() {
        let (p, q) = &fm.covering.pairs[k];
        let a_span = corner_span(m_alg, p).map_err(|e| e.at_level(k + 1))?;
        let b_span = corner_span(n_alg, q).map_err(|e| e.at_level(k + 1))?;
        // Membership against span{(ap)ᵗ⊗(bq)}.
        let mut gens = Vec::with_capacity(a_span.dim() * b_span.dim());
        for a in a_span.basis_matrices() {
            let at = a.transpose();
            for b in b_span.basis_matrices() {
                gens.push(at.kron(&b));
            }
        }
        let mn = m_alg.dim * n_alg.dim;
        let tensor_span = Span::new((mn, mn), &gens).map_err(|e| e.at_level(k + 1))?;
        let membership_defect = tensor_span.membership_defect(&block.matrix);
        if membership_defect > tol.max(1e-8) {
            return Err(Error::NotMultiplier {
                defect: membership_defect,
            }
            .at_level(k + 1));
        }
        // Symbol over the ambient algebras (corner blocks realign to
        // corner-supported factors), then re-checked against the corners.
        let mut sym = symbol(block, m_alg, n_alg, f64::INFINITY).map_err(|e| e.at_level(k + 1))?;
        for (index, a) in sym.a_ops.iter().enumerate() {
            let defect = a_span.membership_defect(a);
            if defect > tol.max(1e-8) {
                return Err(Error::MembershipViolation { index, defect }.at_level(k + 1));
            }
        }
        for (index, b) in sym.b_ops.iter().enumerate() {
            let defect = b_span.membership_defect(b);
            if defect > tol.max(1e-8) {
                return Err(Error::MembershipViolation { index, defect }.at_level(k + 1));
            }
        }
        sym.ph_bound = ph_bound_of(&sym.a_ops, &sym.b_ops)?;
        levels.push(LevelReport {
            membership_defect,
            ph_bound: sym.ph_bound,
            symbol: sym,
        });
    }
    let top = levels.last().map(|l| l.ph_bound).unwrap_or(0.0);
    let uniform = levels
        .iter()
        .all(|l| (l.ph_bound - top).abs() <= 0.1 * top.max(1e-12));
    Ok(FilteredReport {
        levels,
        classification: if uniform {
            "uniformly bounded".into()
        } else {
            "strictly local growth".into()
        },
        central,
    })
}

/// Result of the filtered completely-positive construction.
#[derive(Clone, Debug)]
pub struct FilteredCpReport {
    /// Nested per-level Kraus families (level n ops restrict to level n−1).
    pub family: FilteredKrausFamily,
    /// Per-level max membership defect of the Kraus ops against M·p_n.
    pub level_membership: Vec<f64>,
    /// Per-level ‖φ_n − Σ b_kᵗ⊗b_k*‖ relative residual.
    pub reconstruction: Vec<f64>,
    pub nesting_residual: f64,
}

/// Filtered CP multiplier over (M, M) with q_n = p_n: certifies each level's
/// block as a cone element of M·p_n and builds the nested Kraus families via
/// the graded lifting machinery with D = M′.
pub fn filtered_cp_multiplier(
    fm: &FilteredMultiplier,
    m_alg: &VNAlg,
    tol: f64,
) -> Result<FilteredCpReport> {
    let tol = tol.max(1e-9);
    for (k, (p, q)) in fm.covering.pairs.iter().enumerate() {
        if p.sub(q).norm_fro() > tol {
            return Err(Error::Input(format!(
                "pair {} has q ≠ p; the CP construction needs a symmetric covering",
                k
            )));
        }
    }
    let m = m_alg.dim;
    if fm.blocks.iter().any(|b| b.dim_h != m || b.dim_k != m) {
        return Err(Error::Shape("blocks do not act over M".into()));
    }
    // Per-level cone certificates.
    let mut reconstruction = Vec::with_capacity(fm.levels());
    let mut level_membership = Vec::with_capacity(fm.levels());
    let mut superops = Vec::with_capacity(fm.levels());
    for (k, block) in fm.blocks.iter().enumerate() {
        let map = s_phi(block, f64::INFINITY).map_err(|e| e.at_level(k + 1))?;
        let c = choi(&map).map_err(|e| e.at_level(k + 1))?;
        let family = kraus_from_choi(&c, crate::mat::TOL_PSD).map_err(|e| e.at_level(k + 1))?;
        let span = corner_span(m_alg, &fm.covering.pairs[k].0).map_err(|e| e.at_level(k + 1))?;
        let mut worst = 0.0f64;
        for (index, b) in family.ops.iter().enumerate() {
            let defect = span.membership_defect(b);
            if defect > tol.max(1e-8) {
                return Err(Error::MembershipViolation { index, defect }.at_level(k + 1));
            }
            worst = worst.max(defect);
        }
        level_membership.push(worst);
        let mut rec = ComplexMatrix::zeros(m * m, m * m);
        for b in &family.ops {
            rec = rec.add(&b.transpose().kron(&b.adjoint()));
        }
        reconstruction.push(
            rec.sub(&block.matrix).norm_fro() / f64::max(1.0, block.matrix.norm_fro()),
        );
        superops.push(map);
    }
    // Nested families through the filtered lifting over D = M′.
    let projections: Vec<ComplexMatrix> =
        fm.covering.pairs.iter().map(|(p, _)| p.clone()).collect();
    let filtration = Filtration::new(m, projections, tol.max(1e-8))?;
    let fcp = FilteredCPMap::new(filtration, superops, tol.max(1e-8))?;
    let d = commutant(m_alg)?;
    let family = nested_kraus_over(&fcp, &d, tol)?;
    let nesting_residual = family.nesting_residual();
    Ok(FilteredCpReport {
        family,
        level_membership,
        reconstruction,
        nesting_residual,
    })
}

/// Defect of the two-sided modularity S_φ(d·T·e) = d·S_φ(T)·e for d ∈ N′,
/// e ∈ M′ — the commutant bimodularity every (M, N)-multiplier satisfies.
pub fn commutant_bimodularity_defect(
    phi: &TensorMultiplier,
    m_alg: &VNAlg,
    n_alg: &VNAlg,
) -> Result<f64> {
    let map = s_phi(phi, f64::INFINITY)?;
    let m_comm = commutant(m_alg)?;
    let n_comm = commutant(n_alg)?;
    bimodular_defect_pair(&map, &n_comm.basis, &m_comm.basis)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mat::psd_check;
    use crate::sample;
    use rand::Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn theta_examples_and_roundtrip() {
        // e₁^⸸⊗e₁ → E₁₁ (2×2).
        let mut xi = vec![c(0.0, 0.0); 4];
        xi[0] = c(1.0, 0.0);
        let t = theta(&xi, 2, 2).unwrap();
        assert!(t.sub(&ComplexMatrix::unit(2, 2, 0, 0)).norm_fro() < 1e-15);

        // x = (1, i), y = (1, 0): coordinates conj(x_i)·y_j → rows [(1, −i); 0].
        let x = [c(1.0, 0.0), c(0.0, 1.0)];
        let y = [c(1.0, 0.0), c(0.0, 0.0)];
        let mut xi = vec![c(0.0, 0.0); 4];
        for i in 0..2 {
            for j in 0..2 {
                xi[i * 2 + j] = x[i].conj() * y[j];
            }
        }
        let t = theta(&xi, 2, 2).unwrap();
        let want = ComplexMatrix::from_vec(
            2,
            2,
            vec![c(1.0, 0.0), c(0.0, -1.0), c(0.0, 0.0), c(0.0, 0.0)],
        )
        .unwrap();
        assert!(t.sub(&want).norm_fro() < 1e-15);

        // Round trip on the full basis of C^{2·3}.
        for k in 0..6 {
            let mut xi = vec![c(0.0, 0.0); 6];
            xi[k] = c(1.0, 0.0);
            let back = theta_inv(&theta(&xi, 2, 3).unwrap());
            for (l, v) in back.iter().enumerate() {
                let want = if l == k { 1.0 } else { 0.0 };
                assert!((v - c(want, 0.0)).norm() < 1e-15);
            }
        }
        assert!(theta(&[c(1.0, 0.0)], 2, 3).is_err());
    }

    #[test]
    fn accept_records_defect() {
        let mut rng = sample::rng(70);
        let full2 = VNAlg::full(2);
        let any = sample::matrix(&mut rng, 4, 4);
        let phi = TensorMultiplier::accept(any, &full2, &full2, 1e-9).unwrap();
        assert!(phi.membership_defect < 1e-12);

        let diag3 = VNAlg::diagonal(3);
        let kernel = sample::hermitian(&mut rng, 3);
        let schur = SuperOp::schur(&kernel);
        let phi = TensorMultiplier::accept(schur.matrix.clone(), &diag3, &diag3, 1e-9).unwrap();
        assert!(phi.membership_defect < 1e-12);

        let dense = sample::matrix(&mut rng, 9, 9);
        match TensorMultiplier::accept(dense, &diag3, &diag3, 1e-9) {
            Err(Error::NotMultiplier { defect }) => assert!(defect > 1e-3),
            other => panic!("{:?}", other.map(|_| ())),
        }
    }

    #[test]
    fn s_phi_identity_elementary_schur() {
        let mut rng = sample::rng(71);
        // I⊗I → identity map.
        let id = TensorMultiplier::elementary(&ComplexMatrix::identity(2), &ComplexMatrix::identity(3))
            .unwrap();
        let map = s_phi(&id, 1e-9).unwrap();
        let t = sample::matrix(&mut rng, 3, 2);
        assert!(map.apply(&t).unwrap().sub(&t).norm_fro() < 1e-12);

        // aᵗ⊗b → T ↦ b·T·a.
        let a = sample::matrix(&mut rng, 2, 2);
        let b = sample::matrix(&mut rng, 3, 3);
        let phi = TensorMultiplier::elementary(&a, &b).unwrap();
        let map = s_phi(&phi, 1e-9).unwrap();
        let t = sample::matrix(&mut rng, 3, 2);
        let want = b.mul(&t).mul(&a);
        assert!(map.apply(&t).unwrap().sub(&want).norm_fro() < 1e-12);

        // Diagonal φ ↔ entrywise multiplier.
        let kernel = sample::matrix(&mut rng, 3, 3);
        let schur = SuperOp::schur(&kernel);
        let phi = TensorMultiplier {
            dim_h: 3,
            dim_k: 3,
            matrix: schur.matrix.clone(),
            membership_defect: 0.0,
        };
        let map = s_phi(&phi, 1e-9).unwrap();
        let x = sample::matrix(&mut rng, 3, 3);
        assert!(map.apply(&x).unwrap().sub(&kernel.hadamard(&x)).norm_fro() < 1e-12);
    }

    #[test]
    fn symbol_identity_and_elementary() {
        let full = VNAlg::full(2);
        let id2 = ComplexMatrix::identity(2);
        let phi = TensorMultiplier::elementary(&id2, &id2).unwrap();
        let sym = symbol(&phi, &full, &full, 1e-9).unwrap();
        assert_eq!(sym.count(), 1);
        assert!(sym.a_ops[0].sub(&id2).norm_fro() < 1e-9);
        assert!(sym.b_ops[0].sub(&id2).norm_fro() < 1e-9);
        assert!((sym.ph_bound - 1.0).abs() < 1e-9);

        let mut rng = sample::rng(72);
        let a = sample::matrix(&mut rng, 3, 3);
        let b = sample::matrix(&mut rng, 3, 3);
        let full3 = VNAlg::full(3);
        let phi = TensorMultiplier::elementary(&a, &b).unwrap();
        let sym = symbol(&phi, &full3, &full3, 1e-9).unwrap();
        assert_eq!(sym.count(), 1);
        // Recovered up to a balancing scalar: the elementary tensor matches.
        let rec = sym.a_ops[0].transpose().kron(&sym.b_ops[0]);
        assert!(rec.sub(&phi.matrix).norm_fro() < 1e-9 * phi.matrix.norm_fro());
        let want = op_norm(&a).unwrap() * op_norm(&b).unwrap();
        assert!((sym.ph_bound - want).abs() < 1e-9 * want.max(1.0));
    }

    fn random_in_pair_span(
        rng: &mut rand_chacha::ChaCha8Rng,
        m_alg: &VNAlg,
        n_alg: &VNAlg,
    ) -> ComplexMatrix {
        let mn = m_alg.dim * n_alg.dim;
        let mut out = ComplexMatrix::zeros(mn, mn);
        for a in &m_alg.basis {
            let at = a.transpose();
            for b in &n_alg.basis {
                let coeff = c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
                out = out.add(&at.kron(b).scale(coeff));
            }
        }
        out
    }

    #[test]
    fn symbol_soundness_random_pairs() {
        let pairs = vec![
            (VNAlg::full(3), VNAlg::full(2)),
            (VNAlg::diagonal(3), VNAlg::diagonal(3)),
            (VNAlg::block_diagonal(&[1, 2]).unwrap(), VNAlg::full(2)),
        ];
        let mut rng = sample::rng(73);
        for (m_alg, n_alg) in &pairs {
            for _ in 0..25 {
                let matrix = random_in_pair_span(&mut rng, m_alg, n_alg);
                let phi = TensorMultiplier::accept(matrix, m_alg, n_alg, 1e-9).unwrap();
                let sym = symbol(&phi, m_alg, n_alg, 1e-9).unwrap();
                let map = s_phi(&phi, 1e-9).unwrap();
                // Agreement on matrix units of the carrier space.
                for i in 0..n_alg.dim {
                    for j in 0..m_alg.dim {
                        let e = ComplexMatrix::unit(n_alg.dim, m_alg.dim, i, j);
                        let direct = map.apply(&e).unwrap();
                        let viasym = sym.apply(&e).unwrap();
                        assert!(
                            direct.sub(&viasym).norm_fro()
                                <= 1e-9 * f64::max(1.0, direct.norm_fro())
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn symbol_schur_diagonal_masa() {
        // PSD kernel over the diagonal masa: symbol factors are diagonal and
        // reproduce the entrywise action.
        let mut rng = sample::rng(74);
        let kernel = sample::psd(&mut rng, 3);
        let diag = VNAlg::diagonal(3);
        let phi =
            TensorMultiplier::accept(SuperOp::schur(&kernel).matrix, &diag, &diag, 1e-9).unwrap();
        let sym = symbol(&phi, &diag, &diag, 1e-9).unwrap();
        for a in sym.a_ops.iter().chain(&sym.b_ops) {
            for i in 0..3 {
                for j in 0..3 {
                    if i != j {
                        assert!(a.get(i, j).norm() < 1e-9);
                    }
                }
            }
        }
        for i in 0..3 {
            for j in 0..3 {
                let e = ComplexMatrix::unit(3, 3, i, j);
                let out = sym.apply(&e).unwrap();
                assert!((out.get(i, j) - kernel.get(i, j)).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn cone_identity_and_pinching() {
        let full = VNAlg::full(2);
        let phi = cone_element(&[ComplexMatrix::identity(2)], &full, 1e-9).unwrap();
        let report = cp_multiplier_check(&phi, &full, 1e-9).unwrap();
        assert!(report.completely_positive);
        let fam = report.kraus.unwrap();
        assert_eq!(fam.count(), 1);
        // Identity up to phase; canonical phase makes it exactly I.
        assert!(fam.ops[0].sub(&ComplexMatrix::identity(2)).norm_fro() < 1e-9);
        assert!(report.reconstruction_residual < 1e-10);

        let diag = VNAlg::diagonal(2);
        let pinch = cone_element(
            &[ComplexMatrix::unit(2, 2, 0, 0), ComplexMatrix::unit(2, 2, 1, 1)],
            &diag,
            1e-9,
        )
        .unwrap();
        let map = s_phi(&pinch, 1e-9).unwrap();
        let x = ComplexMatrix::from_real_rows(&[&[1.0, 2.0], &[3.0, 4.0]]);
        let out = map.apply(&x).unwrap();
        assert!(out
            .sub(&ComplexMatrix::diag(&[c(1.0, 0.0), c(4.0, 0.0)]))
            .norm_fro()
            < 1e-12);
        assert!(cp_multiplier_check(&pinch, &diag, 1e-9).unwrap().completely_positive);
    }

    #[test]
    fn cone_rejects_outside_ops() {
        let diag = VNAlg::diagonal(2);
        let mut rng = sample::rng(75);
        let dense = sample::matrix(&mut rng, 2, 2);
        match cone_element(&[dense], &diag, 1e-9) {
            Err(Error::MembershipViolation { index: 0, .. }) => {}
            other => panic!("{:?}", other.map(|_| ())),
        }
    }

    #[test]
    fn cp_check_transpose_rejected() {
        let full = VNAlg::full(2);
        let phi = TensorMultiplier::accept(
            SuperOp::transpose_map(2).matrix,
            &full,
            &full,
            1e-9,
        )
        .unwrap();
        let report = cp_multiplier_check(&phi, &full, 1e-9).unwrap();
        assert!(!report.completely_positive);
        assert!(report.choi_min_eigenvalue <= -0.5);
        assert!(report.kraus.is_none());
    }

    #[test]
    fn cp_check_schur_masa_equivalence() {
        let mut rng = sample::rng(76);
        let diag = VNAlg::diagonal(3);
        for trial in 0..12 {
            let kernel = if trial % 2 == 0 {
                sample::psd(&mut rng, 3)
            } else {
                sample::hermitian_not_psd(&mut rng, 3)
            };
            let phi =
                TensorMultiplier::accept(SuperOp::schur(&kernel).matrix, &diag, &diag, 1e-9)
                    .unwrap();
            let report = cp_multiplier_check(&phi, &diag, 1e-9).unwrap();
            let kernel_psd = psd_check(&kernel, 1e-9).unwrap().is_psd;
            assert_eq!(report.completely_positive, kernel_psd, "trial {}", trial);
            if kernel_psd {
                // Diagonal Kraus family reconstructing the multiplier.
                for b in &report.kraus.as_ref().unwrap().ops {
                    assert!(diag.membership_defect(b) < 1e-9);
                }
                assert!(report.reconstruction_residual < 1e-9);
            }
        }
    }

    #[test]
    fn cone_random_roundtrip() {
        let algebras = vec![
            VNAlg::full(3),
            VNAlg::diagonal(4),
            VNAlg::block_diagonal(&[2, 2]).unwrap(),
        ];
        let mut rng = sample::rng(77);
        for m_alg in &algebras {
            for _ in 0..15 {
                let count = 1 + (rng.gen::<u32>() % 3) as usize;
                let gens: Vec<ComplexMatrix> = (0..count)
                    .map(|_| {
                        let mut g = ComplexMatrix::zeros(m_alg.dim, m_alg.dim);
                        for b in &m_alg.basis {
                            let coeff = c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
                            g = g.add(&b.scale(coeff));
                        }
                        g
                    })
                    .collect();
                let phi = cone_element(&gens, m_alg, 1e-9).unwrap();
                let report = cp_multiplier_check(&phi, m_alg, 1e-9).unwrap();
                assert!(report.completely_positive);
                assert!(report.reconstruction_residual < 1e-9);
                assert!(report.membership_defect < 1e-9);
            }
        }
    }

    #[test]
    fn commutant_bimodularity_of_accepted_multipliers() {
        let mut rng = sample::rng(78);
        let pairs = vec![
            (VNAlg::block_diagonal(&[1, 2]).unwrap(), VNAlg::diagonal(2)),
            (VNAlg::diagonal(3), VNAlg::full(2)),
        ];
        for (m_alg, n_alg) in &pairs {
            for _ in 0..10 {
                let matrix = random_in_pair_span(&mut rng, m_alg, n_alg);
                let phi = TensorMultiplier::accept(matrix, m_alg, n_alg, 1e-9).unwrap();
                let defect = commutant_bimodularity_defect(&phi, m_alg, n_alg).unwrap();
                assert!(defect <= 1e-9, "defect {}", defect);
            }
        }
    }

    #[test]
    fn covering_validation_and_refinement() {
        let id = ComplexMatrix::identity(2);
        let single = CoveringFamily::new(vec![(id.clone(), id.clone())], 1e-9).unwrap();
        let (e, f) = refine_covering(&single, 1e-9).unwrap();
        assert_eq!(e.len(), 1);
        assert_eq!(f.len(), 1);
        assert!(e[0].sub(&id).norm_fro() < 1e-12);

        // Nested p₁ ≤ p₂ = I → atoms {p₁, I − p₁}.
        let p1 = ComplexMatrix::diag(&[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        let id3 = ComplexMatrix::identity(3);
        let nested = CoveringFamily::new(
            vec![(p1.clone(), p1.clone()), (id3.clone(), id3.clone())],
            1e-9,
        )
        .unwrap();
        let (e, _) = refine_covering(&nested, 1e-9).unwrap();
        assert_eq!(e.len(), 2);
        assert!(e[0].sub(&p1).norm_fro() < 1e-12);
        assert!(e[1].sub(&id3.sub(&p1)).norm_fro() < 1e-12);

        // Three overlapping commuting diagonal projections → full partition.
        let pa = ComplexMatrix::diag(&[c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        let pb = ComplexMatrix::diag(&[c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        let id4 = ComplexMatrix::identity(4);
        let three = CoveringFamily::new(
            vec![
                (pa.clone(), pa.clone()),
                (pb.clone(), pb.clone()),
                (id4.clone(), id4.clone()),
            ],
            1e-9,
        )
        .unwrap();
        let (e, _) = refine_covering(&three, 1e-9).unwrap();
        assert_eq!(e.len(), 4);
        let mut sum = ComplexMatrix::zeros(4, 4);
        for a in &e {
            assert!(projection_defect(a) < 1e-10);
            sum = sum.add(a);
        }
        assert!(sum.sub(&id4).norm_fro() < 1e-10);
        // Each generator is a subsum of atoms.
        for p in [&pa, &pb] {
            let mut rec = ComplexMatrix::zeros(4, 4);
            for a in &e {
                if a.mul(p).sub(a).norm_fro() < 1e-9 {
                    rec = rec.add(a);
                }
            }
            assert!(rec.sub(p).norm_fro() < 1e-10);
        }

        // Non-commuting pair rejected.
        let q = ComplexMatrix::from_real_rows(&[&[0.5, 0.5], &[0.5, 0.5]]);
        let e11 = ComplexMatrix::unit(2, 2, 0, 0);
        match CoveringFamily::new(vec![(e11.clone(), e11), (q.clone(), q)], 1e-9) {
            Err(Error::NotCommuting { norm, .. }) => assert!(norm > 0.1),
            other => panic!("{:?}", other.map(|_| ())),
        }

        // Join below the identity rejected.
        let p_small = ComplexMatrix::unit(2, 2, 0, 0);
        assert!(CoveringFamily::new(vec![(p_small.clone(), p_small)], 1e-9).is_err());
    }

    #[test]
    fn assemble_two_diagonal_atoms() {
        let e1 = ComplexMatrix::unit(2, 2, 0, 0);
        let e2 = ComplexMatrix::unit(2, 2, 1, 1);
        let id = ComplexMatrix::identity(2);
        let kappa = [[2.0, 3.0], [5.0, 7.0]];
        let blocks: Vec<Vec<MultiplierSymbol>> = (0..2)
            .map(|i| {
                (0..2)
                    .map(|j| MultiplierSymbol {
                        a_ops: vec![id.scale(c(kappa[i][j], 0.0))],
                        b_ops: vec![id.clone()],
                        ph_bound: kappa[i][j],
                    })
                    .collect()
            })
            .collect();
        let atoms = vec![e1.clone(), e2.clone()];
        let assembled = assemble_block_symbols(&blocks, &atoms, &atoms, 1e-9).unwrap();
        assert_eq!(assembled.symbol.count(), 4);
        assert_eq!(assembled.column_norms.len(), 2);
        assert_eq!(assembled.row_norms.len(), 2);
        // Action = Schur multiplier with entry (j, i) = κ_ij.
        for i in 0..2 {
            for j in 0..2 {
                let unit = ComplexMatrix::unit(2, 2, j, i);
                let out = assembled.symbol.apply(&unit).unwrap();
                assert!((out.get(j, i) - c(kappa[i][j], 0.0)).norm() < 1e-12);
                assert!((out.norm_fro() - kappa[i][j]).abs() < 1e-12);
            }
        }

        // Incomplete atoms rejected.
        match assemble_block_symbols(&blocks, &[e1.clone(), e1.clone()], &atoms, 1e-9) {
            Err(Error::InconsistentAtoms(_)) => {}
            other => panic!("{:?}", other.map(|_| ())),
        }
    }

    #[test]
    fn assemble_blockwise_gram_matches_global() {
        // Blockwise Gram columns of a PSD kernel reassemble the global
        // entrywise action.
        let mut rng = sample::rng(79);
        let kernel = sample::psd(&mut rng, 4);
        let diag = VNAlg::diagonal(4);
        let atoms: Vec<ComplexMatrix> = vec![
            ComplexMatrix::diag(&[c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]),
            ComplexMatrix::diag(&[c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)]),
        ];
        let phi = TensorMultiplier::accept(SuperOp::schur(&kernel).matrix, &diag, &diag, 1e-9)
            .unwrap();
        let global = s_phi(&phi, 1e-9).unwrap();
        // Block (i, j): symbol of the compressed multiplier.
        let mut blocks = Vec::new();
        for ei in &atoms {
            let mut row = Vec::new();
            for fj in &atoms {
                // Matrix of x ↦ f_j·x·e_i is e_iᵗ⊗f_j; two-sided compression.
                let cc = ei.transpose().kron(fj);
                let block = TensorMultiplier {
                    dim_h: 4,
                    dim_k: 4,
                    matrix: cc.mul(&phi.matrix).mul(&cc),
                    membership_defect: 0.0,
                };
                row.push(symbol(&block, &diag, &diag, 1e-9).unwrap());
            }
            blocks.push(row);
        }
        let assembled = assemble_block_symbols(&blocks, &atoms, &atoms, 1e-9).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let unit = ComplexMatrix::unit(4, 4, i, j);
                let want = global.apply(&unit).unwrap();
                let have = assembled.symbol.apply(&unit).unwrap();
                assert!(want.sub(&have).norm_fro() < 1e-9);
            }
        }
    }

    fn coordinate_pairs(dim: usize, cuts: &[usize]) -> Vec<(ComplexMatrix, ComplexMatrix)> {
        cuts.iter()
            .map(|&k| {
                let p = ComplexMatrix::from_fn(dim, dim, |i, j| {
                    if i == j && i < k {
                        c(1.0, 0.0)
                    } else {
                        c(0.0, 0.0)
                    }
                });
                (p.clone(), p)
            })
            .collect()
    }

    #[test]
    fn filtered_multiplier_validation() {
        let diag = VNAlg::diagonal(3);
        let kernel = {
            let mut rng = sample::rng(80);
            sample::psd(&mut rng, 3)
        };
        let phi = TensorMultiplier::accept(SuperOp::schur(&kernel).matrix, &diag, &diag, 1e-9)
            .unwrap();
        let covering = CoveringFamily::new(coordinate_pairs(3, &[1, 2, 3]), 1e-9).unwrap();
        let fm = FilteredMultiplier::from_top(covering.clone(), &phi, 1e-9).unwrap();
        assert_eq!(fm.levels(), 3);

        // Tampered middle block → inconsistency at the right level.
        let mut blocks = fm.blocks.clone();
        blocks[1].matrix = blocks[1].matrix.scale(c(2.0, 0.0));
        match FilteredMultiplier::new(covering, blocks, 1e-9) {
            Err(Error::InconsistentFiltration { level, .. }) => assert!(level == 2 || level == 3),
            other => panic!("{:?}", other.map(|_| ())),
        }
    }

    #[test]
    fn filtered_check_constant_vs_growth() {
        // Constant blocks: identity multiplier at every level of a stalled
        // covering → uniformly bounded.
        let full = VNAlg::full(2);
        let id = ComplexMatrix::identity(2);
        let phi = TensorMultiplier::elementary(&id, &id).unwrap();
        let stalled = CoveringFamily::new(
            vec![(id.clone(), id.clone()), (id.clone(), id.clone())],
            1e-9,
        )
        .unwrap();
        let fm = FilteredMultiplier::from_top(stalled, &phi, 1e-9).unwrap();
        let report = filtered_multiplier_check(&fm, &full, &full, 1e-9).unwrap();
        assert_eq!(report.classification, "uniformly bounded");
        assert!(report.central); // I is central in M₂.
        assert!((report.levels[0].ph_bound - 1.0).abs() < 1e-9);

        // Cauchy kernel at nodes 1/k: diagonal k/2 grows with the level.
        let nodes: Vec<f64> = (1..=4).map(|k| 1.0 / k as f64).collect();
        let kernel = ComplexMatrix::from_fn(4, 4, |i, j| c(1.0 / (nodes[i] + nodes[j]), 0.0));
        let diag = VNAlg::diagonal(4);
        let phi = TensorMultiplier::accept(SuperOp::schur(&kernel).matrix, &diag, &diag, 1e-9)
            .unwrap();
        let covering = CoveringFamily::new(coordinate_pairs(4, &[1, 2, 3, 4]), 1e-9).unwrap();
        let fm = FilteredMultiplier::from_top(covering, &phi, 1e-9).unwrap();
        let report = filtered_multiplier_check(&fm, &diag, &diag, 1e-9).unwrap();
        assert_eq!(report.classification, "strictly local growth");
        assert!(report.central);
        // ph_bound per level = max diagonal on the support = k/2.
        for (k, level) in report.levels.iter().enumerate() {
            let want = (k + 1) as f64 / 2.0;
            assert!(
                (level.ph_bound - want).abs() < 1e-6 * want,
                "level {}: {} vs {}",
                k,
                level.ph_bound,
                want
            );
        }

        // Single-level filtration equals the global report.
        let single = CoveringFamily::new(coordinate_pairs(4, &[4]), 1e-9).unwrap();
        let fm1 = FilteredMultiplier::from_top(single, &phi, 1e-9).unwrap();
        let r1 = filtered_multiplier_check(&fm1, &diag, &diag, 1e-9).unwrap();
        assert_eq!(r1.classification, "uniformly bounded");
        assert!((r1.levels[0].ph_bound - report.levels[3].ph_bound).abs() < 1e-9);
    }

    #[test]
    fn filtered_cp_identity_blocks() {
        let diag = VNAlg::diagonal(3);
        let covering = CoveringFamily::new(coordinate_pairs(3, &[1, 2, 3]), 1e-9).unwrap();
        // Identity multiplier compressed: blocks p_nᵗ⊗p_n.
        let id = ComplexMatrix::identity(3);
        let phi = TensorMultiplier::accept(
            TensorMultiplier::elementary(&id, &id).unwrap().matrix,
            &diag,
            &diag,
            1e-9,
        )
        .unwrap();
        let fm = FilteredMultiplier::from_top(covering, &phi, 1e-9).unwrap();
        let report = filtered_cp_multiplier(&fm, &diag, 1e-9).unwrap();
        assert!(report.nesting_residual < 1e-9);
        for (n, fam) in report.family.levels.iter().enumerate() {
            assert_eq!(fam.count(), 1, "level {}", n);
            let p = &fm.covering.pairs[n].0;
            // Equal to p_n up to the matching phase.
            let phase = fam.ops[0].get(0, 0);
            assert!((phase.norm() - 1.0).abs() < 1e-9, "level {}", n);
            assert!(fam.ops[0].scale(phase.conj()).sub(p).norm_fro() < 1e-9);
        }
        for r in &report.reconstruction {
            assert!(*r < 1e-9);
        }
    }

    #[test]
    fn filtered_cp_random_schur() {
        let mut rng = sample::rng(81);
        for n in [5usize, 8] {
            let kernel = sample::psd(&mut rng, n);
            let diag = VNAlg::diagonal(n);
            let phi =
                TensorMultiplier::accept(SuperOp::schur(&kernel).matrix, &diag, &diag, 1e-9)
                    .unwrap();
            let cuts = vec![n / 3 + 1, 2 * n / 3, n];
            let covering = CoveringFamily::new(coordinate_pairs(n, &cuts), 1e-9).unwrap();
            let fm = FilteredMultiplier::from_top(covering, &phi, 1e-9).unwrap();
            let report = filtered_cp_multiplier(&fm, &diag, 1e-9).unwrap();
            assert!(report.nesting_residual < 1e-9, "nesting {}", report.nesting_residual);
            for (k, r) in report.reconstruction.iter().enumerate() {
                assert!(*r < 1e-9, "level {} residual {}", k + 1, r);
            }
            for d in &report.level_membership {
                assert!(*d < 1e-8);
            }
            // Counts monotone along the filtration.
            for w in report.family.levels.windows(2) {
                assert!(w[0].count() <= w[1].count());
            }
        }
    }

    #[test]
    fn filtered_cp_fails_at_named_level() {
        // Kernel PSD on the first coordinate but not on the first two.
        let kernel = ComplexMatrix::from_real_rows(&[
            &[1.0, 2.0, 0.0],
            &[2.0, 1.0, 0.0],
            &[0.0, 0.0, 1.0],
        ]);
        let diag = VNAlg::diagonal(3);
        let phi = TensorMultiplier::accept(SuperOp::schur(&kernel).matrix, &diag, &diag, 1e-9)
            .unwrap();
        let covering = CoveringFamily::new(coordinate_pairs(3, &[1, 2, 3]), 1e-9).unwrap();
        let fm = FilteredMultiplier::from_top(covering, &phi, 1e-9).unwrap();
        match filtered_cp_multiplier(&fm, &diag, 1e-9) {
            Err(Error::AtLevel { level: 2, source }) => {
                assert!(matches!(*source, Error::NotCompletelyPositive { .. }));
            }
            other => panic!("{:?}", other.map(|_| ())),
        }
    }
}
