//! Finite-dimensional von Neumann algebras as validated matrix subalgebras:
//! span projections, membership defects, commutants, and the standard
//! constructions (scalars, diagonal, block-diagonal, full, generated).

use crate::error::{Error, Result};
use crate::mat::{herm_eig, ComplexMatrix};
use num_complex::Complex64;

/// Relative threshold for span-rank decisions during orthonormalization.
const SPAN_TOL: f64 = 1e-10;

/// Orthonormalized linear span of matrices of one common shape, in Frobenius
/// geometry; answers projection and membership questions.
#[derive(Clone, Debug)]
pub struct Span {
    shape: (usize, usize),
    basis: Vec<Vec<Complex64>>,
}

impl Span {
    /// Orthonormalize the generators (modified Gram–Schmidt, two passes);
    /// directions shorter than `SPAN_TOL`·(largest generator) are dropped.
    pub fn new(shape: (usize, usize), gens: &[ComplexMatrix]) -> Result<Self> {
        let cells = shape.0 * shape.1;
        let scale = gens
            .iter()
            .map(|g| g.norm_fro())
            .fold(0.0f64, f64::max)
            .max(1.0);
        let mut basis: Vec<Vec<Complex64>> = Vec::new();
        for g in gens {
            if (g.rows(), g.cols()) != shape {
                return Err(Error::Shape(format!(
                    "span generator is {}x{}, expected {}x{}",
                    g.rows(),
                    g.cols(),
                    shape.0,
                    shape.1
                )));
            }
            let mut v: Vec<Complex64> = g.data().to_vec();
            for _ in 0..2 {
                for u in &basis {
                    let ip: Complex64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                    for k in 0..cells {
                        v[k] -= ip * u[k];
                    }
                }
            }
            let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm > SPAN_TOL * scale {
                for z in &mut v {
                    *z /= norm;
                }
                basis.push(v);
            }
        }
        Ok(Span { shape, basis })
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn shape(&self) -> (usize, usize) {
        self.shape
    }

    /// Orthogonal projection of `x` onto the span.
    pub fn project(&self, x: &ComplexMatrix) -> ComplexMatrix {
        let mut out = vec![Complex64::new(0.0, 0.0); self.shape.0 * self.shape.1];
        let xv = x.data();
        for u in &self.basis {
            let ip: Complex64 = u.iter().zip(xv).map(|(a, b)| a.conj() * b).sum();
            for (o, uk) in out.iter_mut().zip(u) {
                *o += ip * uk;
            }
        }
        ComplexMatrix::from_vec(self.shape.0, self.shape.1, out).expect("shape fixed")
    }

    /// ‖x − P(x)‖_F / max(1, ‖x‖_F): zero iff x lies in the span.
    pub fn membership_defect(&self, x: &ComplexMatrix) -> f64 {
        let p = self.project(x);
        x.sub(&p).norm_fro() / f64::max(1.0, x.norm_fro())
    }

    pub fn contains(&self, x: &ComplexMatrix, tol: f64) -> bool {
        self.membership_defect(x) <= tol
    }

    /// The orthonormal basis as matrices.
    pub fn basis_matrices(&self) -> Vec<ComplexMatrix> {
        self.basis
            .iter()
            .map(|v| ComplexMatrix::from_vec(self.shape.0, self.shape.1, v.clone()).expect("shape"))
            .collect()
    }
}

/// Unital *-subalgebra of n×n matrices, given by a spanning basis.
///
/// Construction validates the algebra axioms numerically: adjoints and
/// pairwise products of basis elements stay in the span, and the identity
/// lies in the span.
#[derive(Clone, Debug)]
pub struct VNAlg {
    pub dim: usize,
    pub basis: Vec<ComplexMatrix>,
    pub contains_unit: bool,
}

impl VNAlg {
    pub fn new(dim: usize, basis: Vec<ComplexMatrix>, tol: f64) -> Result<Self> {
        if basis.is_empty() {
            return Err(Error::InvalidAlgebra("empty basis".into()));
        }
        for (i, b) in basis.iter().enumerate() {
            if b.rows() != dim || b.cols() != dim {
                return Err(Error::InvalidAlgebra(format!(
                    "basis element {} is {}x{}, ambient dimension is {}",
                    i,
                    b.rows(),
                    b.cols(),
                    dim
                )));
            }
        }
        let span = Span::new((dim, dim), &basis)?;
        for (i, b) in basis.iter().enumerate() {
            let d = span.membership_defect(&b.adjoint());
            if d > tol {
                return Err(Error::InvalidAlgebra(format!(
                    "adjoint of basis element {} leaves the span (defect {:.3e})",
                    i, d
                )));
            }
        }
        for (i, a) in basis.iter().enumerate() {
            for (j, b) in basis.iter().enumerate() {
                let d = span.membership_defect(&a.mul(b));
                if d > tol {
                    return Err(Error::InvalidAlgebra(format!(
                        "product of basis elements {} and {} leaves the span (defect {:.3e})",
                        i, j, d
                    )));
                }
            }
        }
        let unit_defect = span.membership_defect(&ComplexMatrix::identity(dim));
        if unit_defect > tol {
            return Err(Error::InvalidAlgebra(format!(
                "identity is not in the span (defect {:.3e})",
                unit_defect
            )));
        }
        Ok(VNAlg {
            dim,
            basis,
            contains_unit: true,
        })
    }

    /// Scalars C·I on C^n.
    pub fn scalars(n: usize) -> Self {
        VNAlg {
            dim: n,
            basis: vec![ComplexMatrix::identity(n)],
            contains_unit: true,
        }
    }

    /// Full matrix algebra M_n.
    pub fn full(n: usize) -> Self {
        let mut basis = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                basis.push(ComplexMatrix::unit(n, n, i, j));
            }
        }
        VNAlg {
            dim: n,
            basis,
            contains_unit: true,
        }
    }

    /// Diagonal matrices on C^n.
    pub fn diagonal(n: usize) -> Self {
        let basis = (0..n).map(|i| ComplexMatrix::unit(n, n, i, i)).collect();
        VNAlg {
            dim: n,
            basis,
            contains_unit: true,
        }
    }

    /// Block-diagonal algebra ⊕ M_{sizes[k]}; sizes must sum to the ambient
    /// dimension.
    pub fn block_diagonal(sizes: &[usize]) -> Result<Self> {
        let n: usize = sizes.iter().sum();
        let mut basis = Vec::new();
        let mut off = 0;
        for &s in sizes {
            for i in 0..s {
                for j in 0..s {
                    basis.push(ComplexMatrix::unit(n, n, off + i, off + j));
                }
            }
            off += s;
        }
        if basis.is_empty() {
            return Err(Error::InvalidAlgebra("no blocks".into()));
        }
        Ok(VNAlg {
            dim: n,
            basis,
            contains_unit: true,
        })
    }

    /// Smallest unital *-algebra containing the generators: close the span
    /// under adjoints and products until it stabilizes, then orthonormalize.
    pub fn generated(dim: usize, gens: &[ComplexMatrix], tol: f64) -> Result<Self> {
        let mut pool: Vec<ComplexMatrix> = vec![ComplexMatrix::identity(dim)];
        for g in gens {
            if g.rows() != dim || g.cols() != dim {
                return Err(Error::InvalidAlgebra(format!(
                    "generator is {}x{}, ambient dimension is {}",
                    g.rows(),
                    g.cols(),
                    dim
                )));
            }
            pool.push(g.clone());
            pool.push(g.adjoint());
        }
        loop {
            let span = Span::new((dim, dim), &pool)?;
            let basis = span.basis_matrices();
            let mut grown = false;
            'search: for a in &basis {
                for b in &basis {
                    let prod = a.mul(b);
                    if span.membership_defect(&prod) > tol {
                        pool = basis.clone();
                        pool.push(prod);
                        grown = true;
                        break 'search;
                    }
                }
            }
            if !grown {
                return VNAlg::new(dim, basis, 1e-8);
            }
            if pool.len() > dim * dim + 1 {
                return Err(Error::InvalidAlgebra(
                    "generated span failed to stabilize".into(),
                ));
            }
        }
    }

    /// Orthonormalized span of the basis.
    pub fn span(&self) -> Span {
        Span::new((self.dim, self.dim), &self.basis).expect("validated shapes")
    }

    /// Span dimension (linear dimension of the algebra).
    pub fn linear_dim(&self) -> usize {
        self.span().dim()
    }

    /// Membership defect of `x` relative to the algebra span.
    pub fn membership_defect(&self, x: &ComplexMatrix) -> f64 {
        self.span().membership_defect(x)
    }

    /// Largest relative commutation defect ‖xb − bx‖/max(1, ‖x‖‖b‖) over the
    /// basis; zero iff x commutes with the algebra.
    pub fn commutation_defect(&self, x: &ComplexMatrix) -> f64 {
        let mut worst = 0.0f64;
        for b in &self.basis {
            let comm = x.mul(b).sub(&b.mul(x)).norm_fro();
            let den = f64::max(1.0, x.norm_fro() * b.norm_fro());
            worst = worst.max(comm / den);
        }
        worst
    }
}

/// Commutant A′ = {x : xa = ax for all a in A}, computed as the joint
/// nullspace of the commutator maps x ↦ xa − ax over the basis.
pub fn commutant(a: &VNAlg) -> Result<VNAlg> {
    let n = a.dim;
    let id = ComplexMatrix::identity(n);
    // vec(xb − bx) = (bᵗ⊗I − I⊗b)·vec(x); stack Gram over unit-normalized b.
    let mut s = ComplexMatrix::zeros(n * n, n * n);
    for b in &a.basis {
        let norm = b.norm_fro();
        if norm == 0.0 {
            continue;
        }
        let bn = b.scale(Complex64::new(1.0 / norm, 0.0));
        let k = bn.transpose().kron(&id).sub(&id.kron(&bn));
        s = s.add(&k.adjoint().mul(&k));
    }
    let eig = herm_eig(&s)?;
    let top = eig.values.iter().cloned().fold(0.0, f64::max);
    let threshold = 1e-10 * f64::max(top, 1.0);
    let mut basis = Vec::new();
    for (k, &lam) in eig.values.iter().enumerate() {
        if lam <= threshold {
            let v = eig.vector(k);
            basis.push(ComplexMatrix::from_vec_col(&v, n, n));
        }
    }
    if basis.is_empty() {
        return Err(Error::InvalidAlgebra(
            "commutant came out empty; the identity always commutes".into(),
        ));
    }
    VNAlg::new(n, basis, 1e-8)
}
