//! Dense complex matrices and the Hermitian numerical kernel:
//! cyclic Jacobi eigensolver, PSD certification, pivoted Cholesky,
//! spectral functions, operator norm.

use crate::error::{Error, Result};
use num_complex::Complex64;

/// Hermitian-defect tolerance, relative to max(1, ‖A‖).
pub const TOL_HERM: f64 = 1e-12;
/// PSD / numerical-rank tolerance, relative to max(1, ‖A‖).
pub const TOL_PSD: f64 = 1e-9;
/// Reconstruction-residual tolerance, relative to max(1, ‖A‖).
pub const TOL_RECON: f64 = 1e-10;

/// Jacobi convergence target: off-diagonal Frobenius mass relative to max(1, ‖A‖).
const JACOBI_OFF_TARGET: f64 = 1e-14;
/// Hard cap on Jacobi sweeps before reporting `NoConvergence`.
const JACOBI_MAX_SWEEPS: usize = 100;

/// Dense complex matrix, row-major storage. 0×0 and 0×n shapes are legal.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl std::fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self.get(i, j);
                write!(f, "{:+.4}{:+.4}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Complex64::new(1.0, 0.0));
        }
        m
    }

    /// Build from a closure on (row, col).
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        ComplexMatrix { rows, cols, data }
    }

    /// Build from real entries, row-major rows.
    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        Self::from_fn(r, c, |i, j| Complex64::new(rows[i][j], 0.0))
    }

    /// Build from raw row-major data.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "expected {} entries for a {}x{} matrix, got {}",
                rows * cols,
                rows,
                cols,
                data.len()
            )));
        }
        Ok(ComplexMatrix { rows, cols, data })
    }

    /// Diagonal matrix from the given entries.
    pub fn diag(entries: &[Complex64]) -> Self {
        let n = entries.len();
        Self::from_fn(n, n, |i, j| {
            if i == j {
                entries[i]
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + b)
            .collect();
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - b)
            .collect();
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a * s).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(
            self.cols, other.rows,
            "inner dimensions must agree: {}x{} * {}x{}",
            self.rows, self.cols, other.rows, other.cols
        );
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    let v = out.get(i, j) + a * other.get(k, j);
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn conj(&self) -> Self {
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a.conj()).collect(),
        }
    }

    /// Kronecker product, first factor indexing the slow (block) axis.
    pub fn kron(&self, other: &Self) -> Self {
        let (r1, c1, r2, c2) = (self.rows, self.cols, other.rows, other.cols);
        Self::from_fn(r1 * r2, c1 * c2, |i, j| {
            self.get(i / r2, j / c2) * other.get(i % r2, j % c2)
        })
    }

    pub fn trace(&self) -> Complex64 {
        assert!(self.is_square());
        (0..self.rows).map(|i| self.get(i, i)).sum()
    }

    pub fn norm_fro(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn norm_max(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// ‖A − A*‖_F, the Hermitian defect (0 for non-square shapes never arises:
    /// callers check squareness first).
    pub fn hermitian_defect(&self) -> f64 {
        self.sub(&self.adjoint()).norm_fro()
    }

    /// Column-stacking vectorization: vec(A)[j·rows + i] = A[i][j].
    pub fn vec_col(&self) -> Vec<Complex64> {
        let mut v = Vec::with_capacity(self.rows * self.cols);
        for j in 0..self.cols {
            for i in 0..self.rows {
                v.push(self.get(i, j));
            }
        }
        v
    }

    /// Inverse of `vec_col`.
    pub fn from_vec_col(v: &[Complex64], rows: usize, cols: usize) -> Self {
        assert_eq!(v.len(), rows * cols);
        Self::from_fn(rows, cols, |i, j| v[j * rows + i])
    }

    /// Matrix unit E_{ij} of shape rows×cols.
    pub fn unit(rows: usize, cols: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(rows, cols);
        m.set(i, j, Complex64::new(1.0, 0.0));
        m
    }

    /// Entrywise (Hadamard) product.
    pub fn hadamard(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a * b)
            .collect();
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }
}

/// Hermitian eigendecomposition: `values` ascending, `basis` unitary with
/// eigenvector columns, A = basis · diag(values) · basis*.
#[derive(Clone, Debug)]
pub struct HermEig {
    pub values: Vec<f64>,
    pub basis: ComplexMatrix,
}

/// PSD verdict with a certificate either way: a Rayleigh witness when the
/// verdict is negative, a Gram factor when it is positive.
#[derive(Clone, Debug)]
pub struct PsdVerdict {
    pub is_psd: bool,
    pub min_eigenvalue: f64,
    pub witness: Option<Vec<Complex64>>,
    pub factor: Option<LowRankFactor>,
}

/// Low-rank Gram factor: `r` is rank×n with r*·r = A.
#[derive(Clone, Debug)]
pub struct LowRankFactor {
    pub rank: usize,
    pub r: ComplexMatrix,
}

fn check_hermitian(a: &ComplexMatrix) -> Result<()> {
    if !a.is_square() {
        return Err(Error::Shape(format!(
            "expected a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let defect = a.hermitian_defect();
    if defect > TOL_HERM * f64::max(1.0, a.norm_fro()) {
        return Err(Error::NotHermitian { defect });
    }
    Ok(())
}

fn off_diagonal_mass(a: &ComplexMatrix) -> f64 {
    let n = a.rows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a.get(i, j).norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Hermitian eigendecomposition by cyclic Jacobi rotations.
///
/// Deterministic: fixed sweep order (row by row), convergence when the
/// off-diagonal Frobenius mass falls below 1e-14·max(1, ‖A‖), eigenvalues
/// sorted ascending, each eigenvector's largest-modulus entry made real
/// positive. Fails with `NotHermitian` on asymmetric input and
/// `NoConvergence` after 100 sweeps.
pub fn herm_eig(a: &ComplexMatrix) -> Result<HermEig> {
    check_hermitian(a)?;
    let n = a.rows();
    if n == 0 {
        return Ok(HermEig {
            values: vec![],
            basis: ComplexMatrix::zeros(0, 0),
        });
    }

    // Symmetrize once so rounding in the input cannot bias the iteration.
    let mut m = a.add(&a.adjoint()).scale(Complex64::new(0.5, 0.0));
    let mut u = ComplexMatrix::identity(n);
    let target = JACOBI_OFF_TARGET * f64::max(1.0, m.norm_fro());
    // Rotations below this threshold cannot move the off-diagonal mass past
    // the target, so they are skipped.
    let skip = 0.1 * target / (n as f64);

    let mut converged = off_diagonal_mass(&m) <= target;
    let mut sweeps = 0;
    while !converged {
        if sweeps >= JACOBI_MAX_SWEEPS {
            return Err(Error::NoConvergence {
                sweeps,
                off: off_diagonal_mass(&m),
            });
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let beta = m.get(p, q);
                let b = beta.norm();
                if b <= skip {
                    continue;
                }
                let phase = beta / b; // e^{iθ}
                let alpha = m.get(p, p).re;
                let gamma = m.get(q, q).re;
                let tau = (gamma - alpha) / (2.0 * b);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                // Unitary on the (p,q) plane:
                //   V = [[c, s], [-s·e^{-iθ}, c·e^{-iθ}]]
                let vpp = Complex64::new(c, 0.0);
                let vpq = Complex64::new(s, 0.0);
                let vqp = -s * phase.conj();
                let vqq = c * phase.conj();

                // M ← V* M V, applied as column then row updates.
                for k in 0..n {
                    let mk_p = m.get(k, p);
                    let mk_q = m.get(k, q);
                    m.set(k, p, mk_p * vpp + mk_q * vqp);
                    m.set(k, q, mk_p * vpq + mk_q * vqq);
                }
                for k in 0..n {
                    let mp_k = m.get(p, k);
                    let mq_k = m.get(q, k);
                    m.set(p, k, vpp.conj() * mp_k + vqp.conj() * mq_k);
                    m.set(q, k, vpq.conj() * mp_k + vqq.conj() * mq_k);
                }
                // Pin the eliminated pair and diagonal reality against drift.
                m.set(p, q, Complex64::new(0.0, 0.0));
                m.set(q, p, Complex64::new(0.0, 0.0));
                let dp = m.get(p, p).re;
                let dq = m.get(q, q).re;
                m.set(p, p, Complex64::new(dp, 0.0));
                m.set(q, q, Complex64::new(dq, 0.0));

                for k in 0..n {
                    let uk_p = u.get(k, p);
                    let uk_q = u.get(k, q);
                    u.set(k, p, uk_p * vpp + uk_q * vqp);
                    u.set(k, q, uk_p * vpq + uk_q * vqq);
                }
            }
        }
        sweeps += 1;
        converged = off_diagonal_mass(&m) <= target;
    }

    // Sort ascending; stable in the original index on ties.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        m.get(i, i)
            .re
            .partial_cmp(&m.get(j, j).re)
            .unwrap()
            .then(i.cmp(&j))
    });
    let values: Vec<f64> = order.iter().map(|&i| m.get(i, i).re).collect();
    let mut basis = ComplexMatrix::zeros(n, n);
    for (new_col, &old_col) in order.iter().enumerate() {
        // Phase canonicalization: largest-modulus entry real positive,
        // first index winning ties, so repeated runs agree bit for bit.
        let mut best = 0usize;
        let mut best_norm = 0.0f64;
        for k in 0..n {
            let nk = u.get(k, old_col).norm();
            if nk > best_norm * (1.0 + 1e-12) {
                best_norm = nk;
                best = k;
            }
        }
        let pivot = u.get(best, old_col);
        let phase = if pivot.norm() > 0.0 {
            pivot.conj() / pivot.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        for k in 0..n {
            basis.set(k, new_col, u.get(k, old_col) * phase);
        }
    }
    Ok(HermEig { values, basis })
}

impl HermEig {
    /// Reassemble basis · diag(f(values)) · basis*.
    pub fn assemble(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.values.len();
        let mut out = ComplexMatrix::zeros(n, n);
        for (k, &lam) in self.values.iter().enumerate() {
            let flam = f(lam);
            if flam == 0.0 {
                continue;
            }
            for i in 0..n {
                let vi = self.basis.get(i, k);
                if vi.norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..n {
                    let v = out.get(i, j) + vi * self.basis.get(j, k).conj() * flam;
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    /// Eigenvector for the k-th (ascending) eigenvalue.
    pub fn vector(&self, k: usize) -> Vec<Complex64> {
        (0..self.basis.rows()).map(|i| self.basis.get(i, k)).collect()
    }
}

/// PSD check with certificate: witness vector if not PSD (its Rayleigh
/// quotient equals the reported min eigenvalue), pivoted-Cholesky factor if
/// PSD. The verdict threshold is min eigenvalue ≥ −tol·max(1, ‖A‖_op).
pub fn psd_check(a: &ComplexMatrix, tol: f64) -> Result<PsdVerdict> {
    check_hermitian(a)?;
    if a.rows() == 0 {
        return Ok(PsdVerdict {
            is_psd: true,
            min_eigenvalue: 0.0,
            witness: None,
            factor: Some(LowRankFactor {
                rank: 0,
                r: ComplexMatrix::zeros(0, 0),
            }),
        });
    }
    let eig = herm_eig(a)?;
    let min_eigenvalue = eig.values[0];
    let scale = eig
        .values
        .iter()
        .map(|v| v.abs())
        .fold(0.0, f64::max)
        .max(1.0);
    if min_eigenvalue >= -tol * scale {
        let factor = pivoted_cholesky_raw(a, tol);
        Ok(PsdVerdict {
            is_psd: true,
            min_eigenvalue,
            witness: None,
            factor: Some(factor),
        })
    } else {
        Ok(PsdVerdict {
            is_psd: false,
            min_eigenvalue,
            witness: Some(eig.vector(0)),
            factor: None,
        })
    }
}

/// Pivoted Cholesky without the PSD pre-check; truncates once the residual
/// diagonal falls below tol·(initial max diagonal). Negative residual pivots
/// within that band are treated as zero.
fn pivoted_cholesky_raw(a: &ComplexMatrix, tol: f64) -> LowRankFactor {
    let n = a.rows();
    let mut d: Vec<f64> = (0..n).map(|j| a.get(j, j).re).collect();
    let d0 = d.iter().cloned().fold(0.0, f64::max);
    let threshold = tol * f64::max(d0, 0.0);
    let mut rows: Vec<Vec<Complex64>> = Vec::new();

    loop {
        let mut p = 0usize;
        let mut dp = f64::NEG_INFINITY;
        for j in 0..n {
            if d[j] > dp {
                dp = d[j];
                p = j;
            }
        }
        if n == 0 || dp <= threshold || dp <= 0.0 {
            break;
        }
        let sq = dp.sqrt();
        let mut row = vec![Complex64::new(0.0, 0.0); n];
        for (j, rj) in row.iter_mut().enumerate() {
            let mut v = a.get(p, j);
            for prev in &rows {
                v -= prev[p].conj() * prev[j];
            }
            *rj = v / sq;
        }
        for j in 0..n {
            d[j] -= row[j].norm_sqr();
        }
        rows.push(row);
        if rows.len() == n {
            break;
        }
    }

    let rank = rows.len();
    let mut r = ComplexMatrix::zeros(rank, n);
    for (i, row) in rows.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            r.set(i, j, v);
        }
    }
    LowRankFactor { rank, r }
}

/// Diagonally pivoted Cholesky factorization A = R*·R with R rank×n.
///
/// Runs the PSD check first so a negative verdict propagates its witness;
/// rank decisions truncate residual diagonals below tol·(max diagonal), ties
/// keeping the earlier pivot index.
pub fn pivoted_cholesky(a: &ComplexMatrix, tol: f64) -> Result<LowRankFactor> {
    let verdict = psd_check(a, tol)?;
    if !verdict.is_psd {
        return Err(Error::NotPsd {
            min_eigenvalue: verdict.min_eigenvalue,
            witness: verdict.witness.unwrap_or_default(),
        });
    }
    Ok(pivoted_cholesky_raw(a, tol))
}

/// Spectral function calculus: f applied to a Hermitian matrix through its
/// eigendecomposition. Every eigenvalue must lie strictly inside `domain`.
pub fn mat_fn(
    a: &ComplexMatrix,
    f: &dyn Fn(f64) -> f64,
    domain: (f64, f64),
) -> Result<ComplexMatrix> {
    let eig = herm_eig(a)?;
    for &lam in &eig.values {
        if !(lam > domain.0 && lam < domain.1) {
            return Err(Error::DomainViolation {
                value: lam,
                lo: domain.0,
                hi: domain.1,
            });
        }
    }
    Ok(eig.assemble(f))
}

/// Operator (spectral) norm: largest singular value. 0 for empty shapes.
pub fn op_norm(a: &ComplexMatrix) -> Result<f64> {
    if a.rows() == 0 || a.cols() == 0 {
        return Ok(0.0);
    }
    let gram = a.adjoint().mul(a);
    let eig = herm_eig(&gram)?;
    let top = eig.values.last().copied().unwrap_or(0.0);
    Ok(top.max(0.0).sqrt())
}

/// Rayleigh quotient v*Av / v*v.
pub fn rayleigh(a: &ComplexMatrix, v: &[Complex64]) -> f64 {
    let n = a.rows();
    assert_eq!(v.len(), n);
    let mut num = Complex64::new(0.0, 0.0);
    let mut den = 0.0;
    for i in 0..n {
        let mut av = Complex64::new(0.0, 0.0);
        for j in 0..n {
            av += a.get(i, j) * v[j];
        }
        num += v[i].conj() * av;
        den += v[i].norm_sqr();
    }
    num.re / den
}
