//! Scalar-function kernels and group kernels: Loewner matrices with an
//! operator-monotonicity test and an independent sampling oracle, finite
//! groups with Toeplitz-type kernels and a Bochner-style character check,
//! and the Cauchy kernel with its quadrature Gram representation.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::mat::{herm_eig, mat_fn, op_norm, psd_check, ComplexMatrix, PsdVerdict};
use crate::sample;
use crate::schur::{representing_vectors, GramRep, Kernel, WeightedPointSet};

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Scalar function with an open domain and an optional analytic derivative;
/// the derivative feeds the Loewner diagonal.
#[derive(Clone)]
pub struct ScalarFunction {
    pub name: String,
    /// Open interval (lo, hi); evaluation points must lie strictly inside.
    pub domain: (f64, f64),
    eval: RealFn,
    derivative: Option<RealFn>,
}

impl fmt::Debug for ScalarFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarFunction")
            .field("name", &self.name)
            .field("domain", &self.domain)
            .field("analytic_derivative", &self.derivative.is_some())
            .finish()
    }
}

impl ScalarFunction {
    pub fn custom(
        name: impl Into<String>,
        domain: (f64, f64),
        eval: RealFn,
        derivative: Option<RealFn>,
    ) -> Self {
        ScalarFunction {
            name: name.into(),
            domain,
            eval,
            derivative,
        }
    }

    /// √t on (0, ∞).
    pub fn sqrt() -> Self {
        Self::custom(
            "sqrt",
            (0.0, f64::INFINITY),
            Arc::new(f64::sqrt),
            Some(Arc::new(|t| 0.5 / t.sqrt())),
        )
    }

    /// ln(1+t) on (−1, ∞).
    pub fn log1p() -> Self {
        Self::custom(
            "log1p",
            (-1.0, f64::INFINITY),
            Arc::new(f64::ln_1p),
            Some(Arc::new(|t| 1.0 / (1.0 + t))),
        )
    }

    /// t^p on (0, ∞); requires p > 0.
    pub fn power(p: f64) -> Result<Self> {
        if !(p > 0.0) {
            return Err(Error::Input(format!("power exponent must be > 0, got {}", p)));
        }
        Ok(Self::custom(
            format!("pow:{}", p),
            (0.0, f64::INFINITY),
            Arc::new(move |t: f64| t.powf(p)),
            Some(Arc::new(move |t: f64| p * t.powf(p - 1.0))),
        ))
    }

    /// t² on ℝ.
    pub fn square() -> Self {
        Self::custom(
            "square",
            (f64::NEG_INFINITY, f64::INFINITY),
            Arc::new(|t| t * t),
            Some(Arc::new(|t| 2.0 * t)),
        )
    }

    /// e^t on ℝ.
    pub fn exp() -> Self {
        Self::custom(
            "exp",
            (f64::NEG_INFINITY, f64::INFINITY),
            Arc::new(f64::exp),
            Some(Arc::new(f64::exp)),
        )
    }

    /// t on ℝ.
    pub fn identity() -> Self {
        Self::custom(
            "identity",
            (f64::NEG_INFINITY, f64::INFINITY),
            Arc::new(|t| t),
            Some(Arc::new(|_| 1.0)),
        )
    }

    /// αt + β on ℝ.
    pub fn affine(alpha: f64, beta: f64) -> Self {
        Self::custom(
            format!("affine:{}:{}", alpha, beta),
            (f64::NEG_INFINITY, f64::INFINITY),
            Arc::new(move |t: f64| alpha * t + beta),
            Some(Arc::new(move |_| alpha)),
        )
    }

    /// Named functions: sqrt, log1p, square, exp, identity, pow:<p>.
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "sqrt" => Ok(Self::sqrt()),
            "log1p" => Ok(Self::log1p()),
            "square" => Ok(Self::square()),
            "exp" => Ok(Self::exp()),
            "identity" | "id" => Ok(Self::identity()),
            _ => {
                if let Some(p) = s.strip_prefix("pow:") {
                    let p: f64 = p
                        .parse()
                        .map_err(|_| Error::Input(format!("bad exponent in '{}'", s)))?;
                    Self::power(p)
                } else {
                    Err(Error::Input(format!(
                        "unknown function '{}'; expected sqrt|log1p|square|exp|identity|pow:<p>",
                        s
                    )))
                }
            }
        }
    }

    /// Standard test battery with the expected operator-monotone flag.
    pub fn battery() -> Vec<(ScalarFunction, bool)> {
        vec![
            (Self::sqrt(), true),
            (Self::log1p(), true),
            (Self::power(0.3).unwrap(), true),
            (Self::power(0.5).unwrap(), true),
            (Self::power(0.9).unwrap(), true),
            (Self::square(), false),
            (Self::exp(), false),
        ]
    }

    pub fn eval(&self, t: f64) -> f64 {
        (self.eval)(t)
    }

    pub fn contains(&self, t: f64) -> bool {
        t > self.domain.0 && t < self.domain.1
    }

    pub fn has_analytic_derivative(&self) -> bool {
        self.derivative.is_some()
    }

    /// Analytic derivative when available, else the central difference.
    pub fn derivative(&self, t: f64) -> f64 {
        match &self.derivative {
            Some(d) => d(t),
            None => self.central_difference(t).unwrap_or(f64::NAN),
        }
    }

    /// Central difference with a step kept inside the open domain; None when
    /// no valid step exists.
    fn central_difference(&self, t: f64) -> Option<f64> {
        let mut h = 6.0e-6 * f64::max(t.abs(), 1e-3);
        if self.domain.0.is_finite() {
            h = h.min(0.5 * (t - self.domain.0));
        }
        if self.domain.1.is_finite() {
            h = h.min(0.5 * (self.domain.1 - t));
        }
        if !(h > 0.0) {
            return None;
        }
        Some((self.eval(t + h) - self.eval(t - h)) / (2.0 * h))
    }
}

/// Divided-difference (Loewner) matrix of f at the given nodes: entry (i,j)
/// is (f(x_i) − f(x_j))/(x_i − x_j), diagonal f′(x_i); returned as a kernel
/// over points labeled by the node values.
///
/// When an analytic derivative is attached it is cross-checked against a
/// central difference at every node, guarding mismatched (f, f′) pairs.
pub fn loewner_matrix(f: &ScalarFunction, nodes: &[f64]) -> Result<Kernel> {
    for &x in nodes {
        if !f.contains(x) {
            return Err(Error::DomainViolation {
                value: x,
                lo: f.domain.0,
                hi: f.domain.1,
            });
        }
    }
    let n = nodes.len();
    for i in 0..n {
        for j in (i + 1)..n {
            if (nodes[i] - nodes[j]).abs() <= 1e-12 {
                return Err(Error::NodesCollide { i, j });
            }
        }
    }
    if f.has_analytic_derivative() {
        for &x in nodes {
            if let Some(numeric) = f.central_difference(x) {
                let analytic = f.derivative(x);
                let diff = (analytic - numeric).abs();
                if diff > 1e-6 * f64::max(1.0, analytic.abs()) {
                    return Err(Error::DerivativeMismatch { x, diff });
                }
            }
        }
    }
    let values = ComplexMatrix::from_fn(n, n, |i, j| {
        let v = if i == j {
            f.derivative(nodes[i])
        } else {
            (f.eval(nodes[i]) - f.eval(nodes[j])) / (nodes[i] - nodes[j])
        };
        Complex64::new(v, 0.0)
    });
    let space = WeightedPointSet::new(
        nodes
            .iter()
            .enumerate()
            .map(|(i, x)| format!("x{}={}", i + 1, x))
            .collect(),
        vec![1.0; n],
    )?;
    Kernel::new(space, values)
}

/// Verdict of the finite Loewner test over several node sets.
#[derive(Clone, Debug)]
pub struct MonotoneReport {
    /// PSD verdict of the Loewner matrix per node set, input order.
    pub verdicts: Vec<PsdVerdict>,
    /// True iff every set passed — the finite-sample proxy for operator
    /// monotonicity.
    pub all_pass: bool,
    /// Size of the largest node set that passed (strongest evidence).
    pub largest_passing: Option<usize>,
    /// Index of the first failing node set, if any.
    pub first_failure: Option<usize>,
}

/// Loewner positivity across node sets; the aggregate verdict is the
/// finite-sample proxy for operator monotonicity on the domain.
pub fn operator_monotone_test(
    f: &ScalarFunction,
    node_sets: &[Vec<f64>],
    tol: f64,
) -> Result<MonotoneReport> {
    let mut verdicts = Vec::with_capacity(node_sets.len());
    let mut largest_passing = None;
    let mut first_failure = None;
    for (k, nodes) in node_sets.iter().enumerate() {
        let kernel = loewner_matrix(f, nodes).map_err(|e| e.at_level(k))?;
        let verdict = psd_check(&kernel.values, tol).map_err(|e| e.at_level(k))?;
        if verdict.is_psd {
            let best = largest_passing.get_or_insert(0usize);
            *best = (*best).max(nodes.len());
        } else if first_failure.is_none() {
            first_failure = Some(k);
        }
        verdicts.push(verdict);
    }
    Ok(MonotoneReport {
        all_pass: first_failure.is_none(),
        verdicts,
        largest_passing,
        first_failure,
    })
}

/// Result of the sampling oracle for operator monotonicity.
#[derive(Clone, Debug)]
pub struct OracleReport {
    pub trials: usize,
    pub violations: usize,
    /// True iff no violation was observed.
    pub monotone: bool,
    /// First violating pair (A, B) with A ≼ B but f(A) ⋠ f(B).
    pub counterexample: Option<(ComplexMatrix, ComplexMatrix)>,
    /// Most negative min-eigenvalue of f(B) − f(A) observed (0 if none).
    pub worst_gap: f64,
}

/// Independent sampling oracle: draws pairs A ≼ B with spectra inside the
/// function's domain and checks f(A) ≼ f(B) at tolerance 1e-8. dim ≤ 6.
pub fn monotonicity_oracle(
    f: &ScalarFunction,
    dim: usize,
    trials: usize,
    seed: u64,
) -> Result<OracleReport> {
    if dim == 0 || dim > 6 {
        return Err(Error::Input(format!("oracle dimension must be 1..=6, got {}", dim)));
    }
    // Work window inside the open domain.
    let lo = if f.domain.0.is_finite() { f.domain.0 } else { 0.0 };
    let scale = if f.domain.1.is_finite() {
        (f.domain.1 - lo) / 20.0
    } else {
        1.0
    };
    let win_lo = lo + 0.1 * scale;
    let span = 9.9 * scale;

    let mut rng = sample::rng(seed);
    let mut violations = 0usize;
    let mut counterexample = None;
    let mut worst_gap = 0.0f64;
    for _ in 0..trials {
        let h = sample::hermitian(&mut rng, dim);
        let eig = herm_eig(&h)?;
        let (emin, emax) = (eig.values[0], eig.values[dim - 1]);
        let a = if emax - emin > 1e-9 {
            let alpha = 0.6 * span / (emax - emin);
            ComplexMatrix::from_fn(dim, dim, |i, j| {
                let base = h.get(i, j) * alpha;
                if i == j {
                    base + Complex64::new(win_lo - alpha * emin, 0.0)
                } else {
                    base
                }
            })
        } else {
            ComplexMatrix::identity(dim).scale(Complex64::new(win_lo + 0.3 * span, 0.0))
        };
        let g = sample::matrix(&mut rng, dim, dim);
        let p = g.mul(&g.adjoint());
        let pnorm = op_norm(&p)?;
        if pnorm <= 1e-12 {
            continue;
        }
        let s = 0.4 * span * rng.gen::<f64>() / pnorm;
        let b = a.add(&p.scale(Complex64::new(s, 0.0)));

        let fa = mat_fn(&a, &|t| f.eval(t), f.domain)?;
        let fb = mat_fn(&b, &|t| f.eval(t), f.domain)?;
        let diff = fb.sub(&fa);
        let verdict = psd_check(&diff, 1e-8)?;
        if !verdict.is_psd {
            violations += 1;
            worst_gap = worst_gap.min(verdict.min_eigenvalue);
            if counterexample.is_none() {
                counterexample = Some((a, b));
            }
        }
    }
    Ok(OracleReport {
        trials,
        violations,
        monotone: violations == 0,
        counterexample,
        worst_gap,
    })
}

/// Finite group given by a Cayley table; the axioms are verified
/// exhaustively at construction.
#[derive(Clone, Debug)]
pub struct FiniteGroup {
    pub order: usize,
    /// cayley[a][b] = a·b.
    pub cayley: Vec<Vec<usize>>,
    pub labels: Vec<String>,
    pub identity: usize,
    pub inverses: Vec<usize>,
}

impl FiniteGroup {
    pub fn from_table(cayley: Vec<Vec<usize>>, labels: Option<Vec<String>>) -> Result<Self> {
        let n = cayley.len();
        if n == 0 {
            return Err(Error::InvalidGroup("empty table".into()));
        }
        for (i, row) in cayley.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidGroup(format!(
                    "row {} has length {}, expected {}",
                    i,
                    row.len(),
                    n
                )));
            }
            for (j, &v) in row.iter().enumerate() {
                if v >= n {
                    return Err(Error::InvalidGroup(format!(
                        "entry ({}, {}) = {} out of range",
                        i, j, v
                    )));
                }
            }
        }
        let identity = (0..n)
            .find(|&e| (0..n).all(|g| cayley[e][g] == g && cayley[g][e] == g))
            .ok_or_else(|| Error::InvalidGroup("no identity element".into()))?;
        let mut inverses = Vec::with_capacity(n);
        for g in 0..n {
            let inv = (0..n)
                .find(|&h| cayley[g][h] == identity && cayley[h][g] == identity)
                .ok_or_else(|| Error::InvalidGroup(format!("element {} has no inverse", g)))?;
            inverses.push(inv);
        }
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if cayley[cayley[a][b]][c] != cayley[a][cayley[b][c]] {
                        return Err(Error::InvalidGroup(format!(
                            "associativity fails at ({}, {}, {})",
                            a, b, c
                        )));
                    }
                }
            }
        }
        let labels = match labels {
            Some(l) => {
                if l.len() != n {
                    return Err(Error::InvalidGroup(format!(
                        "{} labels for {} elements",
                        l.len(),
                        n
                    )));
                }
                for i in 0..n {
                    for j in (i + 1)..n {
                        if l[i] == l[j] {
                            return Err(Error::InvalidGroup(format!(
                                "duplicate label '{}'",
                                l[i]
                            )));
                        }
                    }
                }
                l
            }
            None => (0..n).map(|i| format!("g{}", i)).collect(),
        };
        Ok(FiniteGroup {
            order: n,
            cayley,
            labels,
            identity,
            inverses,
        })
    }

    /// Z_n with elements 0..n−1 under addition.
    pub fn cyclic(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidGroup("cyclic group order must be ≥ 1".into()));
        }
        let cayley = (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect();
        Self::from_table(cayley, Some((0..n).map(|i| i.to_string()).collect()))
    }

    /// Dihedral group of order 2n: rotations r^i, reflections s·r^i.
    pub fn dihedral(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidGroup("dihedral parameter must be ≥ 1".into()));
        }
        let idx = |flip: bool, i: usize| if flip { n + i } else { i };
        let mut cayley = vec![vec![0usize; 2 * n]; 2 * n];
        for a in 0..2 * n {
            let (fa, ia) = (a >= n, a % n);
            for b in 0..2 * n {
                let (fb, ib) = (b >= n, b % n);
                // r^i·r^j = r^{i+j};  r^i·sr^j = sr^{j−i};
                // sr^i·r^j = sr^{i+j};  sr^i·sr^j = r^{j−i}.
                let prod = match (fa, fb) {
                    (false, false) => idx(false, (ia + ib) % n),
                    (false, true) => idx(true, (ib + n - ia) % n),
                    (true, false) => idx(true, (ia + ib) % n),
                    (true, true) => idx(false, (ib + n - ia) % n),
                };
                cayley[a][b] = prod;
            }
        }
        let labels = (0..n)
            .map(|i| format!("r{}", i))
            .chain((0..n).map(|i| format!("sr{}", i)))
            .collect();
        Self::from_table(cayley, Some(labels))
    }

    /// Direct product; element (a, b) has index a·|H| + b.
    pub fn direct_product(&self, other: &FiniteGroup) -> Result<Self> {
        let m = other.order;
        let n = self.order * m;
        let mut cayley = vec![vec![0usize; n]; n];
        for a1 in 0..self.order {
            for b1 in 0..m {
                for a2 in 0..self.order {
                    for b2 in 0..m {
                        cayley[a1 * m + b1][a2 * m + b2] =
                            self.cayley[a1][a2] * m + other.cayley[b1][b2];
                    }
                }
            }
        }
        let mut labels = Vec::with_capacity(n);
        for a in 0..self.order {
            for b in 0..m {
                labels.push(format!("({},{})", self.labels[a], other.labels[b]));
            }
        }
        Self::from_table(cayley, Some(labels))
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.cayley[a][b]
    }

    pub fn inverse(&self, g: usize) -> usize {
        self.inverses[g]
    }

    pub fn is_abelian(&self) -> bool {
        (0..self.order).all(|a| (0..self.order).all(|b| self.cayley[a][b] == self.cayley[b][a]))
    }
}

/// Group kernel N_f(s, t) = f(s·t⁻¹) over the element list.
pub fn toeplitz_kernel(group: &FiniteGroup, f: &[Complex64]) -> Result<Kernel> {
    let n = group.order;
    if f.len() != n {
        return Err(Error::Shape(format!(
            "{} function values for a group of order {}",
            f.len(),
            n
        )));
    }
    let values = ComplexMatrix::from_fn(n, n, |s, t| f[group.cayley[s][group.inverses[t]]]);
    let space = WeightedPointSet::new(group.labels.clone(), vec![1.0; n])?;
    Kernel::new(space, values)
}

/// Characters of an abelian group, extracted from the left regular
/// representation: a generic Hermitian group-algebra element has simple
/// spectrum, its eigenvectors are the character lines, and χ(g) is the
/// Rayleigh quotient of the shift by g. Each character is verified
/// (unimodular, multiplicative, χ(e)=1) before being returned; the list is
/// sorted descending-lexicographically, putting the trivial character first.
pub fn characters(group: &FiniteGroup) -> Result<Vec<Vec<Complex64>>> {
    if !group.is_abelian() {
        return Err(Error::Input(
            "character decomposition requires an abelian group".into(),
        ));
    }
    let n = group.order;
    'attempt: for attempt in 0..32u64 {
        let mut rng = sample::rng(0x6368 + attempt);
        let mut h = ComplexMatrix::zeros(n, n);
        for g in 0..n {
            let c = Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
            for t in 0..n {
                let row = group.cayley[g][t];
                h.set(row, t, h.get(row, t) + c);
            }
        }
        let h = h.add(&h.adjoint()).scale(Complex64::new(0.5, 0.0));
        let eig = herm_eig(&h)?;
        let span = (eig.values[n - 1] - eig.values[0]).max(1.0);
        if (1..n).any(|k| eig.values[k] - eig.values[k - 1] <= 1e-6 * span) {
            continue;
        }
        let mut chars: Vec<Vec<Complex64>> = Vec::with_capacity(n);
        for k in 0..n {
            let v = eig.vector(k);
            let mut chi = vec![Complex64::new(0.0, 0.0); n];
            for (g, slot) in chi.iter_mut().enumerate() {
                // ⟨v, L_g v⟩ with (L_g v)[g·t] = v[t].
                *slot = (0..n).map(|t| v[group.cayley[g][t]].conj() * v[t]).sum();
            }
            if (chi[group.identity] - Complex64::new(1.0, 0.0)).norm() > 1e-8 {
                continue 'attempt;
            }
            if chi.iter().any(|z| (z.norm() - 1.0).abs() > 1e-8) {
                continue 'attempt;
            }
            for a in 0..n {
                for b in 0..n {
                    if (chi[a] * chi[b] - chi[group.cayley[a][b]]).norm() > 1e-8 {
                        continue 'attempt;
                    }
                }
            }
            chars.push(chi);
        }
        let key = |chi: &[Complex64]| -> Vec<(i64, i64)> {
            chi.iter()
                .map(|z| ((z.re * 1e6).round() as i64, (z.im * 1e6).round() as i64))
                .collect()
        };
        chars.sort_by(|a, b| key(b).cmp(&key(a)));
        return Ok(chars);
    }
    Err(Error::Input(
        "character extraction failed (no generic spectrum found)".into(),
    ))
}

/// Positivity report for a group kernel.
#[derive(Clone, Debug)]
pub struct ToeplitzReport {
    pub verdict: PsdVerdict,
    /// Character table (abelian groups only), trivial character first.
    pub characters: Option<Vec<Vec<Complex64>>>,
    /// Unnormalized coefficients c_χ = Σ_g f(g)·conj(χ(g)), aligned with
    /// `characters`; these are exactly the eigenvalues of N_f, so
    /// nonnegativity of all of them is the Bochner-style dual verdict.
    pub coefficients: Option<Vec<Complex64>>,
}

/// PSD verdict for N_f; for abelian groups also the character coefficients,
/// whose nonnegativity is an independent equivalent check.
pub fn toeplitz_positive_check(
    group: &FiniteGroup,
    f: &[Complex64],
    tol: f64,
) -> Result<ToeplitzReport> {
    let kernel = toeplitz_kernel(group, f)?;
    let verdict = psd_check(&kernel.values, tol)?;
    let (chars, coeffs) = if group.is_abelian() {
        let chars = characters(group)?;
        let coeffs = chars
            .iter()
            .map(|chi| f.iter().zip(chi).map(|(fv, cv)| fv * cv.conj()).sum())
            .collect();
        (Some(chars), Some(coeffs))
    } else {
        (None, None)
    };
    Ok(ToeplitzReport {
        verdict,
        characters: chars,
        coefficients: coeffs,
    })
}

/// Laguerre polynomials (L_{n−1}(x), L_n(x)) as mantissas with a shared log
/// scale: true value = mantissa·e^{log_scale}. Rescaling keeps the recurrence
/// inside f64 range for any n ≤ 150.
fn laguerre_pair(n: usize, x: f64) -> (f64, f64, f64) {
    let mut prev = 1.0f64; // L_0
    let mut cur = 1.0 - x; // L_1
    let mut log_scale = 0.0f64;
    if n == 0 {
        return (0.0, prev, 0.0);
    }
    for k in 1..n {
        let next = ((2 * k + 1) as f64 - x) * cur - (k as f64) * prev;
        prev = cur;
        cur = next / (k as f64 + 1.0);
        let mag = cur.abs().max(prev.abs());
        if mag > 1e200 {
            prev /= 1e200;
            cur /= 1e200;
            log_scale += 200.0 * std::f64::consts::LN_10;
        }
    }
    (prev, cur, log_scale)
}

/// Gauss–Laguerre rule in log form: nodes s_q and ln(w_q). Nodes come from
/// the Jacobi matrix refined by Newton steps on L_n; weights use the closed
/// form w_q = s_q / ((n+1)²·L_{n+1}(s_q)²), evaluated in logs so the tiny
/// tail weights keep full relative accuracy (the eigenvector-squared route
/// floors at absolute machine precision and corrupts them).
pub fn gauss_laguerre_log(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if n == 0 || n > 150 {
        return Err(Error::Input(format!(
            "quadrature size must be 1..=150, got {}",
            n
        )));
    }
    let jacobi = ComplexMatrix::from_fn(n, n, |i, j| {
        let v = if i == j {
            (2 * i + 1) as f64
        } else if j + 1 == i || i + 1 == j {
            i.max(j) as f64
        } else {
            0.0
        };
        Complex64::new(v, 0.0)
    });
    let eig = herm_eig(&jacobi)?;
    let mut nodes = eig.values.clone();
    let mut log_weights = Vec::with_capacity(n);
    for x in nodes.iter_mut() {
        for _ in 0..3 {
            let (lm1, l, _) = laguerre_pair(n, *x);
            // L_n′(x) = n(L_n − L_{n−1})/x; both mantissas share one scale.
            let deriv = n as f64 * (l - lm1) / *x;
            if deriv.abs() < 1e-300 {
                break;
            }
            let step = l / deriv;
            if !step.is_finite() {
                break;
            }
            *x -= step;
        }
        let (_, lnp1, log_scale) = laguerre_pair(n + 1, *x);
        let ln_l = lnp1.abs().ln() + log_scale;
        log_weights.push(x.ln() - 2.0 * ((n + 1) as f64).ln() - 2.0 * ln_l);
    }
    Ok((nodes, log_weights))
}

/// Gauss–Laguerre nodes and weights for ∫₀^∞ e^{−t}h(t)dt ≈ Σ w_q h(s_q).
/// Tail weights below f64 range underflow to 0; use `gauss_laguerre_log`
/// when the weights enter products with large exponentials.
pub fn gauss_laguerre(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let (nodes, log_weights) = gauss_laguerre_log(n)?;
    let weights = log_weights.iter().map(|lw| lw.exp()).collect();
    Ok((nodes, weights))
}

/// Cauchy kernel 1/(x+y) with two Gram representations.
#[derive(Clone, Debug)]
pub struct CauchyKernel {
    /// Exact kernel values over points labeled by the nodes.
    pub kernel: Kernel,
    /// Minimal representation from pivoted Cholesky (exact to roundoff).
    pub exact: GramRep,
    /// Quadrature representation a(x)_q ≈ weighted samples of s ↦ e^{−sx}.
    pub quadrature: GramRep,
    /// Max entrywise deviation of the quadrature Gram from the kernel.
    pub quadrature_error: f64,
}

/// Cauchy kernel at strictly positive nodes, with the exact Cholesky rep and
/// a Gauss–Laguerre quadrature rep of the integral representation
/// 1/(x+y) = ∫₀^∞ e^{−sx}·e^{−sy} ds.
pub fn cauchy_kernel(nodes: &[f64], quad_points: usize) -> Result<CauchyKernel> {
    if nodes.is_empty() {
        return Err(Error::Input("no nodes given".into()));
    }
    for &x in nodes {
        if !(x > 0.0) {
            return Err(Error::NonPositiveNode { value: x });
        }
    }
    let n = nodes.len();
    let values = ComplexMatrix::from_fn(n, n, |i, j| {
        Complex64::new(1.0 / (nodes[i] + nodes[j]), 0.0)
    });
    let space = WeightedPointSet::new(
        nodes
            .iter()
            .enumerate()
            .map(|(i, x)| format!("x{}={}", i + 1, x))
            .collect(),
        vec![1.0; n],
    )?;
    let kernel = Kernel::new(space.clone(), values)?;
    let exact = representing_vectors(&kernel, 1e-9)?;

    let (s, lw) = gauss_laguerre_log(quad_points)?;
    // Substituting s = σv matches the quadrature's unit decay rate to the
    // geometric mean of x+y over the node range.
    let cmin = 2.0 * nodes.iter().cloned().fold(f64::INFINITY, f64::min);
    let cmax = 2.0 * nodes.iter().cloned().fold(0.0, f64::max);
    let sigma = (cmin * cmax).sqrt() / 1.1;
    let vectors: Vec<Vec<Complex64>> = nodes
        .iter()
        .map(|&x| {
            (0..quad_points)
                .map(|q| {
                    // √(w_q·e^{s_q}/σ)·e^{−s_q x/σ}, assembled in logs.
                    let ln_amp = 0.5 * (lw[q] + s[q] - sigma.ln()) - s[q] * x / sigma;
                    Complex64::new(ln_amp.exp(), 0.0)
                })
                .collect()
        })
        .collect();
    let quadrature = GramRep::new(space, quad_points, vectors)?;
    let quadrature_error = quadrature.gram().sub(&kernel.values).norm_max();
    Ok(CauchyKernel {
        kernel,
        exact,
        quadrature,
        quadrature_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn loewner_identity_all_ones() {
        let k = loewner_matrix(&ScalarFunction::identity(), &[1.0, 2.0, 3.0]).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert!((k.values.get(i, j) - c(1.0, 0.0)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn loewner_square_pinned() {
        let k = loewner_matrix(&ScalarFunction::square(), &[1.0, 2.0]).unwrap();
        let want = ComplexMatrix::from_real_rows(&[&[2.0, 3.0], &[3.0, 4.0]]);
        assert!(k.values.sub(&want).norm_fro() < 1e-12);
        let det = (k.values.get(0, 0) * k.values.get(1, 1) - k.values.get(0, 1) * k.values.get(1, 0)).re;
        assert!((det + 1.0).abs() < 1e-12);
        let verdict = psd_check(&k.values, 1e-9).unwrap();
        assert!(!verdict.is_psd);
        assert!(verdict.witness.is_some());
    }

    #[test]
    fn loewner_sqrt_pinned_is_cauchy() {
        let k = loewner_matrix(&ScalarFunction::sqrt(), &[1.0, 4.0]).unwrap();
        let want = ComplexMatrix::from_real_rows(&[
            &[0.5, 1.0 / 3.0],
            &[1.0 / 3.0, 0.25],
        ]);
        assert!(k.values.sub(&want).norm_fro() < 1e-12);
        assert!(psd_check(&k.values, 1e-9).unwrap().is_psd);

        // The same matrix is the Cauchy kernel at (1, 2).
        let cauchy = cauchy_kernel(&[1.0, 2.0], 10).unwrap();
        assert!(k.values.sub(&cauchy.kernel.values).norm_fro() < 1e-12);
    }

    #[test]
    fn loewner_sqrt_at_squared_nodes_matches_cauchy() {
        let mut rng = sample::rng(60);
        let xs = sample::nodes(&mut rng, 6, 0.3, 5.0);
        let squared: Vec<f64> = xs.iter().map(|x| x * x).collect();
        let k = loewner_matrix(&ScalarFunction::sqrt(), &squared).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                let want = 1.0 / (xs[i] + xs[j]);
                assert!((k.values.get(i, j).re - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn loewner_rejects_bad_inputs() {
        match loewner_matrix(&ScalarFunction::identity(), &[1.0, 1.0 + 1e-13]) {
            Err(Error::NodesCollide { i: 0, j: 1 }) => {}
            other => panic!("{:?}", other.map(|_| ())),
        }
        match loewner_matrix(&ScalarFunction::sqrt(), &[1.0, -1.0]) {
            Err(Error::DomainViolation { .. }) => {}
            other => panic!("{:?}", other.map(|_| ())),
        }
        let mismatched = ScalarFunction::custom(
            "bad",
            (f64::NEG_INFINITY, f64::INFINITY),
            Arc::new(|t: f64| t * t),
            Some(Arc::new(|t: f64| 3.0 * t)),
        );
        match loewner_matrix(&mismatched, &[1.0, 2.0]) {
            Err(Error::DerivativeMismatch { .. }) => {}
            other => panic!("{:?}", other.map(|_| ())),
        }
    }

    #[test]
    fn monotone_test_sqrt_random_sets() {
        let mut rng = sample::rng(61);
        let sets: Vec<Vec<f64>> = (0..50)
            .map(|k| sample::nodes(&mut rng, 2 + k % 5, 0.01, 10.0))
            .collect();
        let report = operator_monotone_test(&ScalarFunction::sqrt(), &sets, 1e-9).unwrap();
        assert!(report.all_pass);
        assert_eq!(report.largest_passing, Some(6));
        assert!(report.first_failure.is_none());
    }

    #[test]
    fn monotone_test_square_fails_every_pair() {
        let mut rng = sample::rng(62);
        let sets: Vec<Vec<f64>> = (0..20).map(|_| sample::nodes(&mut rng, 2, 0.1, 10.0)).collect();
        let report = operator_monotone_test(&ScalarFunction::square(), &sets, 1e-9).unwrap();
        assert!(!report.all_pass);
        assert_eq!(report.first_failure, Some(0));
        for (set, verdict) in sets.iter().zip(&report.verdicts) {
            assert!(!verdict.is_psd);
            // det = −(x₁−x₂)² exactly.
            let k = loewner_matrix(&ScalarFunction::square(), set).unwrap();
            let det =
                (k.values.get(0, 0) * k.values.get(1, 1) - k.values.get(0, 1) * k.values.get(1, 0)).re;
            let want = -(set[0] - set[1]) * (set[0] - set[1]);
            assert!((det - want).abs() < 1e-9 * want.abs().max(1.0));
        }
    }

    #[test]
    fn monotone_test_affine_passes() {
        let mut rng = sample::rng(63);
        let sets: Vec<Vec<f64>> = (0..10)
            .map(|k| sample::nodes(&mut rng, 2 + k % 4, -5.0, 5.0))
            .collect();
        let report =
            operator_monotone_test(&ScalarFunction::affine(3.0, 2.0), &sets, 1e-9).unwrap();
        assert!(report.all_pass);
    }

    #[test]
    fn oracle_monotone_functions_pass() {
        for f in [ScalarFunction::sqrt(), ScalarFunction::identity()] {
            let report = monotonicity_oracle(&f, 3, 200, 0).unwrap();
            assert!(report.monotone, "{} flagged {} violations", f.name, report.violations);
            assert!(report.counterexample.is_none());
        }
    }

    #[test]
    fn oracle_square_and_exp_fail() {
        for f in [ScalarFunction::square(), ScalarFunction::exp()] {
            let report = monotonicity_oracle(&f, 2, 200, 0).unwrap();
            assert!(report.violations > 0, "{} not caught", f.name);
            let (a, b) = report.counterexample.clone().unwrap();
            // The pair really is ordered…
            assert!(psd_check(&b.sub(&a), 1e-9).unwrap().is_psd);
            // …and the images are not.
            let fa = mat_fn(&a, &|t| f.eval(t), f.domain).unwrap();
            let fb = mat_fn(&b, &|t| f.eval(t), f.domain).unwrap();
            assert!(!psd_check(&fb.sub(&fa), 1e-8).unwrap().is_psd);
            assert!(report.worst_gap < 0.0);
        }
    }

    #[test]
    fn group_constructions() {
        let z6 = FiniteGroup::cyclic(6).unwrap();
        assert!(z6.is_abelian());
        assert_eq!(z6.identity, 0);
        assert_eq!(z6.inverse(2), 4);

        let d3 = FiniteGroup::dihedral(3).unwrap();
        assert_eq!(d3.order, 6);
        assert!(!d3.is_abelian());
        // Reflections are involutions.
        for i in 3..6 {
            assert_eq!(d3.inverse(i), i);
        }

        let klein = FiniteGroup::cyclic(2)
            .unwrap()
            .direct_product(&FiniteGroup::cyclic(2).unwrap())
            .unwrap();
        assert_eq!(klein.order, 4);
        assert!(klein.is_abelian());
        for g in 0..4 {
            assert_eq!(klein.inverse(g), g);
        }
    }

    #[test]
    fn group_rejects_bad_tables() {
        match FiniteGroup::from_table(vec![vec![0, 1], vec![1, 1]], None) {
            Err(Error::InvalidGroup(msg)) => assert!(msg.contains("inverse"), "{}", msg),
            other => panic!("{:?}", other.map(|_| ())),
        }
        match FiniteGroup::from_table(vec![vec![0, 0], vec![0, 0]], None) {
            Err(Error::InvalidGroup(msg)) => assert!(msg.contains("identity"), "{}", msg),
            other => panic!("{:?}", other.map(|_| ())),
        }
        match FiniteGroup::from_table(vec![vec![0, 2], vec![1, 0]], None) {
            Err(Error::InvalidGroup(msg)) => assert!(msg.contains("range"), "{}", msg),
            other => panic!("{:?}", other.map(|_| ())),
        }
    }

    #[test]
    fn toeplitz_kernel_examples() {
        let d3 = FiniteGroup::dihedral(3).unwrap();
        let mut delta = vec![c(0.0, 0.0); 6];
        delta[d3.identity] = c(1.0, 0.0);
        let k = toeplitz_kernel(&d3, &delta).unwrap();
        assert!(k.values.sub(&ComplexMatrix::identity(6)).norm_fro() < 1e-15);

        let z2 = FiniteGroup::cyclic(2).unwrap();
        let ones = toeplitz_kernel(&z2, &[c(1.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert!(ones
            .values
            .sub(&ComplexMatrix::from_fn(2, 2, |_, _| c(1.0, 0.0)))
            .norm_fro()
            < 1e-15);

        let k12 = toeplitz_kernel(&z2, &[c(1.0, 0.0), c(2.0, 0.0)]).unwrap();
        let want = ComplexMatrix::from_real_rows(&[&[1.0, 2.0], &[2.0, 1.0]]);
        assert!(k12.values.sub(&want).norm_fro() < 1e-15);
    }

    #[test]
    fn toeplitz_positive_pinned_z2() {
        let z2 = FiniteGroup::cyclic(2).unwrap();
        let rep = toeplitz_positive_check(&z2, &[c(1.0, 0.0), c(1.0, 0.0)], 1e-9).unwrap();
        assert!(rep.verdict.is_psd);
        let coeffs = rep.coefficients.unwrap();
        assert!((coeffs[0] - c(2.0, 0.0)).norm() < 1e-9);
        assert!(coeffs[1].norm() < 1e-9);

        let rep = toeplitz_positive_check(&z2, &[c(1.0, 0.0), c(2.0, 0.0)], 1e-9).unwrap();
        assert!(!rep.verdict.is_psd);
        let coeffs = rep.coefficients.unwrap();
        assert!((coeffs[0] - c(3.0, 0.0)).norm() < 1e-9);
        assert!((coeffs[1] - c(-1.0, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn characters_are_sorted_and_verified() {
        let z4 = FiniteGroup::cyclic(4).unwrap();
        let chars = characters(&z4).unwrap();
        assert_eq!(chars.len(), 4);
        // Trivial character first.
        for v in &chars[0] {
            assert!((v - c(1.0, 0.0)).norm() < 1e-9);
        }
        // Orthogonality: ⟨χ_a, χ_b⟩ = |G|δ_ab.
        for a in 0..4 {
            for b in 0..4 {
                let ip: Complex64 = chars[a]
                    .iter()
                    .zip(&chars[b])
                    .map(|(x, y)| x.conj() * y)
                    .sum();
                let want = if a == b { 4.0 } else { 0.0 };
                assert!((ip - c(want, 0.0)).norm() < 1e-8);
            }
        }
    }

    #[test]
    fn toeplitz_nonabelian_gets_verdict_only() {
        let d3 = FiniteGroup::dihedral(3).unwrap();
        let mut delta = vec![c(0.0, 0.0); 6];
        delta[d3.identity] = c(1.0, 0.0);
        let rep = toeplitz_positive_check(&d3, &delta, 1e-9).unwrap();
        assert!(rep.verdict.is_psd);
        assert!(rep.coefficients.is_none());
    }

    fn random_symmetric_f(
        rng: &mut rand_chacha::ChaCha8Rng,
        group: &FiniteGroup,
    ) -> Vec<Complex64> {
        let n = group.order;
        let mut f = vec![c(0.0, 0.0); n];
        let mut done = vec![false; n];
        for g in 0..n {
            if done[g] {
                continue;
            }
            let ginv = group.inverse(g);
            if ginv == g {
                f[g] = c(2.0 * rng.gen::<f64>() - 1.0, 0.0);
            } else {
                let z = c(2.0 * rng.gen::<f64>() - 1.0, 2.0 * rng.gen::<f64>() - 1.0);
                f[g] = z;
                f[ginv] = z.conj();
                done[ginv] = true;
            }
            done[g] = true;
        }
        f
    }

    #[test]
    fn bochner_agreement_small_groups() {
        let groups = vec![
            FiniteGroup::cyclic(3).unwrap(),
            FiniteGroup::cyclic(4).unwrap(),
            FiniteGroup::cyclic(6).unwrap(),
            FiniteGroup::cyclic(2)
                .unwrap()
                .direct_product(&FiniteGroup::cyclic(2).unwrap())
                .unwrap(),
        ];
        let mut rng = sample::rng(64);
        for g in &groups {
            for _ in 0..50 {
                let f = random_symmetric_f(&mut rng, g);
                let rep = toeplitz_positive_check(g, &f, 1e-9).unwrap();
                let coeffs = rep.coefficients.unwrap();
                let min = coeffs.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
                let scale = coeffs
                    .iter()
                    .map(|z| z.norm())
                    .fold(1.0, f64::max);
                assert_eq!(rep.verdict.is_psd, min >= -1e-9 * scale, "order {}", g.order);
                // Coefficients are the exact eigenvalues of N_f.
                let eig = herm_eig(&toeplitz_kernel(g, &f).unwrap().values).unwrap();
                let mut sorted: Vec<f64> = coeffs.iter().map(|z| z.re).collect();
                sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
                for (have, want) in eig.values.iter().zip(&sorted) {
                    assert!((have - want).abs() < 1e-8);
                }
            }
        }
    }

    #[test]
    fn gauss_laguerre_pinned_and_moments() {
        let (s, w) = gauss_laguerre(2).unwrap();
        let r2 = 2.0f64.sqrt();
        assert!((s[0] - (2.0 - r2)).abs() < 1e-12);
        assert!((s[1] - (2.0 + r2)).abs() < 1e-12);
        assert!((w[0] - (2.0 + r2) / 4.0).abs() < 1e-12);
        assert!((w[1] - (2.0 - r2) / 4.0).abs() < 1e-12);

        let (s, w) = gauss_laguerre(7).unwrap();
        for (k, want) in [1.0, 1.0, 2.0, 6.0].iter().enumerate() {
            let m: f64 = s.iter().zip(&w).map(|(x, w)| w * x.powi(k as i32)).sum();
            assert!((m - want).abs() < 1e-9, "moment {}", k);
        }
    }

    #[test]
    fn cauchy_pinned_values() {
        let ck = cauchy_kernel(&[1.0, 2.0], 20).unwrap();
        let want = ComplexMatrix::from_real_rows(&[&[0.5, 1.0 / 3.0], &[1.0 / 3.0, 0.25]]);
        assert!(ck.kernel.values.sub(&want).norm_fro() < 1e-14);
        assert!(ck.exact.gram().sub(&want).norm_fro() < 1e-10);

        let single = cauchy_kernel(&[3.0], 40).unwrap();
        assert!((single.kernel.values.get(0, 0).re - 1.0 / 6.0).abs() < 1e-14);
        assert!((single.quadrature.norms_sq()[0] - 1.0 / 6.0).abs() < 1e-6);
        assert!((single.exact.norms_sq()[0] - 1.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn cauchy_quadrature_windows() {
        // Log-spaced nodes across [0.1, 10].
        let nodes: Vec<f64> = (0..8)
            .map(|i| 0.1 * 100.0f64.powf(i as f64 / 7.0))
            .collect();
        let ck = cauchy_kernel(&nodes, 40).unwrap();
        assert!(ck.quadrature_error <= 1e-6, "error {}", ck.quadrature_error);
        assert!(psd_check(&ck.kernel.values, 1e-9).unwrap().is_psd);

        let nodes: Vec<f64> = (0..6).map(|i| 0.5 + 3.5 * i as f64 / 5.0).collect();
        let ck = cauchy_kernel(&nodes, 40).unwrap();
        assert!(ck.quadrature_error <= 1e-6, "error {}", ck.quadrature_error);
    }

    #[test]
    fn cauchy_rejects_bad_inputs() {
        match cauchy_kernel(&[1.0, -2.0], 10) {
            Err(Error::NonPositiveNode { value }) => assert_eq!(value, -2.0),
            other => panic!("{:?}", other.map(|_| ())),
        }
        match cauchy_kernel(&[0.0], 10) {
            Err(Error::NonPositiveNode { .. }) => {}
            other => panic!("{:?}", other.map(|_| ())),
        }
        assert!(matches!(cauchy_kernel(&[1.0], 0), Err(Error::Input(_))));
        assert!(matches!(cauchy_kernel(&[1.0], 200), Err(Error::Input(_))));
        assert!(matches!(cauchy_kernel(&[], 10), Err(Error::Input(_))));
    }

    #[test]
    fn parse_and_battery() {
        assert_eq!(ScalarFunction::parse("sqrt").unwrap().name, "sqrt");
        let p = ScalarFunction::parse("pow:0.5").unwrap();
        assert!((p.eval(4.0) - 2.0).abs() < 1e-12);
        assert!(ScalarFunction::parse("nope").is_err());
        assert!(ScalarFunction::parse("pow:x").is_err());
        assert!(ScalarFunction::power(-1.0).is_err());

        let battery = ScalarFunction::battery();
        assert_eq!(battery.len(), 7);
        assert_eq!(battery.iter().filter(|(_, m)| *m).count(), 5);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn affine_loewner_always_psd(seed in 0u64..10_000, alpha in 0.0f64..5.0, n in 2usize..6) {
            let mut rng = sample::rng(seed);
            let nodes = sample::nodes(&mut rng, n, -3.0, 3.0);
            let k = loewner_matrix(&ScalarFunction::affine(alpha, 1.0), &nodes).unwrap();
            prop_assert!(psd_check(&k.values, 1e-9).unwrap().is_psd);
        }

        #[test]
        fn constant_f_gives_rank_one(seed in 0u64..10_000, order in 2usize..8, scale in 0.1f64..5.0) {
            let _ = seed;
            let g = FiniteGroup::cyclic(order).unwrap();
            let f = vec![Complex64::new(scale, 0.0); order];
            let k = toeplitz_kernel(&g, &f).unwrap();
            let verdict = psd_check(&k.values, 1e-9).unwrap();
            prop_assert!(verdict.is_psd);
            prop_assert_eq!(verdict.factor.unwrap().rank, 1);
        }
    }
}
