//! JSON wire formats shared by the command-line front end, the examples,
//! and round-trip verification.
//!
//! One convention everywhere: complex numbers are `[re, im]` pairs and
//! matrices are row-major entry lists.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::alg::VNAlg;
use crate::cpmap::{KrausFamily, SuperOp};
use crate::error::{Error, Result};
use crate::kernels::FiniteGroup;
use crate::mat::ComplexMatrix;
use crate::schur::{Kernel, WeightedPointSet};

/// A complex number on the wire.
pub type ComplexPair = [f64; 2];

pub fn to_pair(z: Complex64) -> ComplexPair {
    [z.re, z.im]
}

pub fn from_pair(p: ComplexPair) -> Complex64 {
    Complex64::new(p[0], p[1])
}

pub fn vec_to_pairs(v: &[Complex64]) -> Vec<ComplexPair> {
    v.iter().map(|&z| to_pair(z)).collect()
}

pub fn pairs_to_vec(p: &[ComplexPair]) -> Vec<Complex64> {
    p.iter().map(|&q| from_pair(q)).collect()
}

/// Matrix wire format: `{"rows": r, "cols": c, "entries": [[re,im],…]}`,
/// entries row-major of length r·c.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<ComplexPair>,
}

impl MatrixJson {
    pub fn from_matrix(a: &ComplexMatrix) -> Self {
        let mut entries = Vec::with_capacity(a.rows() * a.cols());
        for i in 0..a.rows() {
            for j in 0..a.cols() {
                entries.push(to_pair(a.get(i, j)));
            }
        }
        MatrixJson {
            rows: a.rows(),
            cols: a.cols(),
            entries,
        }
    }

    pub fn to_matrix(&self) -> Result<ComplexMatrix> {
        ComplexMatrix::from_vec(self.rows, self.cols, pairs_to_vec(&self.entries))
    }
}

/// Serde-value view of a matrix, for report artifacts.
pub fn matrix_value(a: &ComplexMatrix) -> Value {
    serde_json::to_value(MatrixJson::from_matrix(a)).expect("matrix serializes")
}

/// Serde-value view of a complex vector list (e.g. Gram representing
/// vectors), for report artifacts.
pub fn vectors_value(vs: &[Vec<Complex64>]) -> Value {
    let wire: Vec<Vec<ComplexPair>> = vs.iter().map(|v| vec_to_pairs(v)).collect();
    serde_json::to_value(wire).expect("vectors serialize")
}

/// Parse a matrix back out of a report artifact value.
pub fn matrix_from_value(v: &Value) -> Result<ComplexMatrix> {
    let mj: MatrixJson = serde_json::from_value(v.clone())
        .map_err(|e| Error::Input(format!("artifact is not a matrix: {}", e)))?;
    mj.to_matrix()
}

/// Parse a list of complex vectors out of a report artifact value.
pub fn vectors_from_value(v: &Value) -> Result<Vec<Vec<Complex64>>> {
    let wire: Vec<Vec<ComplexPair>> = serde_json::from_value(v.clone())
        .map_err(|e| Error::Input(format!("artifact is not a vector list: {}", e)))?;
    Ok(wire.iter().map(|p| pairs_to_vec(p)).collect())
}

/// Parse a list of matrices out of a report artifact value.
pub fn matrices_from_value(v: &Value) -> Result<Vec<ComplexMatrix>> {
    let wire: Vec<MatrixJson> = serde_json::from_value(v.clone())
        .map_err(|e| Error::Input(format!("artifact is not a matrix list: {}", e)))?;
    wire.iter().map(|m| m.to_matrix()).collect()
}

pub fn matrices_value(ms: &[ComplexMatrix]) -> Value {
    let wire: Vec<MatrixJson> = ms.iter().map(MatrixJson::from_matrix).collect();
    serde_json::to_value(wire).expect("matrices serialize")
}

/// Kernel wire format: labels and weights are optional (defaulting to a
/// uniform point set); values are flat row-major pairs.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KernelJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    pub values: Vec<ComplexPair>,
}

impl KernelJson {
    pub fn from_kernel(k: &Kernel) -> Self {
        let n = k.space.size();
        let mut values = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                values.push(to_pair(k.values.get(i, j)));
            }
        }
        KernelJson {
            labels: Some(k.space.labels.clone()),
            weights: Some(k.space.weights.clone()),
            values,
        }
    }

    pub fn to_kernel(&self) -> Result<Kernel> {
        let n = match &self.labels {
            Some(l) => l.len(),
            None => {
                let cells = self.values.len();
                let n = (cells as f64).sqrt().round() as usize;
                if n * n != cells {
                    return Err(Error::Input(format!(
                        "kernel has {} values, not a square count",
                        cells
                    )));
                }
                n
            }
        };
        if self.values.len() != n * n {
            return Err(Error::Shape(format!(
                "kernel has {} values for {} points",
                self.values.len(),
                n
            )));
        }
        let space = match (&self.labels, &self.weights) {
            (Some(l), Some(w)) => WeightedPointSet::new(l.clone(), w.clone())?,
            (Some(l), None) => WeightedPointSet::new(l.clone(), vec![1.0; n])?,
            (None, Some(w)) => {
                WeightedPointSet::new((1..=n).map(|i| format!("x{}", i)).collect(), w.clone())?
            }
            (None, None) => WeightedPointSet::uniform(n),
        };
        let values = ComplexMatrix::from_vec(n, n, pairs_to_vec(&self.values))?;
        Kernel::new(space, values)
    }
}

/// Group wire format mirroring the library's Cayley-table constructor.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GroupJson {
    pub order: usize,
    pub cayley: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

impl GroupJson {
    pub fn from_group(g: &FiniteGroup) -> Self {
        GroupJson {
            order: g.order,
            cayley: g.cayley.clone(),
            labels: Some(g.labels.clone()),
        }
    }

    pub fn to_group(&self) -> Result<FiniteGroup> {
        if self.cayley.len() != self.order {
            return Err(Error::InvalidGroup(format!(
                "declared order {} but table has {} rows",
                self.order,
                self.cayley.len()
            )));
        }
        FiniteGroup::from_table(self.cayley.clone(), self.labels.clone())
    }
}

/// Algebra wire format: explicit basis.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AlgebraJson {
    pub dim: usize,
    pub basis: Vec<MatrixJson>,
}

impl AlgebraJson {
    pub fn from_algebra(a: &VNAlg) -> Self {
        AlgebraJson {
            dim: a.dim,
            basis: a.basis.iter().map(MatrixJson::from_matrix).collect(),
        }
    }
}

/// Algebra specification: either a name (`"full:3"`, `"diag:4"`,
/// `"scalars:2"`, `"blocks:1,2"`) or an explicit basis.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AlgebraSpec {
    Named(String),
    Explicit(AlgebraJson),
}

impl AlgebraSpec {
    pub fn resolve(&self, tol: f64) -> Result<VNAlg> {
        match self {
            AlgebraSpec::Named(name) => parse_algebra_name(name),
            AlgebraSpec::Explicit(a) => {
                let basis = a
                    .basis
                    .iter()
                    .map(|m| m.to_matrix())
                    .collect::<Result<Vec<_>>>()?;
                VNAlg::new(a.dim, basis, tol.max(1e-8))
            }
        }
    }
}

/// Parse `full:n`, `diag:n` / `diagonal:n`, `scalars:n`, `blocks:1,2,…`.
pub fn parse_algebra_name(name: &str) -> Result<VNAlg> {
    let (kind, arg) = name
        .split_once(':')
        .ok_or_else(|| Error::Input(format!("algebra name '{}' needs kind:size", name)))?;
    let usize_arg = || {
        arg.parse::<usize>()
            .map_err(|_| Error::Input(format!("algebra size '{}' is not an integer", arg)))
    };
    match kind {
        "full" => Ok(VNAlg::full(usize_arg()?)),
        "diag" | "diagonal" => Ok(VNAlg::diagonal(usize_arg()?)),
        "scalars" => Ok(VNAlg::scalars(usize_arg()?)),
        "blocks" => {
            let sizes = arg
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse::<usize>()
                        .map_err(|_| Error::Input(format!("block size '{}' is not an integer", s)))
                })
                .collect::<Result<Vec<usize>>>()?;
            VNAlg::block_diagonal(&sizes)
        }
        other => Err(Error::Input(format!(
            "unknown algebra kind '{}' (use full/diag/scalars/blocks)",
            other
        ))),
    }
}

/// Multiplier wire format.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MultiplierJson {
    pub dim_h: usize,
    pub dim_k: usize,
    pub matrix: MatrixJson,
}

impl MultiplierJson {
    pub fn to_parts(&self) -> Result<(usize, usize, ComplexMatrix)> {
        let m = self.matrix.to_matrix()?;
        let cells = self.dim_h * self.dim_k;
        if m.rows() != cells || m.cols() != cells {
            return Err(Error::Shape(format!(
                "multiplier matrix is {}x{}, expected {}x{}",
                m.rows(),
                m.cols(),
                cells,
                cells
            )));
        }
        Ok((self.dim_h, self.dim_k, m))
    }
}

/// Kraus family wire format.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KrausJson {
    pub dim: usize,
    pub ops: Vec<MatrixJson>,
}

impl KrausJson {
    pub fn from_family(f: &KrausFamily) -> Self {
        KrausJson {
            dim: f.dim,
            ops: f.ops.iter().map(MatrixJson::from_matrix).collect(),
        }
    }

    pub fn to_family(&self) -> Result<KrausFamily> {
        let ops = self
            .ops
            .iter()
            .map(|m| m.to_matrix())
            .collect::<Result<Vec<_>>>()?;
        KrausFamily::new(self.dim, ops)
    }
}

/// Super-operator on n×n matrices: `{"dim": n, "matrix": n²×n² MatrixJson}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MapJson {
    pub dim: usize,
    pub matrix: MatrixJson,
}

impl MapJson {
    pub fn from_superop(s: &SuperOp) -> Result<Self> {
        if s.in_shape != s.out_shape || s.in_shape.0 != s.in_shape.1 {
            return Err(Error::Shape(
                "wire format covers endomorphisms of square matrices".into(),
            ));
        }
        Ok(MapJson {
            dim: s.in_shape.0,
            matrix: MatrixJson::from_matrix(&s.matrix),
        })
    }

    pub fn to_superop(&self) -> Result<SuperOp> {
        SuperOp::new(
            (self.dim, self.dim),
            (self.dim, self.dim),
            self.matrix.to_matrix()?,
        )
    }
}

/// Input for `lift-gram`: a kernel over the full point set and the indices
/// of the already-represented subset.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GramLiftInput {
    pub kernel: KernelJson,
    pub subset: Vec<usize>,
}

/// Input for `lift-kraus`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LiftKrausInput {
    pub map: MapJson,
    pub algebra: AlgebraSpec,
    pub projection: MatrixJson,
    pub family: KrausJson,
}

/// Input for `nested`: a filtration plus either explicit per-level blocks or
/// one top-level map to compress.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NestedInput {
    pub dim: usize,
    pub projections: Vec<MatrixJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub blocks: Option<Vec<MatrixJson>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub top: Option<MatrixJson>,
}

/// Input for `toeplitz`: function values on the group elements; the group
/// comes from the file or from `--group`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ToeplitzInput {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<GroupJson>,
    pub f: Vec<ComplexPair>,
}

/// Input for `symbol` / `cp-mult`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MultiplierInput {
    pub multiplier: MultiplierJson,
    pub m_algebra: AlgebraSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_algebra: Option<AlgebraSpec>,
}

/// One covering pair.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CoveringPairJson {
    pub p: MatrixJson,
    pub q: MatrixJson,
}

/// Input for `filtered`: a covering with per-level blocks or a top-level
/// multiplier matrix.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FilteredInput {
    pub covering: Vec<CoveringPairJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub blocks: Option<Vec<MatrixJson>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub top: Option<MatrixJson>,
    pub m_algebra: AlgebraSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_algebra: Option<AlgebraSpec>,
}
