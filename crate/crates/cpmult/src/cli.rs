//! Batch command-line front end: load matrices, kernels, groups, and
//! algebras from JSON, run the analyses, and emit machine-readable reports.
//!
//! Exit codes: 0 = computed with affirmative verdict, 3 = computed with a
//! negative verdict (e.g. "not PSD"), 2 = input error, 1 = internal
//! numerical failure. Identical inputs and seed produce byte-identical
//! reports. Every artifact a command emits can be fed back through
//! `--verify` and is re-checked against the input within the emitting
//! tolerance.

use std::collections::BTreeMap;

use clap::{Arg, ArgMatches, Command};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use crate::alg::VNAlg;
use crate::cpmap::{
    choi, is_strongly_independent, minimal_kraus_of, minimalize, superop_from_kraus,
    superop_residual, KrausFamily, SuperOp,
};
use crate::error::Error;
use crate::io::{
    matrices_from_value, matrices_value, matrix_from_value, matrix_value, pairs_to_vec,
    vec_to_pairs, vectors_from_value, vectors_value, FilteredInput, GramLiftInput, KernelJson,
    LiftKrausInput, MapJson, MatrixJson, MultiplierInput, NestedInput, ToeplitzInput,
};
use crate::kernels::{
    cauchy_kernel, loewner_matrix, monotonicity_oracle, operator_monotone_test,
    toeplitz_positive_check, FiniteGroup, ScalarFunction,
};
use crate::mat::{psd_check, rayleigh, ComplexMatrix};
use crate::opmult::{
    cp_multiplier_check, filtered_cp_multiplier, filtered_multiplier_check, s_phi, symbol,
    CoveringFamily, FilteredMultiplier, TensorMultiplier,
};
use crate::sample;
use crate::schur::{
    is_minimal_rep, lift_representing, positive_schur_check, positive_schur_norm,
    representing_vectors, schur_norm_upper, GramRep, Kernel,
};
use crate::stinelift::{graded_stinespring, lift_minimal_kraus, FilteredCPMap, Filtration};

/// Machine-readable result of one invocation.
#[derive(Debug, Serialize)]
pub struct Report {
    pub command: String,
    pub seed: u64,
    pub tol: f64,
    /// Digest of the input file bytes and computation-relevant flags.
    pub inputs: String,
    pub verdicts: BTreeMap<String, Value>,
    pub residuals: BTreeMap<String, f64>,
    pub artifacts: BTreeMap<String, Value>,
}

/// Outcome of a handler before it is wrapped into a `Report`.
struct Outcome {
    exit: i32,
    verdicts: BTreeMap<String, Value>,
    residuals: BTreeMap<String, f64>,
    artifacts: BTreeMap<String, Value>,
}

impl Outcome {
    fn new(exit: i32) -> Self {
        Outcome {
            exit,
            verdicts: BTreeMap::new(),
            residuals: BTreeMap::new(),
            artifacts: BTreeMap::new(),
        }
    }

    fn verdict(&mut self, key: &str, v: Value) -> &mut Self {
        self.verdicts.insert(key.into(), v);
        self
    }

    fn residual(&mut self, key: &str, r: f64) -> &mut Self {
        if r.is_finite() {
            self.residuals.insert(key.into(), r);
        }
        self
    }

    fn artifact(&mut self, key: &str, a: Value) -> &mut Self {
        self.artifacts.insert(key.into(), a);
        self
    }
}

/// Handler failure: either a library error (classified by kind) or a direct
/// input problem.
enum Failure {
    Lib(Error),
    Input(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

type HandlerResult = std::result::Result<Outcome, Failure>;

/// Map library errors to exit codes: negative verdicts are 3, malformed or
/// inconsistent inputs are 2, numerical breakdowns are 1.
fn classify(e: &Error) -> i32 {
    match e {
        Error::NotPsd { .. }
        | Error::NotCompletelyPositive { .. }
        | Error::NotMultiplier { .. }
        | Error::MembershipViolation { .. }
        | Error::NotBimodular { .. }
        | Error::NotMinimalInput { .. }
        | Error::ProjectionNotInAlgebra { .. }
        | Error::NotCommuting { .. }
        | Error::InconsistentFiltration { .. }
        | Error::InconsistentRestriction { .. }
        | Error::InconsistentAtoms(_) => 3,
        Error::AtLevel { source, .. } => classify(source),
        Error::NoConvergence { .. } => 1,
        Error::NotHermitian { .. }
        | Error::DomainViolation { .. }
        | Error::Shape(_)
        | Error::NodesCollide { .. }
        | Error::NonPositiveNode { .. }
        | Error::DerivativeMismatch { .. }
        | Error::InvalidPointSet(_)
        | Error::InvalidGroup(_)
        | Error::InvalidAlgebra(_)
        | Error::Input(_) => 2,
    }
}

fn variant_name(e: &Error) -> &'static str {
    match e {
        Error::NotHermitian { .. } => "NotHermitian",
        Error::NoConvergence { .. } => "NoConvergence",
        Error::NotPsd { .. } => "NotPsd",
        Error::DomainViolation { .. } => "DomainViolation",
        Error::Shape(_) => "Shape",
        Error::NotCompletelyPositive { .. } => "NotCompletelyPositive",
        Error::NotBimodular { .. } => "NotBimodular",
        Error::NotMinimalInput { .. } => "NotMinimalInput",
        Error::ProjectionNotInAlgebra { .. } => "ProjectionNotInAlgebra",
        Error::InconsistentFiltration { .. } => "InconsistentFiltration",
        Error::InconsistentRestriction { .. } => "InconsistentRestriction",
        Error::NodesCollide { .. } => "NodesCollide",
        Error::NonPositiveNode { .. } => "NonPositiveNode",
        Error::DerivativeMismatch { .. } => "DerivativeMismatch",
        Error::InvalidPointSet(_) => "InvalidPointSet",
        Error::InvalidGroup(_) => "InvalidGroup",
        Error::InvalidAlgebra(_) => "InvalidAlgebra",
        Error::NotMultiplier { .. } => "NotMultiplier",
        Error::MembershipViolation { .. } => "MembershipViolation",
        Error::NotCommuting { .. } => "NotCommuting",
        Error::InconsistentAtoms(_) => "InconsistentAtoms",
        Error::Input(_) => "Input",
        Error::AtLevel { .. } => "AtLevel",
    }
}

/// Turn a library error into a structured (usually negative-verdict) report
/// body, surfacing the numerical witness where one exists.
fn error_outcome(e: &Error) -> Outcome {
    let mut out = Outcome::new(classify(e));
    out.verdict("error", json!(e.to_string()));
    out.verdict("error_kind", json!(variant_name(e)));
    let mut inner = e;
    let mut level = None;
    while let Error::AtLevel { level: l, source } = inner {
        level = Some(*l);
        inner = source;
    }
    if let Some(l) = level {
        out.verdict("level", json!(l));
        out.verdict("inner_kind", json!(variant_name(inner)));
    }
    match inner {
        Error::NotPsd {
            min_eigenvalue,
            witness,
        }
        | Error::NotCompletelyPositive {
            min_eigenvalue,
            witness,
        } => {
            out.verdict("min_eigenvalue", json!(min_eigenvalue));
            out.artifact("witness", json!(vec_to_pairs(witness)));
        }
        Error::NotMinimalInput {
            relation,
            relation_norm,
        } => {
            out.residual("relation_norm", *relation_norm);
            out.artifact("relation", json!(vec_to_pairs(relation)));
        }
        Error::NotMultiplier { defect }
        | Error::NotBimodular { defect }
        | Error::ProjectionNotInAlgebra { defect } => {
            out.residual("defect", *defect);
        }
        Error::MembershipViolation { index, defect } => {
            out.verdict("operator_index", json!(index));
            out.residual("defect", *defect);
        }
        Error::NotCommuting { i, j, norm } => {
            out.verdict("pair", json!([i, j]));
            out.residual("commutator_norm", *norm);
        }
        Error::InconsistentRestriction { residual } => {
            out.residual("restriction_residual", *residual);
        }
        _ => {}
    }
    out
}

/// FNV-1a digest over the parts, with a separator fold between them.
fn digest(parts: &[&[u8]]) -> String {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for part in parts {
        for &b in *part {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
        h ^= 0x1f;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    format!("{:016x}", h)
}

struct Ctx {
    tol: f64,
    seed: u64,
    /// Raw bytes of --in, when given.
    input: Option<String>,
    /// Parsed old report for --verify, when given.
    verify: Option<Value>,
    /// Canonical string of computation-relevant flags.
    params: String,
}

impl Ctx {
    fn input_text(&self) -> std::result::Result<&str, Failure> {
        self.input
            .as_deref()
            .ok_or_else(|| Failure::Input("this subcommand requires --in <FILE>".into()))
    }

    fn parse_input<T: serde::de::DeserializeOwned>(&self) -> std::result::Result<T, Failure> {
        let text = self.input_text()?;
        serde_json::from_str(text).map_err(|e| Failure::Input(format!("malformed JSON: {}", e)))
    }

    fn digest(&self) -> String {
        digest(&[
            self.input.as_deref().unwrap_or("").as_bytes(),
            self.params.as_bytes(),
        ])
    }

    fn old_report(&self) -> std::result::Result<&Value, Failure> {
        self.verify
            .as_ref()
            .ok_or_else(|| Failure::Input("internal: verify handler without --verify".into()))
    }

    fn old_artifact(&self, key: &str) -> std::result::Result<Value, Failure> {
        let old = self.old_report()?;
        old.get("artifacts")
            .and_then(|a| a.get(key))
            .cloned()
            .ok_or_else(|| Failure::Input(format!("verified report has no artifact '{}'", key)))
    }

    fn old_verdict(&self, key: &str) -> Option<Value> {
        self.verify
            .as_ref()
            .and_then(|old| old.get("verdicts"))
            .and_then(|v| v.get(key))
            .cloned()
    }
}

fn flag<'a>(m: &'a ArgMatches, name: &str) -> Option<&'a str> {
    m.get_one::<String>(name).map(|s| s.as_str())
}

fn required_flag<'a>(m: &'a ArgMatches, name: &str) -> std::result::Result<&'a str, Failure> {
    flag(m, name).ok_or_else(|| Failure::Input(format!("missing required --{} flag", name)))
}

fn parse_nodes(text: &str) -> std::result::Result<Vec<f64>, Failure> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Failure::Input(format!("node '{}' is not a number", s)))
        })
        .collect()
}

fn parse_count(m: &ArgMatches, name: &str) -> std::result::Result<usize, Failure> {
    required_flag(m, name)?
        .parse::<usize>()
        .map_err(|_| Failure::Input(format!("--{} must be a nonnegative integer", name)))
}

/// Relative Frobenius residual of `have` against `want`.
fn rel_residual(have: &ComplexMatrix, want: &ComplexMatrix) -> f64 {
    have.sub(want).norm_fro() / f64::max(1.0, want.norm_fro())
}

fn gram_of(vectors: &[Vec<Complex64>]) -> ComplexMatrix {
    let n = vectors.len();
    ComplexMatrix::from_fn(n, n, |i, j| {
        vectors[i]
            .iter()
            .zip(&vectors[j])
            .map(|(a, b)| b.conj() * a)
            .sum()
    })
}

/// Σ aᵢᵗ⊗bᵢ — the tensor form of an operator-sum symbol.
fn symbol_matrix(a_ops: &[ComplexMatrix], b_ops: &[ComplexMatrix]) -> ComplexMatrix {
    let m = a_ops[0].rows();
    let n = b_ops[0].rows();
    let mut out = ComplexMatrix::zeros(m * n, m * n);
    for (a, b) in a_ops.iter().zip(b_ops) {
        out = out.add(&a.transpose().kron(b));
    }
    out
}

/// Σ bᵗ⊗b† — the cone form of a Kraus family.
fn cone_matrix(ops: &[ComplexMatrix]) -> ComplexMatrix {
    let m = ops[0].rows();
    let mut out = ComplexMatrix::zeros(m * m, m * m);
    for b in ops {
        out = out.add(&b.transpose().kron(&b.adjoint()));
    }
    out
}

// ---------------------------------------------------------------------------
// Subcommand handlers
// ---------------------------------------------------------------------------

fn cmd_psd(ctx: &Ctx) -> HandlerResult {
    let mj: MatrixJson = ctx.parse_input()?;
    let a = mj.to_matrix().map_err(Failure::Lib)?;
    if ctx.verify.is_some() {
        let mut out = Outcome::new(0);
        if let Ok(fv) = ctx.old_artifact("factor") {
            let r = matrix_from_value(&fv).map_err(Failure::Lib)?;
            let res = rel_residual(&r.adjoint().mul(&r), &a);
            out.residual("verify_factor", res);
            let pass = res <= ctx.tol;
            out.verdict("verified", json!(pass));
            out.exit = if pass { 0 } else { 3 };
        } else if let Ok(wv) = ctx.old_artifact("witness") {
            let pairs: Vec<[f64; 2]> = serde_json::from_value(wv)
                .map_err(|e| Failure::Input(format!("witness artifact: {}", e)))?;
            let w = pairs_to_vec(&pairs);
            let q = rayleigh(&a, &w);
            out.residual("verify_witness_rayleigh", q.abs());
            let pass = q <= ctx.tol;
            out.verdict("verified", json!(pass));
            out.verdict("witness_rayleigh", json!(q));
            out.exit = if pass { 0 } else { 3 };
        } else {
            return Err(Failure::Input(
                "verified report carries neither factor nor witness".into(),
            ));
        }
        return Ok(out);
    }
    let verdict = psd_check(&a, ctx.tol)?;
    let mut out = Outcome::new(if verdict.is_psd { 0 } else { 3 });
    out.verdict("is_psd", json!(verdict.is_psd));
    out.verdict("min_eigenvalue", json!(verdict.min_eigenvalue));
    if let Some(f) = &verdict.factor {
        out.verdict("rank", json!(f.rank));
        out.residual("factor", rel_residual(&f.r.adjoint().mul(&f.r), &a));
        out.artifact("factor", matrix_value(&f.r));
    }
    if let Some(w) = &verdict.witness {
        out.residual(
            "witness_rayleigh_gap",
            (rayleigh(&a, w) - verdict.min_eigenvalue).abs(),
        );
        out.artifact("witness", json!(vec_to_pairs(w)));
    }
    Ok(out)
}

fn load_kernel(ctx: &Ctx) -> std::result::Result<Kernel, Failure> {
    let kj: KernelJson = ctx.parse_input()?;
    kj.to_kernel().map_err(Failure::Lib)
}

fn rep_artifacts(out: &mut Outcome, name: &str, rep: &GramRep) {
    out.artifact(name, vectors_value(&rep.vectors));
}

fn cmd_gram(ctx: &Ctx) -> HandlerResult {
    let kernel = load_kernel(ctx)?;
    if ctx.verify.is_some() {
        let vs = vectors_from_value(&ctx.old_artifact("vectors")?).map_err(Failure::Lib)?;
        if vs.len() != kernel.space.size() {
            return Err(Failure::Input(format!(
                "{} vectors for {} points",
                vs.len(),
                kernel.space.size()
            )));
        }
        let res = rel_residual(&gram_of(&vs), &kernel.values);
        let pass = res <= ctx.tol;
        let mut out = Outcome::new(if pass { 0 } else { 3 });
        out.residual("verify_gram", res);
        out.verdict("verified", json!(pass));
        return Ok(out);
    }
    let rep = representing_vectors(&kernel, ctx.tol)?;
    let mut out = Outcome::new(0);
    out.verdict("size", json!(kernel.space.size()));
    out.verdict("rank", json!(rep.rank));
    out.verdict("minimal", json!(is_minimal_rep(&rep, ctx.tol)));
    out.residual("reconstruction", rel_residual(&rep.gram(), &kernel.values));
    rep_artifacts(&mut out, "vectors", &rep);
    Ok(out)
}

/// Check the lifting pattern: at subset points the lifted vector is the
/// original with zero padding. Returns (pattern deviation, padding mass).
fn lift_pattern_defect(a: &GramRep, b: &GramRep, y: &[usize]) -> (f64, f64) {
    let mut dev = 0.0f64;
    let mut pad = 0.0f64;
    for (k, &i) in y.iter().enumerate() {
        for c in 0..b.rank {
            let have = b.vectors[i][c];
            if c < a.rank {
                dev = dev.max((have - a.vectors[k][c]).norm());
            } else {
                pad = pad.max(have.norm());
            }
        }
    }
    (dev, pad)
}

fn cmd_lift_gram(ctx: &Ctx) -> HandlerResult {
    let input: GramLiftInput = ctx.parse_input()?;
    let kernel = input.kernel.to_kernel().map_err(Failure::Lib)?;
    let restricted = kernel.restrict(&input.subset).map_err(Failure::Lib)?;
    let a = representing_vectors(&restricted, ctx.tol)?;
    if ctx.verify.is_some() {
        let b_vecs = vectors_from_value(&ctx.old_artifact("b_vectors")?).map_err(Failure::Lib)?;
        let rank = b_vecs.iter().map(|v| v.len()).max().unwrap_or(0);
        let b = GramRep::new(kernel.space.clone(), rank, b_vecs).map_err(Failure::Lib)?;
        let gram_res = rel_residual(&b.gram(), &kernel.values);
        let (dev, pad) = lift_pattern_defect(&a, &b, &input.subset);
        let pass = gram_res <= ctx.tol && dev <= ctx.tol && pad <= ctx.tol;
        let mut out = Outcome::new(if pass { 0 } else { 3 });
        out.residual("verify_gram", gram_res);
        out.residual("verify_pattern", dev.max(pad));
        out.verdict("verified", json!(pass));
        return Ok(out);
    }
    let b = lift_representing(&kernel, &input.subset, &a, ctx.tol)?;
    let (dev, pad) = lift_pattern_defect(&a, &b, &input.subset);
    let mut out = Outcome::new(0);
    out.verdict("size", json!(kernel.space.size()));
    out.verdict("subset", json!(input.subset));
    out.verdict("rank_restricted", json!(a.rank));
    out.verdict("rank_lifted", json!(b.rank));
    out.residual("gram", rel_residual(&b.gram(), &kernel.values));
    out.residual("pattern", dev.max(pad));
    rep_artifacts(&mut out, "a_vectors", &a);
    rep_artifacts(&mut out, "b_vectors", &b);
    Ok(out)
}

fn load_map(ctx: &Ctx) -> std::result::Result<SuperOp, Failure> {
    let mj: MapJson = ctx.parse_input()?;
    mj.to_superop().map_err(Failure::Lib)
}

fn verify_kraus_against_map(ctx: &Ctx, map: &SuperOp, key: &str) -> HandlerResult {
    let ops = matrices_from_value(&ctx.old_artifact(key)?).map_err(Failure::Lib)?;
    let fam = KrausFamily::new(map.in_shape.0, ops).map_err(Failure::Lib)?;
    let res = superop_residual(&superop_from_kraus(&fam), map).map_err(Failure::Lib)?;
    let pass = res <= ctx.tol;
    let mut out = Outcome::new(if pass { 0 } else { 3 });
    out.residual("verify_map", res);
    out.verdict("verified", json!(pass));
    Ok(out)
}

fn cmd_kraus(ctx: &Ctx) -> HandlerResult {
    let map = load_map(ctx)?;
    if ctx.verify.is_some() {
        return verify_kraus_against_map(ctx, &map, "ops");
    }
    let fam = minimal_kraus_of(&map, ctx.tol)?;
    let mut out = Outcome::new(0);
    out.verdict("dim", json!(fam.dim));
    out.verdict("count", json!(fam.count()));
    out.residual(
        "reconstruction",
        superop_residual(&superop_from_kraus(&fam), &map)?,
    );
    out.artifact("ops", matrices_value(&fam.ops));
    Ok(out)
}

fn cmd_minimalize(ctx: &Ctx) -> HandlerResult {
    let kj: crate::io::KrausJson = ctx.parse_input()?;
    let fam = kj.to_family().map_err(Failure::Lib)?;
    let original = superop_from_kraus(&fam);
    if ctx.verify.is_some() {
        return verify_kraus_against_map(ctx, &original, "ops");
    }
    let min = minimalize(&fam, ctx.tol)?;
    let indep = is_strongly_independent(&min.family, ctx.tol)?;
    let choi_rank = crate::cpmap::psd_rank(&choi(&original)?.matrix, ctx.tol)?;
    let mut out = Outcome::new(0);
    out.verdict("count_before", json!(fam.count()));
    out.verdict("count_after", json!(min.family.count()));
    out.verdict("strongly_independent", json!(indep.independent));
    out.verdict("choi_rank", json!(choi_rank));
    out.residual(
        "map",
        superop_residual(&superop_from_kraus(&min.family), &original)?,
    );
    out.artifact("ops", matrices_value(&min.family.ops));
    out.artifact("lambda", matrix_value(&min.lambda));
    Ok(out)
}

fn cmd_lift_kraus(ctx: &Ctx) -> HandlerResult {
    let input: LiftKrausInput = ctx.parse_input()?;
    let map = input.map.to_superop().map_err(Failure::Lib)?;
    let d2 = input.algebra.resolve(ctx.tol).map_err(Failure::Lib)?;
    let p = input.projection.to_matrix().map_err(Failure::Lib)?;
    let v = input.family.to_family().map_err(Failure::Lib)?;
    if ctx.verify.is_some() {
        let ops = matrices_from_value(&ctx.old_artifact("ops")?).map_err(Failure::Lib)?;
        let w = KrausFamily::new(map.in_shape.0, ops).map_err(Failure::Lib)?;
        let matched: Vec<usize> = match ctx.old_verdict("matched") {
            Some(v) => serde_json::from_value(v)
                .map_err(|e| Failure::Input(format!("matched verdict: {}", e)))?,
            None => return Err(Failure::Input("verified report has no matched indices".into())),
        };
        if matched.len() != v.count() || matched.iter().any(|&i| i >= w.count()) {
            return Err(Failure::Input("matched indices out of range".into()));
        }
        let map_res = superop_residual(&superop_from_kraus(&w), &map).map_err(Failure::Lib)?;
        let mut restr = 0.0f64;
        for (j, &mi) in matched.iter().enumerate() {
            restr = restr.max(w.ops[mi].mul(&p).sub(&v.ops[j]).norm_fro());
        }
        let comm = w
            .ops
            .iter()
            .map(|op| d2.commutation_defect(op))
            .fold(0.0, f64::max);
        let pass = map_res <= ctx.tol && restr <= ctx.tol && comm <= ctx.tol.max(1e-8);
        let mut out = Outcome::new(if pass { 0 } else { 3 });
        out.residual("verify_map", map_res);
        out.residual("verify_restriction", restr);
        out.residual("verify_commutant", comm);
        out.verdict("verified", json!(pass));
        return Ok(out);
    }
    let lift = lift_minimal_kraus(&map, &d2, &p, &v, ctx.tol)?;
    let mut out = Outcome::new(0);
    out.verdict("count", json!(lift.family.count()));
    out.verdict("matched", json!(lift.matched));
    out.residual("map", lift.map_residual);
    out.residual("restriction", lift.restriction_residual);
    out.residual("commutant", lift.commutant_defect);
    out.artifact("ops", matrices_value(&lift.family.ops));
    Ok(out)
}

fn nested_parts(
    ctx: &Ctx,
) -> std::result::Result<(Filtration, FilteredCPMap), Failure> {
    let input: NestedInput = ctx.parse_input()?;
    let projections = input
        .projections
        .iter()
        .map(|m| m.to_matrix())
        .collect::<crate::error::Result<Vec<_>>>()
        .map_err(Failure::Lib)?;
    let filtration =
        Filtration::new(input.dim, projections, ctx.tol.max(1e-8)).map_err(Failure::Lib)?;
    let fcp = match (&input.blocks, &input.top) {
        (Some(blocks), _) => {
            let sos = blocks
                .iter()
                .map(|b| {
                    SuperOp::new((input.dim, input.dim), (input.dim, input.dim), b.to_matrix()?)
                })
                .collect::<crate::error::Result<Vec<_>>>()
                .map_err(Failure::Lib)?;
            FilteredCPMap::new(filtration.clone(), sos, ctx.tol.max(1e-8)).map_err(Failure::Lib)?
        }
        (None, Some(top)) => {
            let so = SuperOp::new(
                (input.dim, input.dim),
                (input.dim, input.dim),
                top.to_matrix().map_err(Failure::Lib)?,
            )
            .map_err(Failure::Lib)?;
            FilteredCPMap::from_top(filtration.clone(), &so, ctx.tol.max(1e-8))
                .map_err(Failure::Lib)?
        }
        (None, None) => {
            return Err(Failure::Input(
                "nested input needs either blocks or a top map".into(),
            ))
        }
    };
    Ok((filtration, fcp))
}

fn cmd_nested(ctx: &Ctx) -> HandlerResult {
    let (filtration, fcp) = nested_parts(ctx)?;
    if ctx.verify.is_some() {
        let levels_value = ctx.old_artifact("levels")?;
        let level_list: Vec<Value> = serde_json::from_value(levels_value)
            .map_err(|e| Failure::Input(format!("levels artifact: {}", e)))?;
        if level_list.len() != fcp.blocks.len() {
            return Err(Failure::Input("level count mismatch".into()));
        }
        let mut worst = 0.0f64;
        for (k, lv) in level_list.iter().enumerate() {
            let ops = matrices_from_value(lv).map_err(Failure::Lib)?;
            let fam = KrausFamily::new(filtration.dim, ops).map_err(Failure::Lib)?;
            worst = worst.max(
                superop_residual(&superop_from_kraus(&fam), &fcp.blocks[k])
                    .map_err(Failure::Lib)?,
            );
        }
        let pass = worst <= ctx.tol;
        let mut out = Outcome::new(if pass { 0 } else { 3 });
        out.residual("verify_map", worst);
        out.verdict("verified", json!(pass));
        return Ok(out);
    }
    let graded = graded_stinespring(&fcp, ctx.tol)?;
    let mut out = Outcome::new(0);
    out.verdict("levels", json!(fcp.blocks.len()));
    out.verdict("multiplicity", json!(graded.multiplicity));
    out.verdict(
        "counts",
        json!(graded
            .family
            .levels
            .iter()
            .map(|f| f.count())
            .collect::<Vec<_>>()),
    );
    out.verdict("block_norms", json!(graded.family.block_norms));
    out.residual("nesting", graded.family.nesting_residual());
    out.residual("pairing", graded.pairing_residual);
    out.artifact(
        "levels",
        Value::Array(
            graded
                .family
                .levels
                .iter()
                .map(|f| matrices_value(&f.ops))
                .collect(),
        ),
    );
    Ok(out)
}

fn cmd_schur_norm(ctx: &Ctx) -> HandlerResult {
    let kernel = load_kernel(ctx)?;
    let upper = schur_norm_upper(&kernel)?;
    let verdict = positive_schur_check(&kernel, ctx.tol)?;
    if ctx.verify.is_some() {
        let old_upper = ctx
            .old_verdict("upper_bound")
            .and_then(|v| v.as_f64())
            .ok_or_else(|| Failure::Input("verified report has no upper_bound".into()))?;
        let diff = (old_upper - upper).abs();
        let pass = diff <= 1e-12 * f64::max(1.0, upper.abs());
        let mut out = Outcome::new(if pass { 0 } else { 3 });
        out.residual("verify_bound", diff);
        out.verdict("verified", json!(pass));
        return Ok(out);
    }
    let mut out = Outcome::new(0);
    out.verdict("upper_bound", json!(upper));
    out.verdict("is_psd", json!(verdict.is_psd));
    if verdict.is_psd {
        let exact = positive_schur_norm(&kernel, ctx.tol)?;
        out.verdict("positive_norm", json!(exact));
        out.residual("bound_gap", upper - exact);
    }
    Ok(out)
}

fn scalar_function(m: &ArgMatches) -> std::result::Result<ScalarFunction, Failure> {
    let name = required_flag(m, "fn")?;
    ScalarFunction::parse(name).map_err(Failure::Lib)
}

fn cmd_loewner(ctx: &Ctx, m: &ArgMatches) -> HandlerResult {
    let f = scalar_function(m)?;
    let nodes = parse_nodes(required_flag(m, "nodes")?)?;
    let kernel = loewner_matrix(&f, &nodes)?;
    if ctx.verify.is_some() {
        let mut out = Outcome::new(0);
        if let Ok(wv) = ctx.old_artifact("witness") {
            let pairs: Vec<[f64; 2]> = serde_json::from_value(wv)
                .map_err(|e| Failure::Input(format!("witness artifact: {}", e)))?;
            let w = pairs_to_vec(&pairs);
            let q = rayleigh(&kernel.values, &w);
            let pass = q <= ctx.tol;
            out.verdict("witness_rayleigh", json!(q));
            out.verdict("verified", json!(pass));
            out.exit = if pass { 0 } else { 3 };
        } else {
            let old = matrix_from_value(&ctx.old_artifact("matrix")?).map_err(Failure::Lib)?;
            let res = rel_residual(&old, &kernel.values);
            let pass = res <= ctx.tol;
            out.residual("verify_matrix", res);
            out.verdict("verified", json!(pass));
            out.exit = if pass { 0 } else { 3 };
        }
        return Ok(out);
    }
    let verdict = psd_check(&kernel.values, ctx.tol)?;
    let mut out = Outcome::new(if verdict.is_psd { 0 } else { 3 });
    out.verdict("function", json!(f.name));
    out.verdict("nodes", json!(nodes));
    out.verdict("is_psd", json!(verdict.is_psd));
    out.verdict("min_eigenvalue", json!(verdict.min_eigenvalue));
    out.artifact("matrix", matrix_value(&kernel.values));
    if let Some(w) = &verdict.witness {
        out.artifact("witness", json!(vec_to_pairs(w)));
    }
    Ok(out)
}

/// Random node sets in the function's reference window, mirroring the
/// window used by the operator oracle.
fn monotone_node_sets(
    f: &ScalarFunction,
    count: usize,
    rng: &mut rand_chacha::ChaCha8Rng,
) -> Vec<Vec<f64>> {
    use rand::Rng;
    let lo = if f.domain.0.is_finite() { f.domain.0 } else { 0.0 };
    let scale = if f.domain.1.is_finite() {
        (f.domain.1 - lo) / 20.0
    } else {
        1.0
    };
    let (wlo, whi) = (lo + 0.1 * scale, lo + 10.0 * scale);
    let span = whi - wlo;
    let mut sets = Vec::with_capacity(count);
    for k in 0..count {
        let size = 2 + (k % 5);
        let mut nodes: Vec<f64> = Vec::with_capacity(size);
        while nodes.len() < size {
            let x = wlo + rng.gen::<f64>() * span;
            if nodes.iter().all(|&y| (x - y).abs() > 1e-5 * span) {
                nodes.push(x);
            }
        }
        nodes.sort_by(|a, b| a.partial_cmp(b).unwrap());
        sets.push(nodes);
    }
    sets
}

fn cmd_monotone(ctx: &Ctx, m: &ArgMatches) -> HandlerResult {
    let f = scalar_function(m)?;
    let trials = parse_count(m, "trials")?;
    let dim = parse_count(m, "dim")?;
    let set_count = parse_count(m, "sets")?;
    let sets = match flag(m, "nodes") {
        Some(text) => vec![parse_nodes(text)?],
        None => {
            let mut rng = sample::rng(ctx.seed);
            monotone_node_sets(&f, set_count, &mut rng)
        }
    };
    let loewner = operator_monotone_test(&f, &sets, ctx.tol)?;
    let oracle = monotonicity_oracle(&f, dim, trials, ctx.seed)?;
    let monotone = loewner.all_pass && oracle.monotone;
    if ctx.verify.is_some() {
        let old = ctx
            .old_verdict("monotone")
            .and_then(|v| v.as_bool())
            .ok_or_else(|| Failure::Input("verified report has no monotone verdict".into()))?;
        let pass = old == monotone;
        let mut out = Outcome::new(if pass { 0 } else { 3 });
        out.verdict("verified", json!(pass));
        out.verdict("monotone", json!(monotone));
        return Ok(out);
    }
    let mut out = Outcome::new(if monotone { 0 } else { 3 });
    out.verdict("function", json!(f.name));
    out.verdict("node_sets", json!(sets.len()));
    out.verdict("loewner_all_pass", json!(loewner.all_pass));
    out.verdict("largest_passing", json!(loewner.largest_passing));
    out.verdict("first_failure", json!(loewner.first_failure));
    out.verdict("oracle_trials", json!(oracle.trials));
    out.verdict("oracle_violations", json!(oracle.violations));
    out.verdict("oracle_monotone", json!(oracle.monotone));
    out.verdict("monotone", json!(monotone));
    out.verdict("worst_gap", json!(oracle.worst_gap));
    if let Some((a, b)) = &oracle.counterexample {
        out.artifact("counterexample_a", matrix_value(a));
        out.artifact("counterexample_b", matrix_value(b));
    }
    Ok(out)
}

fn parse_group_name(spec: &str) -> std::result::Result<FiniteGroup, Failure> {
    let (kind, arg) = spec
        .split_once(':')
        .ok_or_else(|| Failure::Input(format!("group spec '{}' needs kind:order", spec)))?;
    let n: usize = arg
        .parse()
        .map_err(|_| Failure::Input(format!("group order '{}' is not an integer", arg)))?;
    match kind {
        "cyclic" => FiniteGroup::cyclic(n).map_err(Failure::Lib),
        "dihedral" => FiniteGroup::dihedral(n).map_err(Failure::Lib),
        other => Err(Failure::Input(format!(
            "unknown group kind '{}' (use cyclic/dihedral)",
            other
        ))),
    }
}

fn cmd_toeplitz(ctx: &Ctx, m: &ArgMatches) -> HandlerResult {
    let input: ToeplitzInput = ctx.parse_input()?;
    let group = match (&input.group, flag(m, "group")) {
        (Some(gj), _) => gj.to_group().map_err(Failure::Lib)?,
        (None, Some(spec)) => parse_group_name(spec)?,
        (None, None) => {
            return Err(Failure::Input(
                "no group: supply one in the input file or via --group".into(),
            ))
        }
    };
    let f = pairs_to_vec(&input.f);
    let report = toeplitz_positive_check(&group, &f, ctx.tol)?;
    if ctx.verify.is_some() {
        let old = ctx
            .old_verdict("positive_definite")
            .and_then(|v| v.as_bool())
            .ok_or_else(|| Failure::Input("verified report has no verdict".into()))?;
        let pass = old == report.verdict.is_psd;
        let mut out = Outcome::new(if pass { 0 } else { 3 });
        out.verdict("verified", json!(pass));
        return Ok(out);
    }
    let mut out = Outcome::new(if report.verdict.is_psd { 0 } else { 3 });
    out.verdict("order", json!(group.order));
    out.verdict("abelian", json!(group.is_abelian()));
    out.verdict("positive_definite", json!(report.verdict.is_psd));
    out.verdict("min_eigenvalue", json!(report.verdict.min_eigenvalue));
    if let Some(coeffs) = &report.coefficients {
        let min_re = coeffs.iter().map(|c| c.re).fold(f64::INFINITY, f64::min);
        let max_im = coeffs.iter().map(|c| c.im.abs()).fold(0.0, f64::max);
        out.verdict("min_coefficient", json!(min_re));
        out.residual("coefficient_imag", max_im);
        out.artifact("coefficients", json!(vec_to_pairs(coeffs)));
    }
    if let Some(chars) = &report.characters {
        out.artifact("characters", vectors_value(chars));
    }
    Ok(out)
}

fn cmd_cauchy(ctx: &Ctx, m: &ArgMatches) -> HandlerResult {
    let nodes = parse_nodes(required_flag(m, "nodes")?)?;
    let quad = parse_count(m, "quad")?;
    let ck = cauchy_kernel(&nodes, quad)?;
    if ctx.verify.is_some() {
        let exact = vectors_from_value(&ctx.old_artifact("exact_vectors")?).map_err(Failure::Lib)?;
        let res_exact = rel_residual(&gram_of(&exact), &ck.kernel.values);
        let quad_vs = vectors_from_value(&ctx.old_artifact("quadrature_vectors")?)
            .map_err(Failure::Lib)?;
        let dev = gram_of(&quad_vs).sub(&ck.kernel.values).norm_max();
        let old_qe = self_or(
            self_residual(ctx, "quadrature_error"),
            ck.quadrature_error,
        );
        let pass = res_exact <= ctx.tol && dev <= old_qe + 1e-12;
        let mut out = Outcome::new(if pass { 0 } else { 3 });
        out.residual("verify_exact", res_exact);
        out.residual("verify_quadrature", dev);
        out.verdict("verified", json!(pass));
        return Ok(out);
    }
    let verdict = psd_check(&ck.kernel.values, ctx.tol)?;
    // ‖a(x)‖² = κ(x,x) = 1/(2x): single-point sanity of the exact factor.
    let single_dev = ck
        .exact
        .norms_sq()
        .iter()
        .zip(&nodes)
        .map(|(nrm, &x)| (nrm - 1.0 / (2.0 * x)).abs())
        .fold(0.0, f64::max);
    let mut out = Outcome::new(0);
    out.verdict("nodes", json!(nodes));
    out.verdict("quad_points", json!(quad));
    out.verdict("is_psd", json!(verdict.is_psd));
    out.verdict("rank", json!(ck.exact.rank));
    out.residual("exact_gram", rel_residual(&gram_of(&ck.exact.vectors), &ck.kernel.values));
    out.residual("single_node_identity", single_dev);
    out.residual("quadrature_error", ck.quadrature_error);
    out.artifact("kernel", matrix_value(&ck.kernel.values));
    out.artifact("exact_vectors", vectors_value(&ck.exact.vectors));
    out.artifact("quadrature_vectors", vectors_value(&ck.quadrature.vectors));
    Ok(out)
}

fn self_residual(ctx: &Ctx, key: &str) -> Option<f64> {
    ctx.verify
        .as_ref()
        .and_then(|old| old.get("residuals"))
        .and_then(|r| r.get(key))
        .and_then(|v| v.as_f64())
}

fn self_or(v: Option<f64>, fallback: f64) -> f64 {
    v.unwrap_or(fallback)
}

fn multiplier_parts(
    ctx: &Ctx,
) -> std::result::Result<(TensorMultiplier, VNAlg, VNAlg), Failure> {
    let input: MultiplierInput = ctx.parse_input()?;
    let (dim_h, dim_k, matrix) = input.multiplier.to_parts().map_err(Failure::Lib)?;
    let m_alg = input.m_algebra.resolve(ctx.tol).map_err(Failure::Lib)?;
    let n_alg = match &input.n_algebra {
        Some(spec) => spec.resolve(ctx.tol).map_err(Failure::Lib)?,
        None => m_alg.clone(),
    };
    if m_alg.dim != dim_h || n_alg.dim != dim_k {
        return Err(Failure::Input(format!(
            "multiplier is over ({}, {}) but algebras act on ({}, {})",
            dim_h, dim_k, m_alg.dim, n_alg.dim
        )));
    }
    let phi = TensorMultiplier::accept(matrix, &m_alg, &n_alg, ctx.tol).map_err(Failure::Lib)?;
    Ok((phi, m_alg, n_alg))
}

fn cmd_symbol(ctx: &Ctx) -> HandlerResult {
    let (phi, m_alg, n_alg) = multiplier_parts(ctx)?;
    if ctx.verify.is_some() {
        let a_ops = matrices_from_value(&ctx.old_artifact("a_ops")?).map_err(Failure::Lib)?;
        let b_ops = matrices_from_value(&ctx.old_artifact("b_ops")?).map_err(Failure::Lib)?;
        if a_ops.is_empty() || a_ops.len() != b_ops.len() {
            return Err(Failure::Input("mismatched symbol families".into()));
        }
        let res = rel_residual(&symbol_matrix(&a_ops, &b_ops), &phi.matrix);
        let pass = res <= ctx.tol;
        let mut out = Outcome::new(if pass { 0 } else { 3 });
        out.residual("verify_symbol", res);
        out.verdict("verified", json!(pass));
        return Ok(out);
    }
    let sym = symbol(&phi, &m_alg, &n_alg, ctx.tol)?;
    // Residual of the operator-sum action against the multiplier on the
    // matrix-unit spanning set.
    let map = s_phi(&phi, ctx.tol)?;
    let mut action = 0.0f64;
    for i in 0..phi.dim_k {
        for j in 0..phi.dim_h {
            let e = ComplexMatrix::unit(phi.dim_k, phi.dim_h, i, j);
            let direct = map.apply(&e).map_err(Failure::Lib)?;
            let via = sym.apply(&e).map_err(Failure::Lib)?;
            action = action.max(direct.sub(&via).norm_fro());
        }
    }
    let mut out = Outcome::new(0);
    out.verdict("count", json!(sym.count()));
    out.verdict("ph_bound", json!(sym.ph_bound));
    out.residual("membership", phi.membership_defect);
    out.residual("action", action);
    out.residual(
        "reconstruction",
        rel_residual(&symbol_matrix(&sym.a_ops, &sym.b_ops), &phi.matrix),
    );
    out.artifact("a_ops", matrices_value(&sym.a_ops));
    out.artifact("b_ops", matrices_value(&sym.b_ops));
    Ok(out)
}

fn cmd_cp_mult(ctx: &Ctx) -> HandlerResult {
    let (phi, m_alg, _) = multiplier_parts(ctx)?;
    if ctx.verify.is_some() {
        let ops = matrices_from_value(&ctx.old_artifact("kraus")?).map_err(Failure::Lib)?;
        if ops.is_empty() {
            return Err(Failure::Input("empty Kraus artifact".into()));
        }
        let res = rel_residual(&cone_matrix(&ops), &phi.matrix);
        let pass = res <= ctx.tol;
        let mut out = Outcome::new(if pass { 0 } else { 3 });
        out.residual("verify_cone", res);
        out.verdict("verified", json!(pass));
        return Ok(out);
    }
    let report = cp_multiplier_check(&phi, &m_alg, ctx.tol)?;
    let mut out = Outcome::new(if report.completely_positive { 0 } else { 3 });
    out.verdict("completely_positive", json!(report.completely_positive));
    out.verdict("choi_min_eigenvalue", json!(report.choi_min_eigenvalue));
    out.residual("membership", report.membership_defect);
    out.residual("reconstruction", report.reconstruction_residual);
    if let Some(fam) = &report.kraus {
        out.verdict("count", json!(fam.count()));
        out.artifact("kraus", matrices_value(&fam.ops));
    }
    Ok(out)
}

fn filtered_parts(
    ctx: &Ctx,
) -> std::result::Result<(FilteredMultiplier, VNAlg, VNAlg, bool), Failure> {
    let input: FilteredInput = ctx.parse_input()?;
    let m_alg = input.m_algebra.resolve(ctx.tol).map_err(Failure::Lib)?;
    let n_alg = match &input.n_algebra {
        Some(spec) => spec.resolve(ctx.tol).map_err(Failure::Lib)?,
        None => m_alg.clone(),
    };
    let symmetric_request = input.n_algebra.is_none();
    let pairs = input
        .covering
        .iter()
        .map(|pj| Ok((pj.p.to_matrix()?, pj.q.to_matrix()?)))
        .collect::<crate::error::Result<Vec<_>>>()
        .map_err(Failure::Lib)?;
    let covering = CoveringFamily::new(pairs, ctx.tol).map_err(Failure::Lib)?;
    let (m, n) = (m_alg.dim, n_alg.dim);
    let fm = match (&input.blocks, &input.top) {
        (Some(blocks), _) => {
            let tms = blocks
                .iter()
                .map(|b| {
                    let matrix = b.to_matrix()?;
                    Ok(TensorMultiplier {
                        dim_h: m,
                        dim_k: n,
                        matrix,
                        membership_defect: 0.0,
                    })
                })
                .collect::<crate::error::Result<Vec<_>>>()
                .map_err(Failure::Lib)?;
            FilteredMultiplier::new(covering, tms, ctx.tol).map_err(Failure::Lib)?
        }
        (None, Some(top)) => {
            let tm = TensorMultiplier {
                dim_h: m,
                dim_k: n,
                matrix: top.to_matrix().map_err(Failure::Lib)?,
                membership_defect: 0.0,
            };
            FilteredMultiplier::from_top(covering, &tm, ctx.tol).map_err(Failure::Lib)?
        }
        (None, None) => {
            return Err(Failure::Input(
                "filtered input needs either blocks or a top multiplier".into(),
            ))
        }
    };
    Ok((fm, m_alg, n_alg, symmetric_request))
}

fn cmd_filtered(ctx: &Ctx) -> HandlerResult {
    let (fm, m_alg, n_alg, symmetric) = filtered_parts(ctx)?;
    if ctx.verify.is_some() {
        let levels_value = ctx.old_artifact("levels")?;
        let level_list: Vec<Value> = serde_json::from_value(levels_value)
            .map_err(|e| Failure::Input(format!("levels artifact: {}", e)))?;
        if level_list.len() != fm.levels() {
            return Err(Failure::Input("level count mismatch".into()));
        }
        let mut worst = 0.0f64;
        for (k, lv) in level_list.iter().enumerate() {
            let a_ops = matrices_from_value(
                lv.get("a_ops")
                    .ok_or_else(|| Failure::Input("level artifact lacks a_ops".into()))?,
            )
            .map_err(Failure::Lib)?;
            let b_ops = matrices_from_value(
                lv.get("b_ops")
                    .ok_or_else(|| Failure::Input("level artifact lacks b_ops".into()))?,
            )
            .map_err(Failure::Lib)?;
            if a_ops.is_empty() || a_ops.len() != b_ops.len() {
                return Err(Failure::Input("mismatched level families".into()));
            }
            worst = worst.max(rel_residual(
                &symbol_matrix(&a_ops, &b_ops),
                &fm.blocks[k].matrix,
            ));
        }
        let pass = worst <= ctx.tol;
        let mut out = Outcome::new(if pass { 0 } else { 3 });
        out.residual("verify_levels", worst);
        out.verdict("verified", json!(pass));
        return Ok(out);
    }
    let report = filtered_multiplier_check(&fm, &m_alg, &n_alg, ctx.tol)?;
    let mut out = Outcome::new(0);
    out.verdict("levels", json!(fm.levels()));
    out.verdict("classification", json!(report.classification));
    out.verdict("central", json!(report.central));
    out.verdict(
        "ph_bounds",
        json!(report.levels.iter().map(|l| l.ph_bound).collect::<Vec<_>>()),
    );
    let worst_membership = report
        .levels
        .iter()
        .map(|l| l.membership_defect)
        .fold(0.0, f64::max);
    out.residual("membership", worst_membership);
    out.artifact(
        "levels",
        Value::Array(
            report
                .levels
                .iter()
                .map(|l| {
                    json!({
                        "a_ops": matrices_value(&l.symbol.a_ops),
                        "b_ops": matrices_value(&l.symbol.b_ops),
                        "ph_bound": l.ph_bound,
                    })
                })
                .collect(),
        ),
    );
    // Symmetric coverings over one algebra: also try the completely
    // positive construction and report its certificate.
    let q_equals_p = fm
        .covering
        .pairs
        .iter()
        .all(|(p, q)| p.sub(q).norm_fro() <= 1e-12 * f64::max(1.0, p.norm_fro()));
    if symmetric && q_equals_p {
        match filtered_cp_multiplier(&fm, &m_alg, ctx.tol) {
            Ok(cp) => {
                out.verdict("cp", json!(true));
                out.verdict(
                    "cp_counts",
                    json!(cp.family.levels.iter().map(|f| f.count()).collect::<Vec<_>>()),
                );
                out.residual("nesting", cp.nesting_residual);
                out.residual(
                    "cp_reconstruction",
                    cp.reconstruction.iter().copied().fold(0.0, f64::max),
                );
                out.artifact(
                    "kraus_levels",
                    Value::Array(
                        cp.family
                            .levels
                            .iter()
                            .map(|f| matrices_value(&f.ops))
                            .collect(),
                    ),
                );
            }
            Err(e) if classify(&e) == 3 => {
                out.verdict("cp", json!(false));
                out.verdict("cp_error", json!(e.to_string()));
            }
            Err(e) => return Err(Failure::Lib(e)),
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Command tree and dispatch
// ---------------------------------------------------------------------------

fn common_args(c: Command) -> Command {
    c.arg(Arg::new("in").long("in").value_name("FILE").help("input JSON file"))
        .arg(Arg::new("out").long("out").value_name("FILE").help("also write the report here"))
        .arg(
            Arg::new("tol")
                .long("tol")
                .value_name("REAL")
                .default_value("1e-9")
                .help("numerical tolerance"),
        )
        .arg(
            Arg::new("seed")
                .long("seed")
                .value_name("N")
                .default_value("0")
                .help("seed for any randomized step; embedded in the report"),
        )
        .arg(
            Arg::new("verify")
                .long("verify")
                .value_name("REPORT")
                .help("re-verify the artifacts of a previously emitted report against the input"),
        )
}

fn fn_args(c: Command) -> Command {
    c.arg(
        Arg::new("fn")
            .long("fn")
            .value_name("NAME")
            .help("scalar function: sqrt, log1p, pow:<p>, square, id, exp"),
    )
    .arg(
        Arg::new("nodes")
            .long("nodes")
            .value_name("X1,X2,…")
            .help("comma-separated node list"),
    )
}

pub fn build_command() -> Command {
    let sub = |name: &'static str, about: &'static str| common_args(Command::new(name).about(about));
    Command::new("cpmult")
        .about("operator-positivity toolkit: factorizations, liftings, kernels, multipliers")
        .subcommand_required(true)
        .arg_required_else_help(true)
        .subcommand(sub("psd", "PSD check with factor or witness"))
        .subcommand(sub("gram", "Gram representing vectors of a PSD kernel"))
        .subcommand(sub("lift-gram", "lift a subset Gram representation to the full kernel"))
        .subcommand(sub("kraus", "minimal Kraus family of a completely positive map"))
        .subcommand(sub("minimalize", "recombine a Kraus family into a minimal one"))
        .subcommand(sub("lift-kraus", "lift a compressed minimal Kraus family over an algebra"))
        .subcommand(sub("nested", "nested Kraus families along a filtration"))
        .subcommand(sub("schur-norm", "entrywise-multiplier norm bounds of a kernel"))
        .subcommand(fn_args(sub("loewner", "Loewner divided-difference matrix and its PSD verdict")))
        .subcommand(
            fn_args(sub("monotone", "operator monotonicity: Loewner battery plus matrix oracle"))
                .arg(
                    Arg::new("trials")
                        .long("trials")
                        .value_name("N")
                        .default_value("200")
                        .help("oracle trial count"),
                )
                .arg(
                    Arg::new("dim")
                        .long("dim")
                        .value_name("N")
                        .default_value("3")
                        .help("oracle matrix dimension (1..=6)"),
                )
                .arg(
                    Arg::new("sets")
                        .long("sets")
                        .value_name("N")
                        .default_value("50")
                        .help("random node-set count when --nodes is absent"),
                ),
        )
        .subcommand(
            sub("toeplitz", "group kernel positivity and character coefficients").arg(
                Arg::new("group")
                    .long("group")
                    .value_name("SPEC")
                    .help("group when absent from the input: cyclic:n or dihedral:n"),
            ),
        )
        .subcommand(
            sub("cauchy", "Cauchy kernel with exact and quadrature Gram representations")
                .arg(
                    Arg::new("nodes")
                        .long("nodes")
                        .value_name("X1,X2,…")
                        .help("positive nodes"),
                )
                .arg(
                    Arg::new("quad")
                        .long("quad")
                        .value_name("N")
                        .default_value("40")
                        .help("quadrature point count"),
                ),
        )
        .subcommand(sub("symbol", "operator-sum symbol of a multiplier over an algebra pair"))
        .subcommand(sub("cp-mult", "completely positive cone membership of a multiplier"))
        .subcommand(sub("filtered", "per-level analysis of a filtered multiplier"))
}

fn param_string(name: &str, m: &ArgMatches) -> String {
    // Only computation-relevant flags; --out never changes results.
    let mut parts = vec![format!("cmd={}", name)];
    for key in ["tol", "seed", "fn", "nodes", "group", "quad", "trials", "dim", "sets"] {
        if let Ok(Some(v)) = m.try_get_one::<String>(key) {
            parts.push(format!("{}={}", key, v));
        }
    }
    parts.join(";")
}

fn dispatch(name: &str, ctx: &Ctx, m: &ArgMatches) -> HandlerResult {
    match name {
        "psd" => cmd_psd(ctx),
        "gram" => cmd_gram(ctx),
        "lift-gram" => cmd_lift_gram(ctx),
        "kraus" => cmd_kraus(ctx),
        "minimalize" => cmd_minimalize(ctx),
        "lift-kraus" => cmd_lift_kraus(ctx),
        "nested" => cmd_nested(ctx),
        "schur-norm" => cmd_schur_norm(ctx),
        "loewner" => cmd_loewner(ctx, m),
        "monotone" => cmd_monotone(ctx, m),
        "toeplitz" => cmd_toeplitz(ctx, m),
        "cauchy" => cmd_cauchy(ctx, m),
        "symbol" => cmd_symbol(ctx),
        "cp-mult" => cmd_cp_mult(ctx),
        "filtered" => cmd_filtered(ctx),
        other => Err(Failure::Input(format!("unknown subcommand '{}'", other))),
    }
}

/// Run the CLI on the given arguments (without the binary name) and return
/// the exit code and the rendered report.
pub fn run_to_string<I, S>(argv: I) -> (i32, String)
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let mut full: Vec<String> = vec!["cpmult".into()];
    full.extend(argv.into_iter().map(Into::into));
    let matches = match build_command().try_get_matches_from(&full) {
        Ok(m) => m,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                return (0, e.to_string());
            }
            let report = Report {
                command: "invalid".into(),
                seed: 0,
                tol: 0.0,
                inputs: digest(&[b""]),
                verdicts: BTreeMap::from([
                    ("error".to_string(), json!(e.to_string())),
                    ("error_kind".to_string(), json!("Usage")),
                ]),
                residuals: BTreeMap::new(),
                artifacts: BTreeMap::new(),
            };
            return (2, render(&report));
        }
    };
    let (name, sub) = matches.subcommand().expect("subcommand required");
    let command = name.to_string();

    let mut early: Option<(i32, BTreeMap<String, Value>)> = None;
    let tol = flag(sub, "tol")
        .unwrap_or("1e-9")
        .parse::<f64>()
        .unwrap_or_else(|_| {
            early = Some((
                2,
                BTreeMap::from([("error".to_string(), json!("--tol is not a number"))]),
            ));
            1e-9
        });
    let seed = flag(sub, "seed")
        .unwrap_or("0")
        .parse::<u64>()
        .unwrap_or_else(|_| {
            early = Some((
                2,
                BTreeMap::from([("error".to_string(), json!("--seed is not an integer"))]),
            ));
            0
        });

    let input = match flag(sub, "in") {
        Some(path) => match std::fs::read_to_string(path) {
            Ok(text) => Some(text),
            Err(e) => {
                early = Some((
                    2,
                    BTreeMap::from([(
                        "error".to_string(),
                        json!(format!("cannot read input file: {}", e)),
                    )]),
                ));
                None
            }
        },
        None => None,
    };
    let verify = match flag(sub, "verify") {
        Some(path) => match std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read verify file: {}", e))
            .and_then(|t| {
                serde_json::from_str::<Value>(&t).map_err(|e| format!("verify file: {}", e))
            }) {
            Ok(v) => {
                if v.get("command").and_then(|c| c.as_str()) != Some(&command) {
                    early = Some((
                        2,
                        BTreeMap::from([(
                            "error".to_string(),
                            json!("verify report was emitted by a different subcommand"),
                        )]),
                    ));
                }
                Some(v)
            }
            Err(msg) => {
                early = Some((2, BTreeMap::from([("error".to_string(), json!(msg))])));
                None
            }
        },
        None => None,
    };

    let ctx = Ctx {
        tol: if tol > 0.0 { tol } else { 1e-9 },
        seed,
        input,
        verify,
        params: param_string(&command, sub),
    };

    let outcome = match early {
        Some((code, verdicts)) => Outcome {
            exit: code,
            verdicts,
            residuals: BTreeMap::new(),
            artifacts: BTreeMap::new(),
        },
        None => match dispatch(&command, &ctx, sub) {
            Ok(out) => out,
            Err(Failure::Lib(e)) => error_outcome(&e),
            Err(Failure::Input(msg)) => {
                let mut out = Outcome::new(2);
                out.verdict("error", json!(msg));
                out.verdict("error_kind", json!("Input"));
                out
            }
        },
    };

    let report = Report {
        command,
        seed: ctx.seed,
        tol: ctx.tol,
        inputs: ctx.digest(),
        verdicts: outcome.verdicts,
        residuals: outcome.residuals,
        artifacts: outcome.artifacts,
    };
    let text = render(&report);
    if let Some(path) = flag(sub, "out") {
        if std::fs::write(path, &text).is_err() && outcome.exit == 0 {
            return (1, text);
        }
    }
    (outcome.exit, text)
}

fn render(report: &Report) -> String {
    let mut text = serde_json::to_string_pretty(report).expect("report serializes");
    text.push('\n');
    text
}

/// Entry point for the binary: prints the report to standard output and
/// returns the exit code.
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let (code, text) = run_to_string(argv);
    print!("{}", text);
    code
}
