//! Finite-dimensional unitary representations: clock/shift models, twisting
//! by the covering group, intertwiner search and the constructions built on
//! top of it.

use std::collections::HashMap;

use nalgebra::DVector;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::galois::{character, group_elements, GroupElement};
use crate::linalg::{
    block_diagonal, identity, kron, matrix_to_json, normal_eigenvalues, null_space, op_norm, singular_values,
    unitary_pow, unitary_residual, CMatrix,
};
use crate::random;
use crate::torus::{embed_cover, unit_root, CoveringSpec, TorusElement, TorusParams};

/// Unitarity and relation tolerance accepted by [`MatrixRep::new`].
pub const REP_TOL: f64 = 1e-10;
/// Relative singular value cutoff for intertwiner null spaces.
pub const NULL_TOL: f64 = 1e-9;
/// Tolerance on witness unitarity and intertwining.
pub const WITNESS_TOL: f64 = 1e-8;

const POLAR_SEED: u64 = 0x5eed;

/// `‖UV − e^{2πiθ} VU‖`.
pub fn relation_residual(u: &CMatrix, v: &CMatrix, params: TorusParams) -> f64 {
    op_norm(&(u * v - v * u * params.phase(1)))
}

/// Images of named generators as unitary matrices.
///
/// With torus parameters the generators `u` and `v` must both be present and
/// satisfy the commutation relation.
#[derive(Clone, Debug)]
pub struct MatrixRep {
    dim: usize,
    params: Option<TorusParams>,
    gens: Vec<(String, CMatrix)>,
    relation_residual: f64,
}

impl MatrixRep {
    pub fn new(params: Option<TorusParams>, gens: Vec<(String, CMatrix)>) -> Result<Self> {
        let dim = gens
            .first()
            .map(|g| g.1.nrows())
            .ok_or_else(|| Error::InvalidArgument("a representation needs at least one generator".into()))?;
        if dim == 0 {
            return Err(Error::InvalidArgument(
                "representation dimension must be positive".into(),
            ));
        }
        for (name, m) in &gens {
            if m.nrows() != dim || m.ncols() != dim {
                return Err(Error::DimensionMismatch(m.nrows().max(m.ncols()), dim));
            }
            let residual = unitary_residual(m);
            if !(residual <= REP_TOL) {
                return Err(Error::NotUnitary { residual });
            }
            if gens.iter().filter(|g| &g.0 == name).count() > 1 {
                return Err(Error::InvalidArgument(format!("generator `{name}` given twice")));
            }
        }
        let mut rep = Self {
            dim,
            params,
            gens,
            relation_residual: 0.0,
        };
        if let Some(p) = params {
            let (u, v) = match (rep.generator("u"), rep.generator("v")) {
                (Some(u), Some(v)) => (u, v),
                _ => {
                    return Err(Error::InvalidArgument(
                        "a torus representation needs generators `u` and `v`".into(),
                    ))
                }
            };
            let r = relation_residual(u, v, p);
            if !(r <= REP_TOL) {
                return Err(Error::ResidualTooLarge {
                    label: "commutation relation".into(),
                    residual: r,
                    tol: REP_TOL,
                });
            }
            rep.relation_residual = r;
        }
        Ok(rep)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn params(&self) -> Option<TorusParams> {
        self.params
    }

    pub fn gens(&self) -> &[(String, CMatrix)] {
        &self.gens
    }

    pub fn generator(&self, name: &str) -> Option<&CMatrix> {
        self.gens.iter().find(|g| g.0 == name).map(|g| &g.1)
    }

    pub fn relation_residual(&self) -> f64 {
        self.relation_residual
    }

    /// Worst `‖M*M − I‖` over the generators.
    pub fn unitarity_residual(&self) -> f64 {
        self.gens.iter().map(|g| unitary_residual(&g.1)).fold(0.0, f64::max)
    }

    pub fn to_json_value(&self, include_matrices: bool) -> serde_json::Value {
        let mut v = serde_json::json!({
            "dim": self.dim,
            "theta": self.params.map(|p| p.theta()),
            "generators": self.gens.iter().map(|g| g.0.clone()).collect::<Vec<_>>(),
            "relation_residual": self.relation_residual,
        });
        if include_matrices {
            v["matrices"] = self
                .gens
                .iter()
                .map(|(n, m)| (n.clone(), matrix_to_json(m)))
                .collect::<serde_json::Map<_, _>>()
                .into();
        }
        v
    }
}

/// The `q`-dimensional model of `A_{p/q}`: `u = diag(ω^j)` with
/// `ω = e^{2πip/q}` and `v e_j = e_{j+1}`.
///
/// Irreducible when `gcd(p, q) = 1`.
pub fn clock_shift_rep(p: i64, q: u64) -> Result<MatrixRep> {
    if q == 0 {
        return Err(Error::InvalidArgument("q must be positive".into()));
    }
    let d = q as usize;
    let u = CMatrix::from_diagonal(&DVector::from_fn(d, |j, _| unit_root(p as i128 * j as i128, q)));
    let v = shift_matrix(d);
    MatrixRep::new(
        Some(TorusParams::rational(p, q as i64)?),
        vec![("u".into(), u), ("v".into(), v)],
    )
}

/// Cyclic shift `e_j ↦ e_{j+1}`.
pub fn shift_matrix(d: usize) -> CMatrix {
    CMatrix::from_fn(d, d, |i, j| {
        if i == (j + 1) % d {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

fn theta_matches(a: TorusParams, b: TorusParams) -> bool {
    let diff = (a.theta() - b.theta()).rem_euclid(1.0);
    diff.min(1.0 - diff) <= 1e-12
}

/// `Σ a_rs ρ(u)^r ρ(v)^s`.
pub fn evaluate(rep: &MatrixRep, a: &TorusElement) -> Result<CMatrix> {
    let params = rep
        .params
        .ok_or_else(|| Error::InvalidArgument("representation carries no torus parameters".into()))?;
    if !theta_matches(params, a.params()) {
        return Err(Error::ThetaMismatch {
            rep: params.theta(),
            element: a.params().theta(),
        });
    }
    let u = rep.generator("u").expect("validated");
    let v = rep.generator("v").expect("validated");
    let mut u_pow: HashMap<i64, CMatrix> = HashMap::new();
    let mut v_pow: HashMap<i64, CMatrix> = HashMap::new();
    let mut out = CMatrix::zeros(rep.dim, rep.dim);
    for (mono, c) in a.terms() {
        let up = u_pow.entry(mono.r).or_insert_with(|| unitary_pow(u, mono.r)).clone();
        let vp = v_pow.entry(mono.s).or_insert_with(|| unitary_pow(v, mono.s));
        out += (up * &*vp) * c;
    }
    Ok(out)
}

/// `max |tr(ρ(u)^r ρ(v)^s)/dim − τ₀(u^r v^s)|` over `|r|, |s| < bound`.
pub fn trace_compatibility_residual(rep: &MatrixRep, bound: i64) -> Result<f64> {
    let u = rep
        .generator("u")
        .ok_or_else(|| Error::InvalidArgument("missing `u`".into()))?;
    let v = rep
        .generator("v")
        .ok_or_else(|| Error::InvalidArgument("missing `v`".into()))?;
    let dim = rep.dim as f64;
    // m^{1-bound}, ..., m^{bound-1} by repeated multiplication
    let powers = |m: &CMatrix| -> Vec<CMatrix> {
        let mut out = Vec::with_capacity(2 * bound.max(1) as usize);
        let mut cur = unitary_pow(m, 1 - bound);
        for _ in 1 - bound..bound {
            let next = &cur * m;
            out.push(cur);
            cur = next;
        }
        out
    };
    let up = powers(u);
    let vp_t: Vec<CMatrix> = powers(v).iter().map(|m| m.transpose()).collect();
    let mut worst: f64 = 0.0;
    for (i, a) in up.iter().enumerate() {
        for (j, bt) in vp_t.iter().enumerate() {
            // tr(AB) = Σ_jk A_jk B_kj
            let tr: Complex64 = a.as_slice().iter().zip(bt.as_slice()).map(|(x, y)| x * y).sum();
            let r = i as i64 + 1 - bound;
            let s = j as i64 + 1 - bound;
            let tau = if r == 0 && s == 0 { 1.0 } else { 0.0 };
            worst = worst.max((tr / dim - tau).norm());
        }
    }
    Ok(worst)
}

/// `ρ_g(a) = ρ(g·a)`: `u` picks up `e^{2πi g.a/m}` and `v` picks up
/// `e^{2πi g.b/n}`. Other generators are left alone.
pub fn twisted_rep(g: GroupElement, rep: &MatrixRep, spec: &CoveringSpec) -> Result<MatrixRep> {
    let g = GroupElement::new(spec, g.a, g.b)?;
    let gens = rep
        .gens
        .iter()
        .map(|(name, m)| {
            let scale = match name.as_str() {
                "u" => character(spec, g, 1, 0),
                "v" => character(spec, g, 0, 1),
                _ => Complex64::new(1.0, 0.0),
            };
            (name.clone(), m * scale)
        })
        .collect();
    MatrixRep::new(rep.params, gens)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IntertwinerStatus {
    UnitaryEquivalent,
    Inequivalent,
    Inconclusive,
}

impl IntertwinerStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::UnitaryEquivalent => "unitary_equivalent",
            Self::Inequivalent => "inequivalent",
            Self::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Clone, Debug)]
pub struct IntertwinerResult {
    pub status: IntertwinerStatus,
    pub witness: Option<CMatrix>,
    /// `max(max_x ‖Wρ₁(x) − ρ₂(x)W‖, ‖W*W − I‖)` for a witness, else 0.
    pub residual: f64,
    pub null_dim: usize,
    pub diagnostics: String,
}

impl IntertwinerResult {
    pub fn to_json_value(&self, include_witness: bool) -> serde_json::Value {
        let mut v = serde_json::json!({
            "status": self.status.as_str(),
            "residual": self.residual,
            "null_dim": self.null_dim,
            "diagnostics": self.diagnostics,
        });
        if include_witness {
            v["witness"] = self
                .witness
                .as_ref()
                .map(matrix_to_json)
                .unwrap_or(serde_json::Value::Null);
        }
        v
    }
}

/// Rotates `w` so that its largest entry (first in column-major order) is
/// real and positive.
fn normalize_phase(w: &CMatrix) -> CMatrix {
    let mut best = Complex64::new(0.0, 0.0);
    for z in w.iter() {
        if z.norm() > best.norm() * (1.0 + 1e-12) {
            best = *z;
        }
    }
    if best.norm() == 0.0 {
        return w.clone();
    }
    w * (best.conj() / best.norm())
}

fn intertwining_residual(w: &CMatrix, rep1: &MatrixRep, rep2: &MatrixRep) -> f64 {
    rep1.gens
        .iter()
        .map(|(name, a)| {
            let b = rep2.generator(name).expect("matched generators");
            op_norm(&(w * a - b * w))
        })
        .fold(0.0, f64::max)
}

/// `W ↦ W ρ₁(x)` minus `W ↦ ρ₂(x) W` acting on column-major `vec(W)`.
fn sylvester_operator(rep1: &MatrixRep, rep2: &MatrixRep) -> CMatrix {
    let d = rep1.dim;
    let id = identity(d);
    let blocks: Vec<CMatrix> = rep1
        .gens
        .iter()
        .map(|(name, a)| {
            let b = rep2.generator(name).expect("matched generators");
            kron(&a.transpose(), &id) - kron(&id, b)
        })
        .collect();
    let mut stacked = CMatrix::zeros(d * d * blocks.len(), d * d);
    for (i, blk) in blocks.iter().enumerate() {
        stacked.view_mut((i * d * d, 0), (d * d, d * d)).copy_from(blk);
    }
    stacked
}

/// Searches for a unitary `W` with `W ρ₁(x) W* = ρ₂(x)` on every generator.
///
/// A trivial intertwiner space certifies inequivalence. A one-dimensional
/// space either contains a unitary or certifies inequivalence. Larger spaces
/// are probed with the polar part of a seeded random element and reported
/// as inconclusive when that fails.
pub fn solve_intertwiner(rep1: &MatrixRep, rep2: &MatrixRep) -> Result<IntertwinerResult> {
    if rep1.dim != rep2.dim {
        return Err(Error::DimensionMismatch(rep1.dim, rep2.dim));
    }
    let mut names1: Vec<&str> = rep1.gens.iter().map(|g| g.0.as_str()).collect();
    let mut names2: Vec<&str> = rep2.gens.iter().map(|g| g.0.as_str()).collect();
    names1.sort_unstable();
    names2.sort_unstable();
    if names1 != names2 {
        return Err(Error::InvalidArgument(format!(
            "generator sets differ: {names1:?} vs {names2:?}"
        )));
    }
    let d = rep1.dim;
    let basis = null_space(&sylvester_operator(rep1, rep2), NULL_TOL);
    let null_dim = basis.len();
    let unvec = |v: &DVector<Complex64>| CMatrix::from_column_slice(d, d, v.as_slice());

    let certify = |w: CMatrix| -> Option<(CMatrix, f64)> {
        let gram = w.adjoint() * &w;
        let scale = gram.trace().re / d as f64;
        if !(scale > 0.0) {
            return None;
        }
        let w = normalize_phase(&(w / Complex64::new(scale.sqrt(), 0.0)));
        let residual = unitary_residual(&w).max(intertwining_residual(&w, rep1, rep2));
        (residual <= WITNESS_TOL).then_some((w, residual))
    };

    match null_dim {
        0 => Ok(IntertwinerResult {
            status: IntertwinerStatus::Inequivalent,
            witness: None,
            residual: 0.0,
            null_dim,
            diagnostics: "intertwiner space is trivial".into(),
        }),
        1 => match certify(unvec(&basis[0])) {
            Some((w, residual)) => Ok(IntertwinerResult {
                status: IntertwinerStatus::UnitaryEquivalent,
                witness: Some(w),
                residual,
                null_dim,
                diagnostics: "one-dimensional intertwiner space spanned by a unitary".into(),
            }),
            None => Ok(IntertwinerResult {
                status: IntertwinerStatus::Inequivalent,
                witness: None,
                residual: 0.0,
                null_dim,
                diagnostics: "one-dimensional intertwiner space contains no unitary".into(),
            }),
        },
        _ => {
            let mut rng = random::rng(POLAR_SEED);
            let mut w = CMatrix::zeros(d, d);
            for v in &basis {
                w += unvec(v) * random::coefficient(&mut rng);
            }
            let svd = w.clone().svd(true, true);
            let sv = singular_values(&w);
            let smin = sv.last().copied().unwrap_or(0.0);
            let smax = sv.first().copied().unwrap_or(0.0);
            if smax > 0.0 && smin > WITNESS_TOL * smax {
                let polar = svd.u.expect("u") * svd.v_t.expect("v_t");
                if let Some((w, residual)) = certify(polar) {
                    return Ok(IntertwinerResult {
                        status: IntertwinerStatus::UnitaryEquivalent,
                        witness: Some(w),
                        residual,
                        null_dim,
                        diagnostics: format!(
                            "polar part of a random element of a {null_dim}-dimensional intertwiner space"
                        ),
                    });
                }
            }
            Ok(IntertwinerResult {
                status: IntertwinerStatus::Inconclusive,
                witness: None,
                residual: 0.0,
                null_dim,
                diagnostics: format!(
                    "{null_dim}-dimensional intertwiner space; sampled element singular (condition {:e})",
                    if smax > 0.0 { smin / smax } else { 0.0 }
                ),
            })
        }
    }
}

/// One line of [`free_action_probe`].
#[derive(Clone, Debug)]
pub struct ProbeEntry {
    pub g: GroupElement,
    pub result: IntertwinerResult,
}

impl ProbeEntry {
    /// `g` is inner with respect to the probed representation.
    pub fn fixed_point(&self) -> bool {
        self.result.status == IntertwinerStatus::UnitaryEquivalent
    }

    pub fn to_json_value(&self, include_witness: bool) -> serde_json::Value {
        let mut v = serde_json::json!({
            "g": [self.g.a, self.g.b],
            "status": self.result.status.as_str(),
            "residual": self.result.residual,
            "fixed_point": self.fixed_point(),
        });
        if include_witness {
            v["witness"] = self
                .result
                .witness
                .as_ref()
                .map(matrix_to_json)
                .unwrap_or(serde_json::Value::Null);
        }
        v
    }
}

/// Compares `rep` with each nontrivial twist `ρ_g`, in group-index order.
pub fn free_action_probe(spec: &CoveringSpec, rep: &MatrixRep, parallel: bool) -> Result<Vec<ProbeEntry>> {
    let elements: Vec<GroupElement> = group_elements(spec).into_iter().filter(|g| !g.is_identity()).collect();
    let probe = |g: &GroupElement| -> Result<ProbeEntry> {
        let twisted = twisted_rep(*g, rep, spec)?;
        Ok(ProbeEntry {
            g: *g,
            result: solve_intertwiner(rep, &twisted)?,
        })
    };
    if parallel {
        elements.par_iter().map(probe).collect()
    } else {
        elements.iter().map(probe).collect()
    }
}

/// `H^{|G|}` with `ρ_⊕ = ⊕_i ρ_{g_i}` and the block permutations `P_g`.
#[derive(Clone, Debug)]
pub struct DirectSum {
    spec: CoveringSpec,
    base_dim: usize,
    rep: MatrixRep,
    perms: Vec<CMatrix>,
    compatibility_residual: f64,
    product_law_residual: f64,
}

impl DirectSum {
    pub fn rep(&self) -> &MatrixRep {
        &self.rep
    }

    pub fn spec(&self) -> &CoveringSpec {
        &self.spec
    }

    pub fn base_dim(&self) -> usize {
        self.base_dim
    }

    pub fn blocks(&self) -> usize {
        self.perms.len()
    }

    /// `P_g`, indexed like [`group_elements`].
    pub fn perm(&self, g: GroupElement) -> &CMatrix {
        &self.perms[g.index(&self.spec)]
    }

    /// `max_{g,x} ‖P_g ρ_⊕(x) − ρ_⊕(g·x) P_g‖`.
    pub fn compatibility_residual(&self) -> f64 {
        self.compatibility_residual
    }

    /// `max_{g,h} ‖P_g P_h − P_{g+h}‖`.
    pub fn product_law_residual(&self) -> f64 {
        self.product_law_residual
    }
}

/// Block permutation with `(P h)_i = h_{target(i)}`.
pub fn block_permutation(blocks: usize, dim: usize, target: impl Fn(usize) -> usize) -> CMatrix {
    let mut p = CMatrix::zeros(blocks * dim, blocks * dim);
    for i in 0..blocks {
        p.view_mut((i * dim, target(i) * dim), (dim, dim))
            .copy_from(&identity(dim));
    }
    p
}

/// Largest `‖P_g ρ(x) − χ_x(g) ρ(x) P_g‖` over `g` and the torus generators.
pub fn compatibility_residual(spec: &CoveringSpec, rep: &MatrixRep, perms: &[CMatrix]) -> f64 {
    let mut worst: f64 = 0.0;
    for g in group_elements(spec) {
        let p = &perms[g.index(spec)];
        for (name, x) in rep.gens() {
            let chi = match name.as_str() {
                "u" => character(spec, g, 1, 0),
                "v" => character(spec, g, 0, 1),
                _ => Complex64::new(1.0, 0.0),
            };
            worst = worst.max(op_norm(&(p * x - x * p * chi)));
        }
    }
    worst
}

/// Builds `ρ_⊕` and the action of `G` on `H^{|G|}` by
/// `(P_g h)_i = h_{σ(g,i)}` where `g_{σ(g,i)} = g + g_i`.
pub fn equivariant_direct_sum(rep: &MatrixRep, spec: &CoveringSpec) -> Result<DirectSum> {
    let elements = group_elements(spec);
    let twisted = elements
        .iter()
        .map(|g| twisted_rep(*g, rep, spec))
        .collect::<Result<Vec<_>>>()?;
    let gens = rep
        .gens
        .iter()
        .map(|(name, _)| {
            let blocks: Vec<CMatrix> = twisted
                .iter()
                .map(|t| t.generator(name).expect("same names").clone())
                .collect();
            (name.clone(), block_diagonal(&blocks))
        })
        .collect();
    let sum = MatrixRep::new(rep.params, gens)?;
    let d = rep.dim;
    let perms: Vec<CMatrix> = elements
        .iter()
        .map(|g| block_permutation(elements.len(), d, |i| g.compose(&elements[i], spec).index(spec)))
        .collect();
    let compat = compatibility_residual(spec, &sum, &perms);
    let mut law: f64 = 0.0;
    for g in &elements {
        for h in &elements {
            let lhs = &perms[g.index(spec)] * &perms[h.index(spec)];
            law = law.max(op_norm(&(lhs - &perms[g.compose(h, spec).index(spec)])));
        }
    }
    Ok(DirectSum {
        spec: *spec,
        base_dim: d,
        rep: sum,
        perms,
        compatibility_residual: compat,
        product_law_residual: law,
    })
}

/// The fixed vectors `K = (H^{|G|})^G` with an orthonormal basis in the
/// columns of `basis`.
#[derive(Clone, Debug)]
pub struct InvariantSubspace {
    pub basis: CMatrix,
}

impl InvariantSubspace {
    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    /// `η(x)`: the restriction of `ρ_⊕(embed_cover(x))` to `K`, with the
    /// closure residual `‖X B − B (B* X B)‖`.
    pub fn eta(&self, sum: &DirectSum, x: &TorusElement) -> Result<(CMatrix, f64)> {
        let big = evaluate(&sum.rep, &embed_cover(&sum.spec, x)?)?;
        let b = &self.basis;
        let restricted = b.adjoint() * &big * b;
        let closure = op_norm(&(&big * b - b * &restricted));
        Ok((restricted, closure))
    }
}

/// Null space of `P_g − I` stacked over the generators `(1,0)` and `(0,1)`.
pub fn invariant_subspace(sum: &DirectSum) -> InvariantSubspace {
    let spec = &sum.spec;
    let total = sum.rep.dim;
    let mut gens = Vec::new();
    if spec.m() > 1 {
        gens.push(GroupElement { a: 1, b: 0 });
    }
    if spec.n() > 1 {
        gens.push(GroupElement { a: 0, b: 1 });
    }
    if gens.is_empty() {
        return InvariantSubspace { basis: identity(total) };
    }
    let mut stacked = CMatrix::zeros(total * gens.len(), total);
    for (i, g) in gens.iter().enumerate() {
        stacked
            .view_mut((i * total, 0), (total, total))
            .copy_from(&(sum.perm(*g) - identity(total)));
    }
    let vecs = null_space(&stacked, NULL_TOL);
    let basis = CMatrix::from_columns(&vecs);
    InvariantSubspace { basis }
}

/// Generator-level check of the matrix-amplified identification between the
/// covers with twists `k` and `0`.
#[derive(Clone, Debug)]
pub struct MoritaReport {
    pub m: u32,
    pub n: u32,
    pub k: u64,
    pub q: u64,
    /// `N = mn`.
    pub dim: usize,
    pub u: CMatrix,
    pub v: CMatrix,
    /// `‖UV − e^{2πik/N} VU‖`.
    pub clock_shift_residual: f64,
    pub unitary_residual: f64,
    /// `‖XY − e^{2πiθ''} YX‖` for `X = ρ'(u')⊗U`, `Y = ρ'(v')⊗V`.
    pub witness_residual: f64,
    /// The same test for `ρ''(u'')⊗U`, `ρ''(v'')⊗V` against `θ'`.
    pub reverse_residual: f64,
    pub pass: bool,
}

impl MoritaReport {
    pub fn to_json_value(&self, include_matrices: bool) -> serde_json::Value {
        let mut v = serde_json::json!({
            "m": self.m,
            "n": self.n,
            "k": self.k,
            "q": self.q,
            "dim": self.dim,
            "clock_shift_residual": self.clock_shift_residual,
            "unitary_residual": self.unitary_residual,
            "witness_residual": self.witness_residual,
            "reverse_residual": self.reverse_residual,
            "pass": self.pass,
        });
        if include_matrices {
            v["U"] = matrix_to_json(&self.u);
            v["V"] = matrix_to_json(&self.v);
        }
        v
    }
}

/// Builds `N×N` unitaries with `UV = e^{2πik/N} VU` and checks that
/// `u''⊗1 ↦ u'⊗U`, `v''⊗1 ↦ v'⊗V` respects the relations, using
/// `θ = 1/q`, `θ' = θ/N` and `θ'' = (θ + k)/N` in their clock/shift models.
pub fn morita_twist_witness(m: u32, n: u32, k: u64, q: u64) -> Result<MoritaReport> {
    if m == 0 || n == 0 || q == 0 {
        return Err(Error::InvalidArgument("m, n and q must be positive".into()));
    }
    let big_n = m as u64 * n as u64;
    let dim = big_n as usize;
    let (u, v) = if k.is_multiple_of(big_n) {
        (identity(dim), identity(dim))
    } else {
        let u = CMatrix::from_diagonal(&DVector::from_fn(dim, |j, _| unit_root(k as i128 * j as i128, big_n)));
        (u, shift_matrix(dim))
    };
    let twist = unit_root(k as i128, big_n);
    let clock_shift_residual = op_norm(&(&u * &v - &v * &u * twist));
    let unitary = unitary_residual(&u).max(unitary_residual(&v));

    let qn = q * big_n;
    let primed = clock_shift_rep(1, qn)?;
    let double = clock_shift_rep(1 + (k % big_n) as i64 * q as i64, qn)?;
    let (p_theta, d_theta) = (primed.params.expect("torus"), double.params.expect("torus"));

    let x = kron(primed.generator("u").unwrap(), &u);
    let y = kron(primed.generator("v").unwrap(), &v);
    let witness_residual = relation_residual(&x, &y, d_theta);

    let xr = kron(double.generator("u").unwrap(), &u);
    let yr = kron(double.generator("v").unwrap(), &v);
    let reverse_residual = relation_residual(&xr, &yr, p_theta);

    let pass = clock_shift_residual < REP_TOL && witness_residual < REP_TOL && unitary < REP_TOL;
    Ok(MoritaReport {
        m,
        n,
        k,
        q,
        dim,
        u,
        v,
        clock_shift_residual,
        unitary_residual: unitary,
        witness_residual,
        reverse_residual,
        pass,
    })
}

/// Eigenvalue multisets of `ρ(u)`, `ρ(v)` and `ρ(uv)`, each sorted by angle.
pub fn spectral_fingerprint(rep: &MatrixRep) -> Result<[Vec<Complex64>; 3]> {
    let u = rep
        .generator("u")
        .ok_or_else(|| Error::InvalidArgument("missing `u`".into()))?;
    let v = rep
        .generator("v")
        .ok_or_else(|| Error::InvalidArgument("missing `v`".into()))?;
    let sorted = |m: &CMatrix| -> Result<Vec<Complex64>> {
        let mut e = normal_eigenvalues(m)?;
        e.sort_by(|a, b| a.arg().total_cmp(&b.arg()));
        Ok(e)
    };
    Ok([sorted(u)?, sorted(v)?, sorted(&(u * v))?])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, multiset_eq};

    fn spec(m: u32, n: u32, theta: TorusParams) -> CoveringSpec {
        CoveringSpec::new(m, n, 0, theta).unwrap()
    }

    #[test]
    fn clock_shift_examples() {
        let r = clock_shift_rep(0, 1).unwrap();
        assert_eq!(r.dim(), 1);
        assert_eq!(r.generator("u").unwrap()[(0, 0)], c(1.0, 0.0));
        let r = clock_shift_rep(1, 2).unwrap();
        let (u, v) = (r.generator("u").unwrap(), r.generator("v").unwrap());
        assert!(op_norm(&(u * v + v * u)) < 1e-12);
        assert!(clock_shift_rep(1, 5).unwrap().relation_residual() < 1e-12);
        assert!(clock_shift_rep(1, 0).is_err());
    }

    #[test]
    fn rep_validation() {
        let bad = CMatrix::from_element(2, 2, c(1.0, 0.0));
        assert!(matches!(
            MatrixRep::new(None, vec![("u".into(), bad)]),
            Err(Error::NotUnitary { .. })
        ));
        let u = identity(2);
        let v = shift_matrix(2);
        // u and v commute, which is wrong for θ = 1/2
        let half = TorusParams::rational(1, 2).unwrap();
        assert!(MatrixRep::new(Some(half), vec![("u".into(), u.clone()), ("v".into(), v)]).is_err());
        assert!(MatrixRep::new(Some(half), vec![("u".into(), u)]).is_err());
    }

    #[test]
    fn evaluate_unit_and_mismatch() {
        let r = clock_shift_rep(1, 5).unwrap();
        let one = TorusElement::one(TorusParams::rational(1, 5).unwrap());
        assert_eq!(evaluate(&r, &one).unwrap(), identity(5));
        // θ = 6/5 is the same algebra
        let shifted = TorusElement::u(TorusParams::rational(6, 5).unwrap());
        assert!(evaluate(&r, &shifted).is_ok());
        let other = TorusElement::u(TorusParams::rational(2, 5).unwrap());
        assert!(matches!(evaluate(&r, &other), Err(Error::ThetaMismatch { .. })));
    }

    #[test]
    fn evaluate_is_multiplicative() {
        let theta = TorusParams::rational(2, 7).unwrap();
        let r = clock_shift_rep(2, 7).unwrap();
        let mut rng = random::rng(11);
        for _ in 0..5 {
            let a = random::element(&mut rng, theta, 4, 6);
            let b = random::element(&mut rng, theta, 4, 6);
            let lhs = evaluate(&r, &a.mul(&b).unwrap()).unwrap();
            let rhs = evaluate(&r, &a).unwrap() * evaluate(&r, &b).unwrap();
            assert!(op_norm(&(lhs - rhs)) < 1e-10);
            let adj = evaluate(&r, &a.adjoint()).unwrap();
            assert!(op_norm(&(adj - evaluate(&r, &a).unwrap().adjoint())) < 1e-10);
        }
    }

    #[test]
    fn trace_matches_tau0() {
        for q in [1u64, 2, 5, 8] {
            let r = clock_shift_rep(1, q).unwrap();
            assert!(trace_compatibility_residual(&r, q as i64).unwrap() < 1e-12, "q={q}");
        }
        // u^q is the identity, so the bound is sharp
        let r = clock_shift_rep(1, 3).unwrap();
        assert!(trace_compatibility_residual(&r, 4).unwrap() > 0.5);
    }

    #[test]
    fn twisting() {
        let theta = TorusParams::rational(1, 3).unwrap();
        let sp = spec(3, 1, theta);
        let r = clock_shift_rep(1, 3).unwrap();
        let id = twisted_rep(GroupElement::IDENTITY, &r, &sp).unwrap();
        assert_eq!(id.generator("u"), r.generator("u"));
        let g = GroupElement { a: 1, b: 0 };
        let t = twisted_rep(g, &r, &sp).unwrap();
        let expected = r.generator("u").unwrap() * unit_root(1, 3);
        assert!(op_norm(&(t.generator("u").unwrap() - expected)) < 1e-15);
        assert!(t.relation_residual() < 1e-12);
        assert!(twisted_rep(GroupElement { a: 3, b: 0 }, &r, &sp).is_err());
    }

    #[test]
    fn self_intertwiner_is_identity() {
        let r = clock_shift_rep(1, 5).unwrap();
        let res = solve_intertwiner(&r, &r).unwrap();
        assert_eq!(res.status, IntertwinerStatus::UnitaryEquivalent);
        let w = res.witness.unwrap();
        assert!(op_norm(&(w - identity(5))) < 1e-10);
    }

    #[test]
    fn twist_by_full_period_is_inner() {
        // for m | q the shift conjugates u to ω u
        let r = clock_shift_rep(1, 3).unwrap();
        let sp = spec(3, 1, TorusParams::rational(1, 3).unwrap());
        let t = twisted_rep(GroupElement { a: 1, b: 0 }, &r, &sp).unwrap();
        let res = solve_intertwiner(&r, &t).unwrap();
        assert_eq!(res.status, IntertwinerStatus::UnitaryEquivalent);
        assert!(res.residual < 1e-10);
    }

    #[test]
    fn incompatible_twist_is_inequivalent() {
        let r = clock_shift_rep(1, 3).unwrap();
        let sp = spec(2, 1, TorusParams::rational(1, 3).unwrap());
        let t = twisted_rep(GroupElement { a: 1, b: 0 }, &r, &sp).unwrap();
        let res = solve_intertwiner(&r, &t).unwrap();
        assert_eq!(res.status, IntertwinerStatus::Inequivalent);
        let [eu, _, _] = spectral_fingerprint(&r).unwrap();
        let [tu, _, _] = spectral_fingerprint(&t).unwrap();
        assert!(!multiset_eq(&eu, &tu, 1e-9));
    }

    #[test]
    fn reducible_reps_use_polar_witness() {
        let theta = TorusParams::rational(0, 1).unwrap();
        let u = CMatrix::from_diagonal(&DVector::from_vec(vec![c(1.0, 0.0), c(1.0, 0.0)]));
        let a = MatrixRep::new(Some(theta), vec![("u".into(), u.clone()), ("v".into(), u.clone())]).unwrap();
        let res = solve_intertwiner(&a, &a).unwrap();
        assert_eq!(res.null_dim, 4);
        assert_eq!(res.status, IntertwinerStatus::UnitaryEquivalent);
        assert!(res.residual < 1e-8);
    }

    #[test]
    fn dimension_mismatch() {
        let a = clock_shift_rep(1, 3).unwrap();
        let b = clock_shift_rep(1, 4).unwrap();
        assert!(matches!(solve_intertwiner(&a, &b), Err(Error::DimensionMismatch(3, 4))));
    }

    #[test]
    fn probe_on_trivial_group_is_empty() {
        let r = clock_shift_rep(1, 3).unwrap();
        let sp = spec(1, 1, TorusParams::rational(1, 3).unwrap());
        assert!(free_action_probe(&sp, &r, false).unwrap().is_empty());
    }

    #[test]
    fn direct_sum_structure() {
        let theta = TorusParams::rational(1, 2).unwrap();
        let sp = spec(2, 2, theta);
        let r = clock_shift_rep(1, 2).unwrap();
        let ds = equivariant_direct_sum(&r, &sp).unwrap();
        assert_eq!(ds.blocks(), 4);
        assert_eq!(ds.rep().dim(), 8);
        assert!(ds.compatibility_residual() < 1e-12);
        assert!(ds.product_law_residual() < 1e-12);
        let k = invariant_subspace(&ds);
        assert_eq!(k.dim(), 2);
    }

    #[test]
    fn direct_sum_on_trivial_group() {
        let theta = TorusParams::rational(1, 3).unwrap();
        let sp = spec(1, 1, theta);
        let r = clock_shift_rep(1, 3).unwrap();
        let ds = equivariant_direct_sum(&r, &sp).unwrap();
        assert_eq!(ds.rep().dim(), 3);
        let k = invariant_subspace(&ds);
        assert_eq!(k.basis, identity(3));
        let (eta, closure) = k.eta(&ds, &TorusElement::u(theta)).unwrap();
        assert!(op_norm(&(eta - r.generator("u").unwrap())) < 1e-15);
        assert_eq!(closure, 0.0);
    }

    #[test]
    fn morita_trivial_twist() {
        let rep = morita_twist_witness(2, 2, 0, 3).unwrap();
        assert_eq!(rep.u, identity(4));
        assert!(rep.pass);
        assert!(rep.reverse_residual < 1e-10);
    }

    #[test]
    fn morita_nontrivial() {
        for (m, n, k) in [(2, 2, 1), (2, 3, 5)] {
            let rep = morita_twist_witness(m, n, k, 3).unwrap();
            assert!(rep.witness_residual < 1e-10, "{m} {n} {k}");
            assert!(rep.clock_shift_residual < 1e-10);
            assert!(rep.pass);
        }
    }
}
