//! Branch `n`-th roots of unitaries, extension algebras generated by such a
//! root, and the two-dimensional example where the twist is inner.

use std::f64::consts::{PI, TAU};

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::galois::GroupElement;
use crate::kinv::SampledLoop;
use crate::linalg::{identity, normal_eig, normal_eigenvalues, op_norm, trace_inner, trace_norm, unitary_pow, CMatrix};
use crate::rep::{free_action_probe, solve_intertwiner, twisted_rep, IntertwinerResult, IntertwinerStatus, MatrixRep};
use crate::torus::{CoveringSpec, TorusParams};

/// Default clearance between a spectral point and the branch cut.
pub const DEFAULT_CLEARANCE: f64 = TAU / 1e4;
pub const DEFAULT_WORD_LENGTH: usize = 4;
pub const DEFAULT_DIM_CAP: usize = 4096;
/// Distance below which a matrix counts as a member of a span.
pub const MEMBER_TOL: f64 = 1e-8;

const ORTHO_TOL: f64 = 1e-9;

/// `z = e^{iψ}` with `ψ ∈ (α − 2π, α]` maps to `e^{iψ/n}`.
///
/// With `α = π` this is the principal branch.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RootBranch {
    n: u32,
    cut: f64,
}

impl RootBranch {
    /// `cut` is reduced to `[0, 2π)`.
    pub fn new(n: u32, cut: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("root order must be positive".into()));
        }
        if !cut.is_finite() {
            return Err(Error::InvalidArgument(format!("branch cut {cut} is not finite")));
        }
        Ok(Self {
            n,
            cut: cut.rem_euclid(TAU),
        })
    }

    pub fn principal(n: u32) -> Result<Self> {
        Self::new(n, PI)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn cut(&self) -> f64 {
        self.cut
    }

    /// The representative `ψ ∈ (α − 2π, α]` of `arg z`.
    pub fn angle(&self, z: Complex64) -> f64 {
        self.cut - (self.cut - z.arg()).rem_euclid(TAU)
    }

    /// Angular distance from `z` to the cut.
    pub fn distance_to_cut(&self, z: Complex64) -> f64 {
        let d = (self.cut - z.arg()).rem_euclid(TAU);
        d.min(TAU - d)
    }

    pub fn apply_scalar(&self, z: Complex64) -> Complex64 {
        Complex64::from_polar(z.norm().powf(1.0 / self.n as f64), self.angle(z) / self.n as f64)
    }
}

/// `φ(U)` through the eigendecomposition of `U`.
pub fn root_branch_apply(u: &CMatrix, branch: &RootBranch) -> Result<CMatrix> {
    root_branch_apply_with(u, branch, DEFAULT_CLEARANCE)
}

/// As [`root_branch_apply`] with an explicit clearance around the cut.
pub fn root_branch_apply_with(u: &CMatrix, branch: &RootBranch, clearance: f64) -> Result<CMatrix> {
    let (q, eig) = normal_eig(u)?;
    for z in &eig {
        if branch.distance_to_cut(*z) < clearance {
            return Err(Error::NearBranchCut {
                angle: z.arg(),
                cut: branch.cut,
                delta: clearance,
            });
        }
    }
    let roots = DVector::from_iterator(eig.len(), eig.iter().map(|z| branch.apply_scalar(*z)));
    Ok(&q * CMatrix::from_diagonal(&roots) * q.adjoint())
}

/// Orthonormalizes in the trace inner product with modified Gram-Schmidt
/// and one re-orthogonalization pass. Candidates whose remainder is below
/// `1e-9` of their own size are dropped.
pub fn orthonormalize(mats: &[CMatrix]) -> Vec<CMatrix> {
    let mut basis: Vec<CMatrix> = Vec::new();
    for m in mats {
        push_orthonormal(&mut basis, m);
    }
    basis
}

/// Adds the normalized remainder of `m` to `basis` if it is independent.
fn push_orthonormal(basis: &mut Vec<CMatrix>, m: &CMatrix) -> bool {
    let size = trace_norm(m);
    if size == 0.0 {
        return false;
    }
    let mut r = m.clone();
    for _ in 0..2 {
        for b in basis.iter() {
            let c = trace_inner(b, &r);
            r -= b * c;
        }
    }
    let rest = trace_norm(&r);
    if rest <= ORTHO_TOL * size {
        return false;
    }
    basis.push(r / Complex64::new(rest, 0.0));
    true
}

/// `‖M − P(M)‖` in the trace norm, `P` the projection onto the span of an
/// orthonormal basis.
pub fn span_membership(m: &CMatrix, basis: &[CMatrix]) -> f64 {
    let mut r = m.clone();
    for b in basis {
        let c = trace_inner(b, m);
        r -= b * c;
    }
    trace_norm(&r)
}

/// Orthonormal basis of the span of all words of length `≤ max_len` in the
/// generators and their adjoints, including the empty word.
///
/// Only words that enlarged the span are extended to the next length; the
/// span of all words of a given length is still reached.
pub fn word_basis(gens: &[CMatrix], max_len: usize, cap: usize) -> Result<Vec<CMatrix>> {
    let dim = gens
        .first()
        .map(|g| g.nrows())
        .ok_or_else(|| Error::InvalidArgument("need at least one generator".into()))?;
    let letters: Vec<CMatrix> = gens.iter().flat_map(|g| [g.clone(), g.adjoint()]).collect();
    let mut basis = Vec::new();
    let one = identity(dim);
    push_orthonormal(&mut basis, &one);
    let mut frontier = vec![one];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &frontier {
            for x in &letters {
                let word = w * x;
                if push_orthonormal(&mut basis, &word) {
                    if basis.len() > cap {
                        return Err(Error::BasisOverflow { cap });
                    }
                    next.push(word);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    Ok(basis)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExtensionVerdict {
    /// `v^i` is outside the base for `0 < i < n` and `v^n` is inside.
    Proper,
    /// `v` already lies in the base.
    Trivial,
    /// Neither of the above; `v^n` escapes the base.
    NotRoot,
}

impl ExtensionVerdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Proper => "proper_extension",
            Self::Trivial => "trivial_extension",
            Self::NotRoot => "not_a_root",
        }
    }
}

/// The base span, the span enlarged by `v`, and membership of the powers
/// of `v`.
#[derive(Clone, Debug)]
pub struct ExtensionAlgebra {
    pub n: u32,
    pub word_length: usize,
    pub base_basis: Vec<CMatrix>,
    pub ext_basis: Vec<CMatrix>,
    /// `(i, dist(v^i, base))` for `i = 1..=n`.
    pub membership: Vec<(u32, f64)>,
    pub verdict: ExtensionVerdict,
}

impl ExtensionAlgebra {
    pub fn base_dim(&self) -> usize {
        self.base_basis.len()
    }

    pub fn ext_dim(&self) -> usize {
        self.ext_basis.len()
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::json!({
            "dims": {"base": self.base_dim(), "extension": self.ext_dim()},
            "membership": self.membership.iter().map(|(i, d)| serde_json::json!({"power": i, "distance": d})).collect::<Vec<_>>(),
            "verdict": self.verdict.as_str(),
        })
    }
}

/// Words of length `≤ word_length` in the base generators span the base;
/// the extension adds `v^i b` and `b v^i` for every base vector `b` and
/// `0 < i < n`.
pub fn build_extension(
    base: &MatrixRep,
    v: &CMatrix,
    n: u32,
    word_length: usize,
    cap: usize,
) -> Result<ExtensionAlgebra> {
    if n == 0 {
        return Err(Error::InvalidArgument("root order must be positive".into()));
    }
    if v.nrows() != base.dim() || v.ncols() != base.dim() {
        return Err(Error::DimensionMismatch(v.nrows(), base.dim()));
    }
    let gens: Vec<CMatrix> = base.gens().iter().map(|g| g.1.clone()).collect();
    let base_basis = word_basis(&gens, word_length, cap)?;
    let mut ext_basis = base_basis.clone();
    for i in 1..n {
        let vi = unitary_pow(v, i as i64);
        for b in &base_basis {
            for cand in [&vi * b, b * &vi] {
                if push_orthonormal(&mut ext_basis, &cand) && ext_basis.len() > cap {
                    return Err(Error::BasisOverflow { cap });
                }
            }
        }
    }
    let membership: Vec<(u32, f64)> = (1..=n)
        .map(|i| (i, span_membership(&unitary_pow(v, i as i64), &base_basis)))
        .collect();
    let verdict = if membership[0].1 < MEMBER_TOL {
        ExtensionVerdict::Trivial
    } else if membership[..n as usize - 1].iter().all(|m| m.1 >= MEMBER_TOL)
        && membership[n as usize - 1].1 < MEMBER_TOL
    {
        ExtensionVerdict::Proper
    } else {
        ExtensionVerdict::NotRoot
    };
    Ok(ExtensionAlgebra {
        n,
        word_length,
        base_basis,
        ext_basis,
        membership,
        verdict,
    })
}

/// Largest gap between adjacent angles on the circle; `2π` for fewer than
/// two distinct points.
pub fn spectrum_gap_of_angles(angles: &[f64]) -> f64 {
    if angles.is_empty() {
        return TAU;
    }
    let mut a: Vec<f64> = angles.iter().map(|x| x.rem_euclid(TAU)).collect();
    a.sort_by(f64::total_cmp);
    let wrap = TAU - (a[a.len() - 1] - a[0]);
    a.windows(2).map(|w| w[1] - w[0]).fold(wrap, f64::max)
}

pub fn spectrum_gap(u: &CMatrix) -> Result<f64> {
    let angles: Vec<f64> = normal_eigenvalues(u)?.iter().map(|z| z.arg()).collect();
    Ok(spectrum_gap_of_angles(&angles))
}

pub fn spectrum_gap_loop(lp: &SampledLoop) -> f64 {
    let angles: Vec<f64> = lp.samples().iter().map(|z| z.arg()).collect();
    spectrum_gap_of_angles(&angles)
}

/// `R(φ) = [[cos φ, −sin φ], [sin φ, cos φ]]`.
pub fn rotation(phi: f64) -> CMatrix {
    let (s, c) = phi.sin_cos();
    CMatrix::from_row_slice(
        2,
        2,
        &[
            Complex64::new(c, 0.0),
            Complex64::new(-s, 0.0),
            Complex64::new(s, 0.0),
            Complex64::new(c, 0.0),
        ],
    )
}

/// The two-dimensional example: `v = diag(1, −1)` with `g·v = −v`, and a
/// `g`-fixed rotation `w = R(π/4)`.
#[derive(Clone, Debug)]
pub struct Su2Report {
    pub rep: MatrixRep,
    pub twisted: MatrixRep,
    /// `‖ρ_g(v) + ρ(v)‖`.
    pub twist_residual: f64,
    pub intertwiner: IntertwinerResult,
    /// `min_α ‖W − e^{iα} P‖`, `P = [[0, −1], [1, 0]]`.
    pub proportionality_residual: f64,
    /// `‖P diag(−1, 1) P⁻¹ − diag(1, −1)‖`.
    pub conjugation_residual: f64,
    pub fixed_point: bool,
    pub extension: ExtensionAlgebra,
    pub strictly_outer: bool,
}

impl Su2Report {
    pub fn conclusion(&self) -> &'static str {
        if self.strictly_outer {
            "action is strictly outer on the probed representation"
        } else {
            "extension is NOT a noncommutative covering projection (action not strictly outer)"
        }
    }

    pub fn to_json_value(&self, include_witness: bool) -> serde_json::Value {
        serde_json::json!({
            "twist_residual": self.twist_residual,
            "intertwiner": self.intertwiner.to_json_value(include_witness),
            "proportionality_residual": self.proportionality_residual,
            "conjugation_residual": self.conjugation_residual,
            "fixed_point": self.fixed_point,
            "extension": self.extension.to_json_value(),
            "verdict": if self.strictly_outer { "strictly outer" } else { "not strictly outer" },
            "conclusion": self.conclusion(),
        })
    }
}

pub fn reference_witness() -> CMatrix {
    rotation(PI / 2.0).map(|z| Complex64::new(z.re.round(), 0.0))
}

fn diag2(a: f64, b: f64) -> CMatrix {
    CMatrix::from_diagonal(&DVector::from_vec(vec![Complex64::new(a, 0.0), Complex64::new(b, 0.0)]))
}

pub fn su2_counterexample() -> Result<Su2Report> {
    let v = diag2(1.0, -1.0);
    let w = rotation(PI / 4.0);
    let rep = MatrixRep::new(None, vec![("v".into(), v.clone()), ("w".into(), w.clone())])?;
    // G = Z_2 acting on v only; θ plays no role for these generators
    let spec = CoveringSpec::new(1, 2, 0, TorusParams::rational(0, 1)?)?;
    let g = GroupElement { a: 0, b: 1 };
    let twisted = twisted_rep(g, &rep, &spec)?;
    let twist_residual = op_norm(&(twisted.generator("v").expect("v") + &v));

    let intertwiner = solve_intertwiner(&rep, &twisted)?;
    let p = reference_witness();
    let proportionality_residual = match &intertwiner.witness {
        Some(wit) => {
            let c = trace_inner(&p, wit);
            if c.norm() == 0.0 {
                f64::INFINITY
            } else {
                op_norm(&(wit - &p * (c / c.norm())))
            }
        }
        None => f64::INFINITY,
    };
    let p_inv = p.adjoint();
    let conjugation_residual = op_norm(&(&p * diag2(-1.0, 1.0) * p_inv - &v));

    let probe = free_action_probe(&spec, &rep, false)?;
    let fixed_point = probe.iter().any(|e| e.fixed_point());

    // base algebra: u = v² and the fixed rotation
    let base = MatrixRep::new(None, vec![("u".into(), &v * &v), ("w".into(), w)])?;
    let extension = build_extension(&base, &v, 2, DEFAULT_WORD_LENGTH, DEFAULT_DIM_CAP)?;

    Ok(Su2Report {
        rep,
        twisted,
        twist_residual,
        strictly_outer: intertwiner.status != IntertwinerStatus::UnitaryEquivalent,
        intertwiner,
        proportionality_residual,
        conjugation_residual,
        fixed_point,
        extension,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;
    use crate::random;

    #[test]
    fn branch_angles() {
        let b = RootBranch::principal(2).unwrap();
        assert_eq!(b.angle(c(1.0, 0.0)), 0.0);
        assert!((b.angle(c(-1.0, 0.0)) - PI).abs() < 1e-15);
        let b = RootBranch::new(2, -PI / 2.0).unwrap();
        assert!((b.cut() - 1.5 * PI).abs() < 1e-15);
        // −i sits on the cut and belongs to the upper end of the range
        assert!((b.angle(c(0.0, -1.0)) - 1.5 * PI).abs() < 1e-15);
        assert!(RootBranch::new(0, 0.0).is_err());
    }

    #[test]
    fn identity_root() {
        let v = root_branch_apply(&identity(3), &RootBranch::principal(2).unwrap()).unwrap();
        assert!(op_norm(&(v - identity(3))) < 1e-15);
    }

    #[test]
    fn sign_matrix_root() {
        let u = diag2(1.0, -1.0);
        let b = RootBranch::new(2, 1.5 * PI).unwrap();
        let v = root_branch_apply(&u, &b).unwrap();
        assert!(op_norm(&(&v * &v - &u)) < 1e-12);
        assert!((v[(0, 1)]).norm() < 1e-15);
    }

    #[test]
    fn near_cut_rejected() {
        let u = diag2(1.0, -1.0);
        let err = root_branch_apply(&u, &RootBranch::principal(2).unwrap()).unwrap_err();
        assert!(matches!(err, Error::NearBranchCut { .. }));
    }

    #[test]
    fn random_roots() {
        let mut rng = random::rng(5);
        let b = RootBranch::new(3, 1.0).unwrap();
        let lo = b.cut() - TAU + 0.01;
        let u = random::unitary_with_spectrum_in(&mut rng, 8, lo, b.cut() - 0.01);
        let v = root_branch_apply(&u, &b).unwrap();
        assert!(op_norm(&(unitary_pow(&v, 3) - &u)) < 1e-10);
    }

    #[test]
    fn membership_basics() {
        let gens = vec![diag2(1.0, -1.0)];
        let basis = word_basis(&gens, 2, 16).unwrap();
        assert_eq!(basis.len(), 2);
        assert!(span_membership(&basis[1], &basis) < 1e-12);
        assert!(span_membership(&identity(2), &basis) < 1e-12);
        assert!((span_membership(&reference_witness(), &basis) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cap_enforced() {
        let gens = vec![rotation(0.3), diag2(1.0, -1.0)];
        assert!(matches!(word_basis(&gens, 4, 2), Err(Error::BasisOverflow { cap: 2 })));
        assert_eq!(word_basis(&gens, 4, 16).unwrap().len(), 4);
    }

    #[test]
    fn trivial_extension() {
        let base = MatrixRep::new(None, vec![("u".into(), diag2(1.0, -1.0))]).unwrap();
        let ext = build_extension(&base, &diag2(-1.0, 1.0), 2, 4, 64).unwrap();
        assert_eq!(ext.verdict, ExtensionVerdict::Trivial);
        assert_eq!(ext.base_dim(), ext.ext_dim());
    }

    #[test]
    fn gaps() {
        assert_eq!(spectrum_gap(&identity(3)).unwrap(), TAU);
        let q = 5;
        let d = CMatrix::from_diagonal(&DVector::from_fn(q, |j, _| {
            Complex64::from_polar(1.0, TAU * j as f64 / q as f64)
        }));
        assert!((spectrum_gap(&d).unwrap() - TAU / q as f64).abs() < 1e-12);
        let lp = SampledLoop::generator(4096).unwrap().power(2);
        assert!(spectrum_gap_loop(&lp) <= TAU * 2.0 / 4096.0 * 1.01);
    }

    #[test]
    fn su2_example() {
        let r = su2_counterexample().unwrap();
        assert!(r.twist_residual < 1e-15);
        assert_eq!(r.intertwiner.status, IntertwinerStatus::UnitaryEquivalent);
        assert!(r.intertwiner.residual < 1e-10);
        assert!(r.proportionality_residual < 1e-10);
        assert!(r.conjugation_residual < 1e-15);
        assert!(r.fixed_point);
        assert!(!r.strictly_outer);
        assert_eq!(r.extension.verdict, ExtensionVerdict::Proper);
        assert!(r.extension.membership[0].1 > 0.1);
        assert_eq!(r.extension.ext_dim(), 2 * r.extension.base_dim());
    }
}
