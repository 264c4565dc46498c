//! The `ℤ_m × ℤ_n` action on a torus cover `A_θ'`, its fixed-point algebra,
//! and the canonical Galois map
//!
//! ```text
//! can: A_θ' ⊗_{A_θ} A_θ' → Map(G, A_θ'),   a ⊗ b ↦ (g ↦ a·(g b))
//! ```
//!
//! together with its inverse by character inversion over `G`.

use std::collections::{BTreeMap, BTreeSet};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{singular_values, CMatrix};
use crate::random;
use crate::torus::{embed_cover, unit_root, CoveringSpec, Monomial, TorusElement};

/// Pass threshold for Galois round trips.
pub const GALOIS_TOL: f64 = 1e-10;

/// An element `(a, b)` of `ℤ_m × ℤ_n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct GroupElement {
    pub a: u32,
    pub b: u32,
}

impl GroupElement {
    pub const IDENTITY: GroupElement = GroupElement { a: 0, b: 0 };

    pub fn new(spec: &CoveringSpec, a: u32, b: u32) -> Result<Self> {
        if a >= spec.m() || b >= spec.n() {
            return Err(Error::InvalidArgument(format!(
                "({a}, {b}) is not an element of Z_{} x Z_{}",
                spec.m(),
                spec.n()
            )));
        }
        Ok(Self { a, b })
    }

    pub fn is_identity(&self) -> bool {
        self.a == 0 && self.b == 0
    }

    pub fn compose(&self, other: &Self, spec: &CoveringSpec) -> Self {
        Self {
            a: (self.a + other.a) % spec.m(),
            b: (self.b + other.b) % spec.n(),
        }
    }

    pub fn inverse(&self, spec: &CoveringSpec) -> Self {
        Self {
            a: (spec.m() - self.a) % spec.m(),
            b: (spec.n() - self.b) % spec.n(),
        }
    }

    /// Position in the enumeration used throughout: `a·n + b`.
    pub fn index(&self, spec: &CoveringSpec) -> usize {
        self.a as usize * spec.n() as usize + self.b as usize
    }
}

/// All of `G` in index order.
pub fn group_elements(spec: &CoveringSpec) -> Vec<GroupElement> {
    (0..spec.m())
        .flat_map(|a| (0..spec.n()).map(move |b| GroupElement { a, b }))
        .collect()
}

/// `χ_rs(g) = e^{2πi(g.a·r/m + g.b·s/n)}`, the scalar by which `g` moves
/// `u'^r v'^s`.
pub fn character(spec: &CoveringSpec, g: GroupElement, r: i64, s: i64) -> Complex64 {
    let (m, n) = (spec.m() as i128, spec.n() as i128);
    let num = g.a as i128 * r as i128 * n + g.b as i128 * s as i128 * m;
    unit_root(num, (m * n) as u64)
}

fn check_cover(spec: &CoveringSpec, a: &TorusElement) -> Result<()> {
    if spec.cover().compatible(&a.params()) {
        Ok(())
    } else {
        Err(Error::ParamsMismatch {
            left: spec.cover().to_string(),
            right: a.params().to_string(),
        })
    }
}

/// `u' ↦ e^{2πi/m} u'`, `v' ↦ e^{2πi/n} v'` raised to `g`.
pub fn act(spec: &CoveringSpec, g: GroupElement, a: &TorusElement) -> Result<TorusElement> {
    check_cover(spec, a)?;
    Ok(a.map_coeffs(|mono, c| c * character(spec, g, mono.r, mono.s)))
}

/// The averaging projection `|G|⁻¹ Σ_g g·a` onto `A_θ'^G`.
///
/// The character sum `|G|⁻¹ Σ_g χ_rs(g)` is evaluated in integer arithmetic
/// (it is 1 when `m | r` and `n | s`, else 0), so the result is an exact
/// sub-sum of the input. [`group_average`] is the floating point route.
pub fn project_invariant(spec: &CoveringSpec, a: &TorusElement) -> Result<TorusElement> {
    check_cover(spec, a)?;
    let (m, n) = (spec.m() as i64, spec.n() as i64);
    let order = spec.order() as i64;
    Ok(a.filter(|mono| {
        let row: i64 = (0..m).map(|p| i64::from((p * mono.r).rem_euclid(m) == 0)).sum();
        let col: i64 = (0..n).map(|q| i64::from((q * mono.s).rem_euclid(n) == 0)).sum();
        // the orbit sum of roots of unity is |G| exactly when both are trivial
        row * col == order
    }))
}

/// `|G|⁻¹ Σ_g act(g, a)` summed numerically.
pub fn group_average(spec: &CoveringSpec, a: &TorusElement) -> Result<TorusElement> {
    let mut acc = TorusElement::zero(spec.cover());
    for g in group_elements(spec) {
        acc = acc.add(&act(spec, g, a)?)?;
    }
    Ok(acc.scale(Complex64::new(1.0 / spec.order() as f64, 0.0)))
}

/// `(u'^{R-r} v'^{S-s})(u'^r v'^s) = e^{-2πiθ'(S-s)r} u'^R v'^S`; this is the
/// phase that makes `a_rs · u'^r v'^s` reproduce the original term.
fn left_coefficient_phase(spec: &CoveringSpec, mono: Monomial, r: i64) -> Complex64 {
    let s = mono.s.rem_euclid(spec.n() as i64);
    spec.cover().phase((mono.s - s) * r)
}

/// The unique decomposition `a = Σ_{0≤r<m, 0≤s<n} a_rs u'^r v'^s` with every
/// `a_rs` in the image of the covering embedding.
pub fn module_decompose(spec: &CoveringSpec, a: &TorusElement) -> Result<BTreeMap<Monomial, TorusElement>> {
    check_cover(spec, a)?;
    let (m, n) = (spec.m() as i64, spec.n() as i64);
    let mut buckets: BTreeMap<Monomial, Vec<(Monomial, Complex64)>> = BTreeMap::new();
    for (mono, c) in a.terms() {
        let r = mono.r.rem_euclid(m);
        let s = mono.s.rem_euclid(n);
        let coeff = c * left_coefficient_phase(spec, mono, r);
        buckets
            .entry(Monomial::new(r, s))
            .or_default()
            .push((Monomial::new(mono.r - r, mono.s - s), coeff));
    }
    Ok(buckets
        .into_iter()
        .map(|(basis, terms)| (basis, TorusElement::from_terms(spec.cover(), terms)))
        .collect())
}

/// `Σ parts[rs] · u'^r v'^s`.
pub fn reassemble(spec: &CoveringSpec, parts: &BTreeMap<Monomial, TorusElement>) -> Result<TorusElement> {
    let mut acc = TorusElement::zero(spec.cover());
    for (basis, coeff) in parts {
        let mono = TorusElement::monomial(spec.cover(), basis.r, basis.s, Complex64::new(1.0, 0.0));
        acc = acc.add(&coeff.mul(&mono)?)?;
    }
    Ok(acc)
}

fn basis_monomials(spec: &CoveringSpec) -> Vec<Monomial> {
    (0..spec.m() as i64)
        .flat_map(|r| (0..spec.n() as i64).map(move |s| Monomial::new(r, s)))
        .collect()
}

/// `Σ a_rs ⊗ u'^r v'^s` in normal form over the right-module basis.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorElement {
    spec: CoveringSpec,
    components: BTreeMap<Monomial, TorusElement>,
}

impl TensorElement {
    /// Zero components may be omitted.
    pub fn new(spec: CoveringSpec, components: BTreeMap<Monomial, TorusElement>) -> Result<Self> {
        for (basis, c) in &components {
            if basis.r < 0 || basis.r >= spec.m() as i64 || basis.s < 0 || basis.s >= spec.n() as i64 {
                return Err(Error::InvalidArgument(format!("{basis} is not a module basis element")));
            }
            check_cover(&spec, c)?;
        }
        let components = components.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        Ok(Self { spec, components })
    }

    /// Normal form of `a ⊗ b`: decompose `b` over the basis and move the
    /// invariant coefficients across the tensor sign.
    pub fn from_simple(spec: CoveringSpec, a: &TorusElement, b: &TorusElement) -> Result<Self> {
        check_cover(&spec, a)?;
        let mut components = BTreeMap::new();
        for (basis, coeff) in module_decompose(&spec, b)? {
            components.insert(basis, a.mul(&coeff)?);
        }
        Self::new(spec, components)
    }

    pub fn spec(&self) -> &CoveringSpec {
        &self.spec
    }

    pub fn component(&self, r: i64, s: i64) -> TorusElement {
        self.components
            .get(&Monomial::new(r, s))
            .cloned()
            .unwrap_or_else(|| TorusElement::zero(self.spec.cover()))
    }

    pub fn components(&self) -> &BTreeMap<Monomial, TorusElement> {
        &self.components
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        let mut components = self.components.clone();
        for (basis, c) in &other.components {
            let sum = match components.get(basis) {
                Some(existing) => existing.add(c)?,
                None => c.clone(),
            };
            components.insert(*basis, sum);
        }
        Self::new(self.spec, components)
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for basis in basis_monomials(&self.spec) {
            let d = self
                .component(basis.r, basis.s)
                .max_abs_diff(&other.component(basis.r, basis.s))?;
            worst = worst.max(d);
        }
        Ok(worst)
    }
}

/// A total map `G → A_θ'`, stored in group-index order.
#[derive(Clone, Debug, PartialEq)]
pub struct EquivariantMap {
    spec: CoveringSpec,
    values: Vec<TorusElement>,
}

impl EquivariantMap {
    pub fn new(spec: CoveringSpec, values: Vec<TorusElement>) -> Result<Self> {
        if values.len() != spec.order() {
            return Err(Error::DimensionMismatch(values.len(), spec.order()));
        }
        for v in &values {
            check_cover(&spec, v)?;
        }
        Ok(Self { spec, values })
    }

    pub fn from_fn<F: FnMut(GroupElement) -> TorusElement>(spec: CoveringSpec, mut f: F) -> Result<Self> {
        let values = group_elements(&spec).into_iter().map(&mut f).collect();
        Self::new(spec, values)
    }

    pub fn spec(&self) -> &CoveringSpec {
        &self.spec
    }

    pub fn value(&self, g: GroupElement) -> &TorusElement {
        &self.values[g.index(&self.spec)]
    }

    pub fn values(&self) -> &[TorusElement] {
        &self.values
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.add(b))
            .collect::<Result<_>>()?;
        Self::new(self.spec, values)
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        if self.values.len() != other.values.len() {
            return Err(Error::DimensionMismatch(self.values.len(), other.values.len()));
        }
        let mut worst: f64 = 0.0;
        for (a, b) in self.values.iter().zip(&other.values) {
            worst = worst.max(a.max_abs_diff(b)?);
        }
        Ok(worst)
    }
}

/// `can(Σ a_rs ⊗ u'^r v'^s)(g) = Σ a_rs · (g u'^r v'^s)`.
pub fn can_apply(x: &TensorElement) -> EquivariantMap {
    let spec = x.spec;
    let values = group_elements(&spec)
        .into_iter()
        .map(|g| {
            let mut acc = TorusElement::zero(spec.cover());
            for (basis, coeff) in &x.components {
                let moved =
                    TorusElement::monomial(spec.cover(), basis.r, basis.s, character(&spec, g, basis.r, basis.s));
                acc = acc.add(&coeff.mul(&moved).expect("same params")).expect("same params");
            }
            acc
        })
        .collect();
    EquivariantMap { spec, values }
}

/// Inverts `can` by discrete character inversion over `G`:
/// `a_rs = [|G|⁻¹ Σ_g conj(χ_rs(g)) φ(g)] · (u'^r v'^s)⁻¹`.
///
/// Fails when the round trip `can(can⁻¹(φ))` misses `φ` by more than
/// [`GALOIS_TOL`] relative to the size of `φ`.
pub fn can_invert(phi: &EquivariantMap) -> Result<TensorElement> {
    let spec = phi.spec;
    let elements = group_elements(&spec);
    let inv_order = Complex64::new(1.0 / spec.order() as f64, 0.0);
    let mut components = BTreeMap::new();
    for basis in basis_monomials(&spec) {
        let mut projected = TorusElement::zero(spec.cover());
        for g in &elements {
            let chi = character(&spec, *g, basis.r, basis.s).conj();
            projected = projected.add(&phi.value(*g).scale(chi))?;
        }
        let projected = projected.scale(inv_order);
        // (u'^r v'^s)⁻¹ = (u'^r v'^s)*
        let inverse = TorusElement::monomial(spec.cover(), basis.r, basis.s, Complex64::new(1.0, 0.0)).adjoint();
        components.insert(basis, projected.mul(&inverse)?);
    }
    let x = TensorElement::new(spec, components)?;
    let scale = phi
        .values
        .iter()
        .flat_map(|v| v.terms().map(|(_, c)| c.norm()))
        .fold(1.0, f64::max);
    let residual = can_apply(&x).max_abs_diff(phi)?;
    if !(residual <= GALOIS_TOL * scale) {
        return Err(Error::NotInvertible { residual });
    }
    Ok(x)
}

/// Outcome of [`verify_galois`].
#[derive(Clone, Debug)]
pub struct GaloisReport {
    pub spec: CoveringSpec,
    pub rank: usize,
    pub max_residual_forward: f64,
    pub max_residual_inverse: f64,
    pub pass: bool,
}

impl GaloisReport {
    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::json!({
            "spec": self.spec.to_json_value(),
            "rank": self.rank,
            "max_residual_forward": self.max_residual_forward,
            "max_residual_inverse": self.max_residual_inverse,
            "pass": self.pass,
        })
    }
}

/// Numerical rank of the character matrix `[χ_rs(g)]` over the basis classes
/// that the decomposition of the degree-`truncation` box actually reaches.
pub fn free_module_rank(spec: &CoveringSpec, truncation: i64) -> Result<usize> {
    let mut classes = BTreeSet::new();
    for r in -truncation..=truncation {
        for s in -truncation..=truncation {
            let mono = TorusElement::monomial(spec.cover(), r, s, Complex64::new(1.0, 0.0));
            classes.extend(module_decompose(spec, &mono)?.into_keys());
        }
    }
    let elements = group_elements(spec);
    let rows: Vec<Monomial> = classes.into_iter().collect();
    let chi = CMatrix::from_fn(rows.len(), elements.len(), |i, j| {
        character(spec, elements[j], rows[i].r, rows[i].s)
    });
    let sv = singular_values(&chi);
    let smax = sv.first().copied().unwrap_or(0.0);
    Ok(sv.iter().filter(|s| **s > 1e-10 * smax).count())
}

/// Round trips `can⁻¹ ∘ can` and `can ∘ can⁻¹` on `trials` random inputs of
/// degree at most `truncation`, plus the free-module rank.
pub fn verify_galois(
    spec: &CoveringSpec,
    truncation: i64,
    trials: usize,
    seed: u64,
    parallel: bool,
) -> Result<GaloisReport> {
    let max_mn = spec.m().max(spec.n()) as i64;
    if truncation < max_mn {
        return Err(Error::InvalidArgument(format!(
            "truncation {truncation} must be at least max(m, n) = {max_mn}"
        )));
    }
    if trials == 0 {
        return Err(Error::InvalidArgument("at least one trial is required".into()));
    }
    let cover = spec.cover();
    let mut rng = random::rng(seed);
    let mut inputs = Vec::with_capacity(trials);
    for _ in 0..trials {
        let components = basis_monomials(spec)
            .into_iter()
            .map(|b| (b, random::element(&mut rng, cover, truncation, 8)))
            .collect();
        let x = TensorElement::new(*spec, components)?;
        let phi = EquivariantMap::from_fn(*spec, |_| random::element(&mut rng, cover, truncation, 8))?;
        inputs.push((x, phi));
    }
    let run = |(x, phi): &(TensorElement, EquivariantMap)| -> Result<(f64, f64)> {
        let forward = match can_invert(&can_apply(x)) {
            Ok(back) => back.max_abs_diff(x)?,
            Err(Error::NotInvertible { .. }) => f64::INFINITY,
            Err(e) => return Err(e),
        };
        let inverse = match can_invert(phi) {
            Ok(pre) => can_apply(&pre).max_abs_diff(phi)?,
            Err(Error::NotInvertible { .. }) => f64::INFINITY,
            Err(e) => return Err(e),
        };
        Ok((forward, inverse))
    };
    let results: Vec<(f64, f64)> = if parallel {
        inputs.par_iter().map(run).collect::<Result<_>>()?
    } else {
        inputs.iter().map(run).collect::<Result<_>>()?
    };
    let max_residual_forward = results.iter().map(|r| r.0).fold(0.0, f64::max);
    let max_residual_inverse = results.iter().map(|r| r.1).fold(0.0, f64::max);
    let rank = free_module_rank(spec, truncation)?;
    let pass = rank == spec.order() && max_residual_forward < GALOIS_TOL && max_residual_inverse < GALOIS_TOL;
    Ok(GaloisReport {
        spec: *spec,
        rank,
        max_residual_forward,
        max_residual_inverse,
        pass,
    })
}

/// Whether the fixed-point algebra and the image of the covering embedding
/// agree on `a`: the invariant part of `a` is reproduced by embedding its
/// pullback.
pub fn fixed_point_residual(spec: &CoveringSpec, a: &TorusElement) -> Result<f64> {
    let inv = project_invariant(spec, a)?;
    let base = crate::torus::pullback(spec, &inv)?;
    embed_cover(spec, &base)?.max_abs_diff(&inv)
}
