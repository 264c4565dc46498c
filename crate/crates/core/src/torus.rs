//! Exact arithmetic in the dense Laurent-polynomial subalgebra of the
//! noncommutative torus `A_θ`.
//!
//! Elements are finite sums `Σ a_rs u^r v^s`, always stored normal-ordered
//! with every power of `u` to the left of every power of `v`. With the
//! defining relation `uv = e^{2πiθ} vu` the product of two monomials is
//!
//! ```text
//! (u^r v^s)(u^p v^q) = e^{-2πiθ·sp} u^{r+p} v^{s+q}
//! ```
//!
//! Phases are carried as integer multiples of `2πθ` and evaluated once per
//! term. When `θ = p/q` is known exactly the integer exponent is reduced
//! modulo `q` before any floating point work happens.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute per-coefficient tolerance used for element equality.
pub const EPS_EQ: f64 = 1e-12;

pub(crate) fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// `e^{2πi r/q}` with `r` reduced modulo `q`.
///
/// Quarter turns are returned exactly so that `q ∈ {1, 2, 4}` never picks up
/// rounding noise from `sin(π)`.
pub fn unit_root(r: i128, q: u64) -> Complex64 {
    let q = q as i128;
    let r = r.rem_euclid(q);
    if r == 0 {
        return Complex64::new(1.0, 0.0);
    }
    if 2 * r == q {
        return Complex64::new(-1.0, 0.0);
    }
    if 4 * r == q {
        return Complex64::new(0.0, 1.0);
    }
    if 4 * r == 3 * q {
        return Complex64::new(0.0, -1.0);
    }
    // symmetric representative keeps the argument small
    let r = if 2 * r > q { r - q } else { r };
    let angle = TAU * (r as f64) / (q as f64);
    Complex64::new(angle.cos(), angle.sin())
}

/// The twist parameter θ of `A_θ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TorusParams {
    theta: f64,
    exact: Option<(i64, u64)>,
}

impl TorusParams {
    /// A real twist with no exact rational form.
    pub fn real(theta: f64) -> Result<Self> {
        if !theta.is_finite() {
            return Err(Error::InvalidArgument(format!("theta must be finite, got {theta}")));
        }
        Ok(Self { theta, exact: None })
    }

    /// `θ = p/q`, stored in lowest terms.
    pub fn rational(p: i64, q: i64) -> Result<Self> {
        if q < 1 {
            return Err(Error::InvalidArgument(format!("denominator must be >= 1, got {q}")));
        }
        let g = gcd(p.unsigned_abs(), q as u64).max(1);
        let p = p / g as i64;
        let q = q as u64 / g;
        Ok(Self {
            theta: p as f64 / q as f64,
            exact: Some((p, q)),
        })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// `(p, q)` in lowest terms when θ is known exactly.
    pub fn exact(&self) -> Option<(i64, u64)> {
        self.exact
    }

    /// `e^{2πiθ·t}`.
    pub fn phase(&self, t: i64) -> Complex64 {
        if t == 0 {
            return Complex64::new(1.0, 0.0);
        }
        match self.exact {
            Some((p, q)) => unit_root(p as i128 * t as i128, q),
            None => {
                let frac = (self.theta * t as f64).rem_euclid(1.0);
                let angle = TAU * frac;
                Complex64::new(angle.cos(), angle.sin())
            }
        }
    }

    /// Whether two parameter sets describe the same algebra.
    pub fn compatible(&self, other: &Self) -> bool {
        match (self.exact, other.exact) {
            (Some(a), Some(b)) => a == b,
            _ => (self.theta - other.theta).abs() <= EPS_EQ,
        }
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.compatible(other) {
            Ok(())
        } else {
            Err(Error::ParamsMismatch {
                left: self.to_string(),
                right: other.to_string(),
            })
        }
    }

    pub(crate) fn to_json(self) -> ThetaJson {
        match self.exact {
            Some((p, q)) => ThetaJson::Exact([p, q as i64]),
            None => ThetaJson::Real(self.theta),
        }
    }

    pub(crate) fn from_json(t: &ThetaJson) -> Result<Self> {
        match *t {
            ThetaJson::Exact([p, q]) => Self::rational(p, q),
            ThetaJson::Real(x) => Self::real(x),
        }
    }
}

impl fmt::Display for TorusParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.exact {
            Some((p, q)) => write!(f, "{p}/{q}"),
            None => write!(f, "{}", self.theta),
        }
    }
}

/// θ as it appears on the wire: a bare number or an exact `[p, q]` pair.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum ThetaJson {
    Exact([i64; 2]),
    Real(f64),
}

/// Exponent pair of `u^r v^s`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial {
    pub r: i64,
    pub s: i64,
}

impl Monomial {
    pub const ONE: Monomial = Monomial { r: 0, s: 0 };

    pub fn new(r: i64, s: i64) -> Self {
        Self { r, s }
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "u^{}v^{}", self.r, self.s)
    }
}

/// A finite sum `Σ a_rs u^r v^s` over fixed torus parameters.
///
/// No stored coefficient is exactly zero.
#[derive(Clone, Debug, PartialEq)]
pub struct TorusElement {
    params: TorusParams,
    terms: BTreeMap<Monomial, Complex64>,
}

impl TorusElement {
    pub fn zero(params: TorusParams) -> Self {
        Self {
            params,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(params: TorusParams) -> Self {
        Self::monomial(params, 0, 0, Complex64::new(1.0, 0.0))
    }

    pub fn monomial(params: TorusParams, r: i64, s: i64, coeff: Complex64) -> Self {
        let mut terms = BTreeMap::new();
        if coeff != Complex64::new(0.0, 0.0) {
            terms.insert(Monomial::new(r, s), coeff);
        }
        Self { params, terms }
    }

    pub fn u(params: TorusParams) -> Self {
        Self::monomial(params, 1, 0, Complex64::new(1.0, 0.0))
    }

    pub fn v(params: TorusParams) -> Self {
        Self::monomial(params, 0, 1, Complex64::new(1.0, 0.0))
    }

    /// Sums repeated monomials; zero results are dropped.
    pub fn from_terms<I>(params: TorusParams, terms: I) -> Self
    where
        I: IntoIterator<Item = (Monomial, Complex64)>,
    {
        Self::from_contributions(params, terms.into_iter().collect())
    }

    /// Each output coefficient is summed in a canonical order (sorted by
    /// value), so the result does not depend on the order in which
    /// contributions were produced.
    fn from_contributions(params: TorusParams, mut contrib: Vec<(Monomial, Complex64)>) -> Self {
        contrib.sort_by(|a, b| {
            a.0.cmp(&b.0)
                .then(a.1.re.total_cmp(&b.1.re))
                .then(a.1.im.total_cmp(&b.1.im))
        });
        let mut terms = BTreeMap::new();
        let mut iter = contrib.into_iter().peekable();
        while let Some((m, mut c)) = iter.next() {
            while let Some((next, _)) = iter.peek() {
                if *next != m {
                    break;
                }
                c += iter.next().unwrap().1;
            }
            if c != Complex64::new(0.0, 0.0) {
                terms.insert(m, c);
            }
        }
        Self { params, terms }
    }

    pub fn params(&self) -> TorusParams {
        self.params
    }

    pub fn terms(&self) -> impl Iterator<Item = (Monomial, Complex64)> + '_ {
        self.terms.iter().map(|(m, c)| (*m, *c))
    }

    pub fn coeff(&self, r: i64, s: i64) -> Complex64 {
        self.terms.get(&Monomial::new(r, s)).copied().unwrap_or_default()
    }

    /// Number of stored terms.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Largest `max(|r|, |s|)` over the support; 0 for the zero element.
    pub fn degree(&self) -> i64 {
        self.terms.keys().map(|m| m.r.abs().max(m.s.abs())).max().unwrap_or(0)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.params.check(&other.params)?;
        let contrib = self.terms().chain(other.terms()).collect();
        Ok(Self::from_contributions(self.params, contrib))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        self.scale(Complex64::new(-1.0, 0.0))
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|(m, a)| (*m, a * c))
            .filter(|(_, a)| *a != Complex64::new(0.0, 0.0))
            .collect();
        Self {
            params: self.params,
            terms,
        }
    }

    /// Normal-ordered product.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.params.check(&other.params)?;
        let mut contrib = Vec::with_capacity(self.len() * other.len());
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let t = -(ma.s * mb.r);
                let mut c = ca * cb;
                if t != 0 {
                    c *= self.params.phase(t);
                }
                contrib.push((Monomial::new(ma.r + mb.r, ma.s + mb.s), c));
            }
        }
        Ok(Self::from_contributions(self.params, contrib))
    }

    /// `(c u^r v^s)* = c̄ v^{-s} u^{-r} = c̄ e^{-2πiθ·rs} u^{-r} v^{-s}`.
    pub fn adjoint(&self) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|(m, c)| (Monomial::new(-m.r, -m.s), c.conj() * self.params.phase(-(m.r * m.s))))
            .collect();
        Self {
            params: self.params,
            terms,
        }
    }

    /// The canonical trace: the coefficient of the unit monomial.
    pub fn trace_tau0(&self) -> Complex64 {
        self.coeff(0, 0)
    }

    /// `sqrt(τ0(a* a))`.
    ///
    /// The phases of `a*` cancel against those of the product, so this is the
    /// Euclidean norm of the coefficient vector.
    pub fn l2_norm(&self) -> f64 {
        self.terms.values().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest per-coefficient difference.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.params.check(&other.params)?;
        let mut worst: f64 = 0.0;
        for (m, c) in &self.terms {
            let d = (c - other.terms.get(m).copied().unwrap_or_default()).norm();
            worst = worst.max(d);
        }
        for (m, c) in &other.terms {
            if !self.terms.contains_key(m) {
                worst = worst.max(c.norm());
            }
        }
        Ok(worst)
    }

    /// Equality within `eps` per coefficient; false on a parameter mismatch.
    pub fn approx_eq(&self, other: &Self, eps: f64) -> bool {
        self.max_abs_diff(other).map(|d| d <= eps).unwrap_or(false)
    }

    /// Drops coefficients with magnitude at or below `tol`.
    pub fn prune(&self, tol: f64) -> Self {
        let terms = self
            .terms
            .iter()
            .filter(|(_, c)| c.norm() > tol)
            .map(|(m, c)| (*m, *c))
            .collect();
        Self {
            params: self.params,
            terms,
        }
    }

    /// Keeps the terms whose monomial satisfies `keep`.
    pub fn filter<F: Fn(Monomial) -> bool>(&self, keep: F) -> Self {
        let terms = self
            .terms
            .iter()
            .filter(|(m, _)| keep(**m))
            .map(|(m, c)| (*m, *c))
            .collect();
        Self {
            params: self.params,
            terms,
        }
    }

    /// Rescales every term by `f(monomial)`.
    pub fn map_coeffs<F: Fn(Monomial, Complex64) -> Complex64>(&self, f: F) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|(m, c)| (*m, f(*m, *c)))
            .filter(|(_, c)| *c != Complex64::new(0.0, 0.0))
            .collect();
        Self {
            params: self.params,
            terms,
        }
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(ElementJson::from(self)).expect("element serializes")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&ElementJson::from(self)).expect("element serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let raw: ElementJson = serde_json::from_str(s)?;
        raw.try_into()
    }

    pub fn from_json_value(v: serde_json::Value) -> Result<Self> {
        let raw: ElementJson = serde_json::from_value(v)?;
        raw.try_into()
    }
}

impl fmt::Display for TorusElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({}{:+}i)·{}", c.re, c.im, m)?;
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct ElementJson {
    theta: ThetaJson,
    terms: Vec<(i64, i64, f64, f64)>,
}

impl From<&TorusElement> for ElementJson {
    fn from(a: &TorusElement) -> Self {
        Self {
            theta: a.params.to_json(),
            terms: a.terms().map(|(m, c)| (m.r, m.s, c.re, c.im)).collect(),
        }
    }
}

impl TryFrom<ElementJson> for TorusElement {
    type Error = Error;

    fn try_from(raw: ElementJson) -> Result<Self> {
        let params = TorusParams::from_json(&raw.theta)?;
        let mut terms = Vec::with_capacity(raw.terms.len());
        for (r, s, re, im) in raw.terms {
            if !re.is_finite() || !im.is_finite() {
                return Err(Error::InvalidArgument(format!("non-finite coefficient at ({r}, {s})")));
            }
            terms.push((Monomial::new(r, s), Complex64::new(re, im)));
        }
        Ok(TorusElement::from_terms(params, terms))
    }
}

/// Data of the embedding `A_θ → A_θ'`, `u ↦ u'^m`, `v ↦ v'^n`, with
/// `θ' = (θ + k)/(mn)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoveringSpec {
    m: u32,
    n: u32,
    k: u64,
    base: TorusParams,
    cover: TorusParams,
}

impl CoveringSpec {
    pub fn new(m: u32, n: u32, k: u64, base: TorusParams) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(Error::InvalidArgument(format!(
                "covering degrees must be positive, got m={m} n={n}"
            )));
        }
        let order = m as u64 * n as u64;
        if k >= order {
            return Err(Error::InvalidArgument(format!(
                "k must satisfy 0 <= k < mn = {order}, got {k}"
            )));
        }
        let cover = match base.exact() {
            Some((p, q)) => TorusParams::rational(p + k as i64 * q as i64, (q * order) as i64)?,
            None => TorusParams::real((base.theta() + k as f64) / order as f64)?,
        };
        Ok(Self { m, n, k, base, cover })
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn k(&self) -> u64 {
        self.k
    }

    pub fn base(&self) -> TorusParams {
        self.base
    }

    pub fn cover(&self) -> TorusParams {
        self.cover
    }

    /// `|G| = mn`.
    pub fn order(&self) -> usize {
        self.m as usize * self.n as usize
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::json!({
            "m": self.m,
            "n": self.n,
            "k": self.k,
            "theta": self.base.to_json(),
            "cover_theta": self.cover.to_json(),
        })
    }
}

/// `u^r v^s ↦ u'^{mr} v'^{ns}`.
///
/// Both sides are already normal-ordered and `λ'^{mn} = e^{2πi(θ+k)} = λ`,
/// so no coefficient correction is needed; the homomorphism tests check this.
pub fn embed_cover(spec: &CoveringSpec, a: &TorusElement) -> Result<TorusElement> {
    spec.base.check(&a.params)?;
    let (m, n) = (spec.m as i64, spec.n as i64);
    Ok(TorusElement {
        params: spec.cover,
        terms: a
            .terms
            .iter()
            .map(|(mono, c)| (Monomial::new(m * mono.r, n * mono.s), *c))
            .collect(),
    })
}

/// Inverse of [`embed_cover`] on its image.
pub fn pullback(spec: &CoveringSpec, a: &TorusElement) -> Result<TorusElement> {
    spec.cover.check(&a.params)?;
    let (m, n) = (spec.m as i64, spec.n as i64);
    let mut terms = BTreeMap::new();
    for (mono, c) in &a.terms {
        if mono.r % m != 0 || mono.s % n != 0 {
            return Err(Error::InvalidArgument(format!(
                "{mono} is not in the image of the covering embedding"
            )));
        }
        terms.insert(Monomial::new(mono.r / m, mono.s / n), *c);
    }
    Ok(TorusElement {
        params: spec.base,
        terms,
    })
}
