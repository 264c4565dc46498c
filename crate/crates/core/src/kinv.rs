//! Winding numbers of sampled circle loops, the induced map of an `n`-fold
//! cover on `K₁`, and the boundary data of the mapping cone.

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::torus::{TorusElement, TorusParams};

/// Fewest samples accepted for a loop.
pub const MIN_SAMPLES: usize = 16;
/// Membership threshold for the cone boundary condition.
pub const MEMBER_TOL: f64 = 1e-8;

const UNIT_TOL: f64 = 1e-9;

/// A closed loop in the unit circle, sampled at `t = j/len`.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledLoop {
    samples: Vec<Complex64>,
}

impl SampledLoop {
    pub fn new(samples: Vec<Complex64>) -> Result<Self> {
        if samples.len() < MIN_SAMPLES {
            return Err(Error::InvalidArgument(format!(
                "a loop needs at least {MIN_SAMPLES} samples, got {}",
                samples.len()
            )));
        }
        if let Some((j, z)) = samples
            .iter()
            .enumerate()
            .find(|(_, z)| !((z.norm() - 1.0).abs() <= UNIT_TOL))
        {
            return Err(Error::InvalidArgument(format!(
                "sample {j} has modulus {} instead of 1",
                z.norm()
            )));
        }
        Ok(Self { samples })
    }

    /// Samples `f(t)` at `t = j/len` for `t ∈ [0, 1)`.
    pub fn from_fn<F: Fn(f64) -> Complex64>(len: usize, f: F) -> Result<Self> {
        Self::new((0..len).map(|j| f(j as f64 / len as f64)).collect())
    }

    /// `t ↦ e^{2πit}`.
    pub fn generator(len: usize) -> Result<Self> {
        Self::from_fn(len, |t| Complex64::from_polar(1.0, TAU * t))
    }

    /// Loop of normalized determinants of unitary samples.
    pub fn from_unitaries(samples: &[CMatrix]) -> Result<Self> {
        let dets = samples
            .iter()
            .map(|m| {
                if m.nrows() != m.ncols() {
                    return Err(Error::DimensionMismatch(m.nrows(), m.ncols()));
                }
                let d = m.determinant();
                if !((d.norm() - 1.0).abs() <= 1e-8) {
                    return Err(Error::NotUnitary {
                        residual: (d.norm() - 1.0).abs(),
                    });
                }
                Ok(d / d.norm())
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(dets)
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Pointwise `k`-th power; this is the loop's image under `z ↦ z^k`.
    pub fn power(&self, k: i64) -> Self {
        Self {
            samples: self.samples.iter().map(|z| z.powi(k as i32)).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch(self.len(), other.len()));
        }
        Ok(Self {
            samples: self.samples.iter().zip(&other.samples).map(|(a, b)| a * b).collect(),
        })
    }

    /// Principal-branch angle increments, including the closing step.
    pub fn steps(&self) -> Vec<f64> {
        let n = self.samples.len();
        (0..n)
            .map(|j| (self.samples[(j + 1) % n] * self.samples[j].conj()).arg())
            .collect()
    }

    pub fn max_step(&self) -> f64 {
        self.steps().iter().map(|s| s.abs()).fold(0.0, f64::max)
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        let pairs: Vec<[f64; 2]> = self.samples.iter().map(|z| [z.re, z.im]).collect();
        serde_json::to_value(pairs).expect("loop serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let pairs: Vec<[f64; 2]> = serde_json::from_str(s)?;
        Self::new(pairs.into_iter().map(|[re, im]| Complex64::new(re, im)).collect())
    }
}

/// Degree of the loop: the summed principal increments over `2π`.
///
/// Fails when some step reaches `π`, since the increments are then no
/// longer determined by the samples.
pub fn winding_number(lp: &SampledLoop) -> Result<i64> {
    let steps = lp.steps();
    let max_step = steps.iter().map(|s| s.abs()).fold(0.0, f64::max);
    if !(max_step < std::f64::consts::PI) {
        return Err(Error::Aliasing { max_step });
    }
    let total: f64 = steps.iter().sum();
    Ok((total / TAU).round() as i64)
}

/// Winding of the generator loop pushed through `z ↦ z^n`.
pub fn phi_k_of_cover(n: u32, samples: usize) -> Result<i64> {
    if n == 0 {
        return Err(Error::InvalidArgument("cover degree must be positive".into()));
    }
    if samples < MIN_SAMPLES * n as usize {
        return Err(Error::InvalidArgument(format!(
            "need at least {} samples for a {n}-fold cover, got {samples}",
            MIN_SAMPLES * n as usize
        )));
    }
    winding_number(&SampledLoop::generator(samples)?.power(n as i64))
}

/// The class of the loop in `K₁` of the mapping cone: winding mod `n`.
pub fn cone_class(lp: &SampledLoop, n: u32) -> Result<u32> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be positive".into()));
    }
    Ok(winding_number(lp)?.rem_euclid(n as i64) as u32)
}

/// Parameters of the commutative circle algebra `C(S¹)`, generated by `u`.
pub fn circle_params() -> TorusParams {
    TorusParams::rational(0, 1).expect("0/1 is valid")
}

fn is_circle_element(a: &TorusElement) -> bool {
    a.params().compatible(&circle_params()) && a.terms().all(|(m, _)| m.s == 0)
}

/// Coefficient-space distance from `a` to the span of `{u^{kn}}`.
pub fn boundary_distance(a: &TorusElement, n: u32) -> f64 {
    let n = n as i64;
    a.terms()
        .filter(|(m, _)| m.s != 0 || m.r.rem_euclid(n) != 0)
        .map(|(_, c)| c.norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// Loop `t ↦ a(e^{2πit})` of a circle-algebra element, if unit-valued.
pub fn element_loop(a: &TorusElement, samples: usize) -> Result<SampledLoop> {
    if !is_circle_element(a) {
        return Err(Error::InvalidArgument("not an element of the circle algebra".into()));
    }
    SampledLoop::from_fn(samples, |t| {
        a.terms()
            .map(|(m, c)| c * Complex64::from_polar(1.0, TAU * t * m.r as f64))
            .sum()
    })
}

/// A path `t ↦ f(t)` in `C(S¹)`, sampled on `[0, 1)` with `f(0)` first.
#[derive(Clone, Debug)]
pub struct ConePath {
    n: u32,
    t_samples: Vec<TorusElement>,
}

impl ConePath {
    /// Membership of `f(0)` is reported by [`cone_membership`], not
    /// enforced here.
    pub fn new(n: u32, t_samples: Vec<TorusElement>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("n must be positive".into()));
        }
        if t_samples.is_empty() {
            return Err(Error::InvalidArgument("a path needs at least one sample".into()));
        }
        if !t_samples.iter().all(is_circle_element) {
            return Err(Error::InvalidArgument(
                "path samples must lie in the circle algebra".into(),
            ));
        }
        Ok(Self { n, t_samples })
    }

    pub fn constant(n: u32, a: TorusElement, count: usize) -> Result<Self> {
        Self::new(n, vec![a; count.max(1)])
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn at_zero(&self) -> &TorusElement {
        &self.t_samples[0]
    }

    pub fn samples(&self) -> &[TorusElement] {
        &self.t_samples
    }
}

#[derive(Clone, Debug)]
pub struct PowerEntry {
    pub power: u32,
    pub distance: f64,
    pub member: bool,
    pub winding: Option<i64>,
    pub class: Option<u32>,
}

#[derive(Clone, Debug)]
pub struct ConeReport {
    pub n: u32,
    pub boundary_distance: f64,
    pub boundary_member: bool,
    pub powers: Vec<PowerEntry>,
}

impl ConeReport {
    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::json!({
            "n": self.n,
            "boundary": {"distance": self.boundary_distance, "member": self.boundary_member},
            "powers": self.powers.iter().map(|p| serde_json::json!({
                "power": p.power,
                "distance": p.distance,
                "member": p.member,
                "winding": p.winding,
                "class": p.class,
            })).collect::<Vec<_>>(),
        })
    }
}

/// Sample count used when a boundary power is read as a loop.
pub const CONE_LOOP_SAMPLES: usize = 4096;

/// Checks `f(0) ∈ span{u^{kn}}` and reports the same test for the powers
/// `f(0)^i`, `i = 1..=n`, together with their winding and cone class when
/// they are unit-valued.
pub fn cone_membership(path: &ConePath) -> Result<ConeReport> {
    let n = path.n;
    let f0 = path.at_zero();
    let boundary = boundary_distance(f0, n);
    let mut powers = Vec::with_capacity(n as usize);
    let mut acc = TorusElement::one(f0.params());
    for i in 1..=n {
        acc = acc.mul(f0)?;
        let distance = boundary_distance(&acc, n);
        let (winding, class) = match element_loop(&acc, CONE_LOOP_SAMPLES).and_then(|lp| winding_number(&lp)) {
            Ok(w) => (Some(w), Some(w.rem_euclid(n as i64) as u32)),
            Err(_) => (None, None),
        };
        powers.push(PowerEntry {
            power: i,
            distance,
            member: distance < MEMBER_TOL,
            winding,
            class,
        });
    }
    Ok(ConeReport {
        n,
        boundary_distance: boundary,
        boundary_member: boundary < MEMBER_TOL,
        powers,
    })
}
