//! Sheet-lifted partitions of unity on the covering circle and the `a_k, b_k`
//! system they induce in `A_θ'`.
//!
//! The base circle carries two charts `cos(π/2·T(β))` and `sin(π/2·T(β))`
//! where `T` is a `C^∞` step that is flat at both ends. Each chart is lifted
//! sheet by sheet to the `n`-fold cover, so every lifted function lives on an
//! open arc of length `2π/n` and the rotations by `2πj/n` move it onto a
//! disjoint arc.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::sync::OnceLock;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::galois::{act, group_elements, EquivariantMap, GroupElement, TensorElement};
use crate::torus::{unit_root, CoveringSpec, Monomial, TorusElement, TorusParams};

/// Default Fourier truncation degree.
pub const DEFAULT_DEGREE: usize = 64;

// ramp density 4s(1-s)·exp(-(c0 z + c1 z² + c2 z³)), z = (2s-1)²;
// coefficients tuned for Fourier decay at degree 64 with up to 5 sheets
const RAMP: [f64; 3] = [3.46, 1.81, 0.486];
const TABLE_N: usize = 4096;

fn density(s: f64) -> f64 {
    let z = (2.0 * s - 1.0).powi(2);
    4.0 * s * (1.0 - s) * (-(RAMP[0] * z + RAMP[1] * z * z + RAMP[2] * z * z * z)).exp()
}

// cumulative integral of `density` on a uniform table, plus the total
fn ramp_table() -> &'static (Vec<f64>, f64) {
    static TABLE: OnceLock<(Vec<f64>, f64)> = OnceLock::new();
    TABLE.get_or_init(|| {
        // 5-point Gauss-Legendre on each cell
        const X: [f64; 5] = [
            0.0,
            -0.538_469_310_105_683_1,
            0.538_469_310_105_683_1,
            -0.906_179_845_938_664,
            0.906_179_845_938_664,
        ];
        const W: [f64; 5] = [
            0.568_888_888_888_888_9,
            0.478_628_670_499_366_5,
            0.478_628_670_499_366_5,
            0.236_926_885_056_189_1,
            0.236_926_885_056_189_1,
        ];
        let h = 1.0 / TABLE_N as f64;
        let mut acc = vec![0.0; TABLE_N + 1];
        for i in 0..TABLE_N {
            let mid = (i as f64 + 0.5) * h;
            let cell: f64 = X.iter().zip(W).map(|(x, w)| w * density(mid + 0.5 * h * x)).sum();
            acc[i + 1] = acc[i] + 0.5 * h * cell;
        }
        let total = acc[TABLE_N];
        (acc, total)
    })
}

/// Smooth monotone step from 0 on `s ≤ 0` to 1 on `s ≥ 1`, with
/// `step(s) + step(1 - s) = 1`.
fn step(s: f64) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    if s >= 1.0 {
        return 1.0;
    }
    if s > 0.5 {
        return 1.0 - step(1.0 - s);
    }
    let (acc, total) = ramp_table();
    let h = 1.0 / TABLE_N as f64;
    let i = ((s / h) as usize).min(TABLE_N - 1);
    let (s0, s1) = (i as f64 * h, (i + 1) as f64 * h);
    let t = (s - s0) / h;
    // cubic Hermite with exact derivatives
    let (y0, y1) = (acc[i], acc[i + 1]);
    let (d0, d1) = (density(s0) * h, density(s1) * h);
    let t2 = t * t;
    let t3 = t2 * t;
    let v = (2.0 * t3 - 3.0 * t2 + 1.0) * y0 + (t3 - 2.0 * t2 + t) * d0 + (-2.0 * t3 + 3.0 * t2) * y1 + (t3 - t2) * d1;
    v / total
}

/// Wraps an angle into `[-π, π)`.
fn wrap(x: f64) -> f64 {
    (x + PI).rem_euclid(TAU) - PI
}

/// `2·n_sheets` real functions sampled on `grid_size` equispaced points of
/// the covering circle.
#[derive(Clone, Debug)]
pub struct PartitionOfUnity {
    n_sheets: usize,
    grid_size: usize,
    functions: Vec<Vec<f64>>,
}

/// Builds the lifted partition. Function `c·n_sheets + i` is chart `c` on
/// sheet `i`.
///
/// Evaluation goes through the closed form, so the grid need not be
/// compatible with the rotations; only `grid_size ≥ 2·n_sheets` is required.
pub fn build_partition_of_unity(n_sheets: usize, grid_size: usize) -> Result<PartitionOfUnity> {
    if n_sheets == 0 {
        return Err(Error::InvalidArgument("n_sheets must be positive".into()));
    }
    if grid_size < 2 * n_sheets {
        return Err(Error::InvalidArgument(format!(
            "grid_size {grid_size} is smaller than 2*n_sheets = {}",
            2 * n_sheets
        )));
    }
    let mut p = PartitionOfUnity {
        n_sheets,
        grid_size,
        functions: Vec::new(),
    };
    p.functions = (0..2 * n_sheets)
        .map(|idx| (0..grid_size).map(|k| p.eval(idx, p.grid_point(k))).collect())
        .collect();
    Ok(p)
}

impl PartitionOfUnity {
    pub fn n_sheets(&self) -> usize {
        self.n_sheets
    }

    pub fn grid_size(&self) -> usize {
        self.grid_size
    }

    pub fn len(&self) -> usize {
        self.functions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.functions.is_empty()
    }

    pub fn functions(&self) -> &[Vec<f64>] {
        &self.functions
    }

    pub fn grid_point(&self, k: usize) -> f64 {
        TAU * k as f64 / self.grid_size as f64
    }

    /// Closed-form value of function `idx` at angle `t`.
    pub fn eval(&self, idx: usize, t: f64) -> f64 {
        let n = self.n_sheets as f64;
        let chart = idx / self.n_sheets;
        let sheet = (idx % self.n_sheets) as f64;
        let half = PI / n;
        let centre = TAU * sheet / n + if chart == 1 { half } else { 0.0 };
        let d = wrap(t - centre);
        if d.abs() >= half {
            return 0.0;
        }
        let local = (n * d).abs() / PI; // in [0, 1)
        if chart == 0 {
            (FRAC_PI_2 * step(local)).cos()
        } else {
            (FRAC_PI_2 * step(1.0 - local)).sin()
        }
    }

    /// `max_k |Σ_i x_i(t_k)² − 1|`.
    pub fn sum_squares_residual(&self) -> f64 {
        (0..self.grid_size)
            .map(|k| {
                let s: f64 = self.functions.iter().map(|f| f[k] * f[k]).sum();
                (s - 1.0).abs()
            })
            .fold(0.0, f64::max)
    }

    /// `max_k |Σ_i x_i(t_k)·x_i(t_k + 2πj/n)|` for the rotation by `j` sheets.
    pub fn orthogonality_residual(&self, j: usize) -> f64 {
        let shift = TAU * j as f64 / self.n_sheets as f64;
        (0..self.grid_size)
            .map(|k| {
                let t = self.grid_point(k);
                (0..self.len())
                    .map(|i| self.functions[i][k] * self.eval(i, t + shift))
                    .sum::<f64>()
                    .abs()
            })
            .fold(0.0, f64::max)
    }

    /// Worst orthogonality residual over the nontrivial rotations; 0 for a
    /// single sheet.
    pub fn max_orthogonality_residual(&self) -> f64 {
        (1..self.n_sheets)
            .map(|j| self.orthogonality_residual(j))
            .fold(0.0, f64::max)
    }

    /// Fourier coefficients `c_k`, `|k| ≤ degree`, of function `idx` from the
    /// grid DFT, ordered from `k = -degree`.
    pub fn fourier(&self, idx: usize, degree: usize) -> Result<Vec<Complex64>> {
        if 2 * degree + 1 > self.grid_size {
            return Err(Error::InvalidArgument(format!(
                "degree {degree} needs at least {} grid points, have {}",
                2 * degree + 1,
                self.grid_size
            )));
        }
        let n = self.grid_size;
        let fft = FftPlanner::<f64>::new().plan_fft_forward(n);
        let mut buf: Vec<Complex64> = self.functions[idx].iter().map(|x| Complex64::new(*x, 0.0)).collect();
        fft.process(&mut buf);
        let d = degree as i64;
        Ok((-d..=d)
            .map(|k| buf[k.rem_euclid(n as i64) as usize] / n as f64)
            .collect())
    }
}

fn laurent(params: TorusParams, coeffs: &[Complex64], in_u: bool) -> TorusElement {
    let d = (coeffs.len() / 2) as i64;
    TorusElement::from_terms(
        params,
        coeffs.iter().enumerate().map(|(i, c)| {
            let k = i as i64 - d;
            let mono = if in_u { Monomial::new(k, 0) } else { Monomial::new(0, k) };
            (mono, *c)
        }),
    )
}

/// The system `a_k = y_j·x_i`, `b_k = x_i·y_j` with `k = i·|y| + j`, plus the
/// truncated Fourier data it was built from.
#[derive(Clone, Debug)]
pub struct ABSystem {
    spec: CoveringSpec,
    degree: usize,
    x: Vec<Vec<Complex64>>,
    y: Vec<Vec<Complex64>>,
    a_list: Vec<TorusElement>,
    b_list: Vec<TorusElement>,
    residuals: Vec<(GroupElement, f64)>,
}

/// Fourier-truncates `x` (in `u'`) and `y` (in `v'`) at `degree` and
/// assembles the `a_k, b_k` lists together with their residuals.
pub fn assemble_ab(x: &PartitionOfUnity, y: &PartitionOfUnity, spec: &CoveringSpec, degree: usize) -> Result<ABSystem> {
    if x.n_sheets() != spec.m() as usize || y.n_sheets() != spec.n() as usize {
        return Err(Error::InvalidArgument(format!(
            "partitions have {} and {} sheets, cover needs m={} and n={}",
            x.n_sheets(),
            y.n_sheets(),
            spec.m(),
            spec.n()
        )));
    }
    let xs = (0..x.len()).map(|i| x.fourier(i, degree)).collect::<Result<Vec<_>>>()?;
    let ys = (0..y.len()).map(|j| y.fourier(j, degree)).collect::<Result<Vec<_>>>()?;
    let cover = spec.cover();
    let mut a_list = Vec::with_capacity(xs.len() * ys.len());
    let mut b_list = Vec::with_capacity(xs.len() * ys.len());
    for xi in &xs {
        let xe = laurent(cover, xi, true);
        for yj in &ys {
            let ye = laurent(cover, yj, false);
            a_list.push(ye.mul(&xe)?);
            b_list.push(xe.mul(&ye)?);
        }
    }
    let mut system = ABSystem {
        spec: *spec,
        degree,
        x: xs,
        y: ys,
        a_list,
        b_list,
        residuals: Vec::new(),
    };
    system.residuals = group_elements(spec)
        .into_iter()
        .map(|g| {
            let r = system.grouped_sum(g).l2_norm();
            (g, r)
        })
        .collect();
    Ok(system)
}

impl ABSystem {
    pub fn spec(&self) -> &CoveringSpec {
        &self.spec
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn a_list(&self) -> &[TorusElement] {
        &self.a_list
    }

    pub fn b_list(&self) -> &[TorusElement] {
        &self.b_list
    }

    /// `‖Σ_k a_k b_k − 1‖₂`.
    pub fn unit_residual(&self) -> f64 {
        self.residuals[0].1
    }

    /// `‖Σ_k a_k (g b_k) − δ_{g,0}‖₂` for every `g`, in group-index order.
    pub fn residuals(&self) -> &[(GroupElement, f64)] {
        &self.residuals
    }

    /// Worst residual over the nontrivial elements.
    pub fn max_orthogonality_residual(&self) -> f64 {
        self.residuals[1..].iter().map(|r| r.1).fold(0.0, f64::max)
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().map(|r| r.1).fold(0.0, f64::max)
    }

    /// Fails with the first residual above `tol`.
    pub fn check(&self, tol: f64) -> Result<()> {
        for (g, r) in &self.residuals {
            if !(*r <= tol) {
                return Err(Error::ResidualTooLarge {
                    label: format!("partition sum at g=({}, {})", g.a, g.b),
                    residual: *r,
                    tol,
                });
            }
        }
        Ok(())
    }

    /// `Σ_k a_k (g b_k) − δ_{g,0}` regrouped as
    /// `Σ_j y_j [Σ_i x_i (g x_i)] (g y_j)` and accumulated densely.
    fn grouped_sum(&self, g: GroupElement) -> TorusElement {
        let (m, n) = (self.spec.m() as u64, self.spec.n() as u64);
        let d = self.degree as i64;
        let cover = self.spec.cover();
        let width = (4 * d + 1) as usize;

        // W = Σ_i x_i (g x_i), a polynomial in u' of degree 2d
        let mut w = vec![Complex64::new(0.0, 0.0); width];
        for xi in &self.x {
            for (p, cp) in xi.iter().enumerate() {
                for (q, cq) in xi.iter().enumerate() {
                    let k = q as i64 - d;
                    w[p + q] += cp * cq * unit_root(g.a as i128 * k as i128, m);
                }
            }
        }

        // v'^b u'^a = λ'^{-ab} u'^a v'^b
        let phase: Vec<Vec<Complex64>> = (0..width)
            .map(|ai| {
                let a = ai as i64 - 2 * d;
                (0..=(2 * d) as usize)
                    .map(|bi| cover.phase(-a * (bi as i64 - d)))
                    .collect()
            })
            .collect();

        let mut t = vec![Complex64::new(0.0, 0.0); width * width];
        for yj in &self.y {
            let z: Vec<Complex64> = yj
                .iter()
                .enumerate()
                .map(|(ci, c)| c * unit_root(g.b as i128 * (ci as i64 - d) as i128, n))
                .collect();
            for (ai, wa) in w.iter().enumerate() {
                if *wa == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let row = &mut t[ai * width..(ai + 1) * width];
                for (bi, yb) in yj.iter().enumerate() {
                    let coef = yb * phase[ai][bi] * wa;
                    for (ci, zc) in z.iter().enumerate() {
                        row[bi + ci] += coef * zc;
                    }
                }
            }
        }
        if g.is_identity() {
            let centre = (2 * d) as usize;
            t[centre * width + centre] -= Complex64::new(1.0, 0.0);
        }
        TorusElement::from_terms(
            cover,
            t.iter().enumerate().map(|(idx, c)| {
                let a = (idx / width) as i64 - 2 * d;
                let s = (idx % width) as i64 - 2 * d;
                (Monomial::new(a, s), *c)
            }),
        )
    }

    /// `Σ_k a_k (g b_k) − δ_{g,0}` by plain products of the stored lists.
    /// Quartic in the degree; meant for cross-checks at small degree.
    pub fn direct_sum(&self, g: GroupElement) -> Result<TorusElement> {
        let mut acc = TorusElement::zero(self.spec.cover());
        for (a, b) in self.a_list.iter().zip(&self.b_list) {
            acc = acc.add(&a.mul(&act(&self.spec, g, b)?)?)?;
        }
        if g.is_identity() {
            acc = acc.sub(&TorusElement::one(self.spec.cover()))?;
        }
        Ok(acc)
    }

    /// Same quantity as [`ABSystem::residuals`] through the dense route,
    /// exposed for comparing against [`ABSystem::direct_sum`].
    pub fn grouped(&self, g: GroupElement) -> TorusElement {
        self.grouped_sum(g)
    }
}

/// `Σ_i Σ_k a_k ⊗ g_i⁻¹(b_k c_i)` with `c_i = φ(g_i)`: a preimage of `φ`
/// under `can`, exact up to the partition residuals.
pub fn constructive_preimage(system: &ABSystem, phi: &EquivariantMap) -> Result<TensorElement> {
    let spec = system.spec;
    let mut acc = TensorElement::new(spec, Default::default())?;
    for g in group_elements(&spec) {
        let c = phi.value(g);
        let g_inv = g.inverse(&spec);
        for (a, b) in system.a_list.iter().zip(&system.b_list) {
            let right = act(&spec, g_inv, &b.mul(c)?)?;
            acc = acc.add(&TensorElement::from_simple(spec, a, &right)?)?;
        }
    }
    Ok(acc)
}
