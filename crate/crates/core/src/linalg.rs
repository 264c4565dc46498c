//! Small dense complex linear algebra on top of nalgebra.

use nalgebra::{DMatrix, DVector, Schur, SVD};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

/// Singular values in decreasing order.
pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let svd = SVD::new(m.clone(), false, false);
    let mut s: Vec<f64> = svd.singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Operator norm (largest singular value).
pub fn op_norm(m: &CMatrix) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// `‖M*M − I‖`.
pub fn unitary_residual(m: &CMatrix) -> f64 {
    if m.nrows() != m.ncols() {
        return f64::INFINITY;
    }
    op_norm(&(m.adjoint() * m - identity(m.nrows())))
}

/// Orthonormal basis of the null space of `a`, thresholding singular values
/// at `rel_tol` times the largest one.
pub fn null_space(a: &CMatrix, rel_tol: f64) -> Vec<DVector<Complex64>> {
    let cols = a.ncols();
    if cols == 0 {
        return Vec::new();
    }
    // SVD only yields min(rows, cols) right singular vectors; pad to square.
    let padded = if a.nrows() < cols {
        let mut p = CMatrix::zeros(cols, cols);
        p.view_mut((0, 0), (a.nrows(), cols)).copy_from(a);
        p
    } else {
        a.clone()
    };
    let svd = SVD::new(padded, false, true);
    let v_t = svd.v_t.expect("v_t requested");
    let sigma = &svd.singular_values;
    let smax = sigma.iter().copied().fold(0.0, f64::max);
    let cutoff = rel_tol * smax;
    let mut out = Vec::new();
    for (i, s) in sigma.iter().enumerate() {
        if smax == 0.0 || *s <= cutoff {
            out.push(v_t.row(i).adjoint());
        }
    }
    out
}

/// Eigen-decomposition of a normal (in practice unitary) matrix via the
/// complex Schur form: returns `(Q, λ)` with `M = Q diag(λ) Q*`.
pub fn normal_eig(m: &CMatrix) -> Result<(CMatrix, Vec<Complex64>)> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::DimensionMismatch(m.nrows(), m.ncols()));
    }
    if n == 0 {
        return Ok((CMatrix::zeros(0, 0), Vec::new()));
    }
    // QR iteration can stall on exact permutation-like inputs, where all
    // eigenvalues share a modulus; a shift separates the moduli
    let shift = c(0.37, 0.21);
    let (q, mut t, shifted) = match Schur::try_new(m.clone(), f64::EPSILON, 100_000) {
        Some(s) => {
            let (q, t) = s.unpack();
            (q, t, false)
        }
        None => {
            let moved = m + identity(n) * shift;
            let s = Schur::try_new(moved, f64::EPSILON, 100_000)
                .ok_or_else(|| Error::Numerical("Schur decomposition did not converge".into()))?;
            let (q, t) = s.unpack();
            (q, t, true)
        }
    };
    if shifted {
        for i in 0..n {
            t[(i, i)] -= shift;
        }
    }
    let scale = op_norm(m).max(1.0);
    let mut off = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                off = off.max(t[(i, j)].norm());
            }
        }
    }
    if off > 1e-8 * scale {
        return Err(Error::Numerical(format!(
            "matrix is not normal (Schur off-diagonal {off:e})"
        )));
    }
    let eig = (0..n).map(|i| t[(i, i)]).collect();
    Ok((q, eig))
}

/// Eigenvalues of a normal matrix.
pub fn normal_eigenvalues(m: &CMatrix) -> Result<Vec<Complex64>> {
    Ok(normal_eig(m)?.1)
}

/// Whether two multisets of complex numbers agree within `tol` (greedy
/// matching; adequate when clusters are separated by more than `2·tol`).
pub fn multiset_eq(a: &[Complex64], b: &[Complex64], tol: f64) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let mut used = vec![false; b.len()];
    'outer: for x in a {
        for (j, y) in b.iter().enumerate() {
            if !used[j] && (x - y).norm() <= tol {
                used[j] = true;
                continue 'outer;
            }
        }
        return false;
    }
    true
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// `M^k` for a unitary `M`; negative powers use the adjoint.
pub fn unitary_pow(m: &CMatrix, k: i64) -> CMatrix {
    let base = if k < 0 { m.adjoint() } else { m.clone() };
    let mut out = identity(m.nrows());
    for _ in 0..k.unsigned_abs() {
        out = &out * &base;
    }
    out
}

/// Normalized trace inner product `tr(A* B)/dim`.
pub fn trace_inner(a: &CMatrix, b: &CMatrix) -> Complex64 {
    let dim = a.nrows().max(1) as f64;
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum::<Complex64>() / dim
}

pub fn trace_norm(a: &CMatrix) -> f64 {
    trace_inner(a, a).re.max(0.0).sqrt()
}

/// Row-major `[[[re, im], ...], ...]`.
pub fn matrix_to_json(m: &CMatrix) -> serde_json::Value {
    let rows: Vec<Vec<[f64; 2]>> = (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect();
    serde_json::to_value(rows).expect("matrix serializes")
}

pub fn block_diagonal(blocks: &[CMatrix]) -> CMatrix {
    let n: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = CMatrix::zeros(n, n);
    let mut off = 0;
    for b in blocks {
        out.view_mut((off, off), (b.nrows(), b.ncols())).copy_from(b);
        off += b.nrows();
    }
    out
}
