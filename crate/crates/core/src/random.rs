//! Seeded generators for random test inputs.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::CMatrix;
use crate::torus::{Monomial, TorusElement, TorusParams};

pub type SeededRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform in the square `[-1, 1] × [-1, 1]`.
pub fn coefficient<R: Rng>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0))
}

/// Between 1 and `max_terms` monomials with exponents in `[-degree, degree]`.
pub fn element<R: Rng>(rng: &mut R, params: TorusParams, degree: i64, max_terms: usize) -> TorusElement {
    let count = rng.gen_range(1..=max_terms.max(1));
    let terms: Vec<_> = (0..count)
        .map(|_| {
            let r = rng.gen_range(-degree..=degree);
            let s = rng.gen_range(-degree..=degree);
            (Monomial::new(r, s), coefficient(rng))
        })
        .collect();
    TorusElement::from_terms(params, terms)
}

/// Unitary factor of the QR decomposition of a random complex matrix.
pub fn unitary<R: Rng>(rng: &mut R, dim: usize) -> CMatrix {
    let m = CMatrix::from_fn(dim, dim, |_, _| coefficient(rng));
    m.qr().q()
}

/// `W diag(e^{iψ_j}) W*` with every `ψ_j` drawn from `[lo, hi)`.
pub fn unitary_with_spectrum_in<R: Rng>(rng: &mut R, dim: usize, lo: f64, hi: f64) -> CMatrix {
    let w = unitary(rng, dim);
    let d = DVector::from_fn(dim, |_, _| {
        let psi: f64 = rng.gen_range(lo..hi);
        Complex64::new(psi.cos(), psi.sin())
    });
    &w * CMatrix::from_diagonal(&d) * w.adjoint()
}
