//! Computations on noncommutative torus covers: Laurent-polynomial
//! arithmetic in `A_θ`, the `ℤ_m × ℤ_n` Galois structure of a cover, finite
//! representations, branch roots of unitaries and circle `K₁` bookkeeping.

// `!(x <= tol)` is used on purpose so that NaN fails the check
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod galois;
pub mod kinv;
pub mod linalg;
pub mod partition;
pub mod random;
pub mod rep;
pub mod scenario;
pub mod spectral;
pub mod torus;

pub use error::{Error, Result};
pub use galois::{
    can_apply, can_invert, group_elements, module_decompose, project_invariant, verify_galois, EquivariantMap,
    GaloisReport, GroupElement, TensorElement,
};
pub use kinv::{cone_class, cone_membership, phi_k_of_cover, winding_number, ConePath, SampledLoop};
pub use partition::{assemble_ab, build_partition_of_unity, ABSystem, PartitionOfUnity};
pub use rep::{
    clock_shift_rep, equivariant_direct_sum, evaluate, free_action_probe, invariant_subspace, morita_twist_witness,
    solve_intertwiner, twisted_rep, IntertwinerResult, IntertwinerStatus, MatrixRep,
};
pub use spectral::{build_extension, root_branch_apply, span_membership, spectrum_gap, su2_counterexample, RootBranch};
pub use torus::{embed_cover, CoveringSpec, Monomial, TorusElement, TorusParams};
