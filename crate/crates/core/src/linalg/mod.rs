//! Dense complex linear algebra, Haar-random unitary sampling, and
//! symmetric-group permutation operators on tensor powers.
//!
//! All operations are pure functions of their inputs and safe to call from
//! many threads. [`RngStream`] values are cheap value objects; derive one
//! stream per unit of work rather than sharing a stream across threads.

mod matrix;
mod permutation;
mod sampling;

pub use matrix::{
    conjugate, diag_probabilities, ensure_finite, frobenius_distance, hermitian_eigenvalues,
    is_hermitian, matrix_from_real_diagonal, matrix_from_rows, ComplexMatrix, DensityMatrix,
    UnitaryMatrix, DET_MODULUS_TOL, DIAG_CLAMP_TOL, HERMITICITY_TOL, MIN_EIGENVALUE_TOL,
    TRACE_TOL, UNITARITY_TOL_PER_DIM,
};
pub use permutation::{permutation_operator, Permutation, DENSE_OPERATOR_CAP, TENSOR_DIM_CAP};
pub(crate) use permutation::{checked_tensor_dim, tensor_index_map};
pub use sampling::{sample_ginibre, sample_haar_unitary, RngStream};
