//! Dense complex linear algebra and quantum-state primitives for small
//! multipartite Hilbert spaces.

mod eig;
mod matrix;
mod random;
mod state;

pub use eig::{
    hermitian_eig, hermitian_eigvals, matrix_sqrt_psd, pinv_sqrt_on_support, support_projector,
    HermitianEig, SUPPORT_TOL,
};
pub use matrix::{pauli, tensor, tensor_vec, ComplexMatrix, C64};
pub use random::{random_full_rank_state, task_rng};
pub use state::{
    max_entangled, partial_trace, partial_transpose, reduce_pure, DensityOperator, PureState,
    STATE_TOL,
};

