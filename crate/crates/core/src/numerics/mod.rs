//! Dense complex linear algebra and FFTs.

pub mod eig;
pub mod fft;
pub mod hermitian;
pub mod lu;
pub mod matrix;
pub mod norms;
pub mod svd;

#[cfg(test)]
pub(crate) mod testing;

pub use eig::{eig_dense, eig_dense_with, sort_spectrum, EigenResult};
pub use fft::{fft_multi, Direction, MultiFft};
pub use lu::{banded_lu_factor, banded_lu_from_fn, lu_factor, LuFactor};
pub use matrix::{dot, vec_norm, ComplexMatrix};
pub use norms::{numerical_rank, schatten_norm, Schatten, DEFAULT_RANK_THRESHOLD};
pub use svd::{svd_values, svd_values_with, SingularResult};
