//! Quaternion scalars, dense quaternion matrices, and the quaternion SVD.

pub mod adjoint;
pub mod matrix;
pub mod qsvd;
pub mod quaternion;
mod random;
pub mod tensor;

pub use adjoint::ComplexAdjoint;
pub use matrix::{frobenius_distance, NormKind, QMatrix};
pub use qsvd::{mcp_norm, numerical_rank, qsvd, singular_values, QsvdFactors};
pub use quaternion::{hamilton_product, Quaternion};
pub use random::gaussian_qmatrix;
pub use tensor::QTensor;
