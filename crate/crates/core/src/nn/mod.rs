//! Dense-matrix substrate: matrices, trainable parameter blocks, dense
//! layers with cached backward passes, initializers and Adam.

mod adam;
mod dense;
mod init;
mod matrix;
mod param;

pub use adam::Adam;
pub use dense::{Activation, DenseLayer};
pub use init::{init_params, InitKind, InitializerSpec};
pub use matrix::{gemm, Matrix};
pub use param::{count_scalars, soft_update, ParamBlock};
