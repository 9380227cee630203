//! Dense and CSR matrices plus the few kernels the propagation model needs.

mod adam;
pub(crate) mod dense;
mod gradcheck;
mod ops;
mod sparse;

pub use adam::{adam_step, AdamConfig, AdamState};
pub use dense::DenseMatrix;
pub use gradcheck::{finite_diff_grad, relative_error};
pub use ops::{concat_rows, leaky_relu, leaky_relu_grad_mask, make_dropout_mask, split_cols};
pub use sparse::SparseMatrix;
