//! Dense tensors, a define-by-run reverse-mode tape, Adam, and
//! finite-difference gradient checking.

mod adam;
mod gradcheck;
mod tape;
mod tensor;

pub use adam::{AdamConfig, AdamState, Moments};
pub use gradcheck::{compare_with_central_differences, grad_check, relative_error, sample_coords, GradCheckOptions};
pub(crate) use tape::log_sum_exp;
pub use tape::{Activation, DropoutMode, Elementwise, Gradients, Tape, Var};
pub use tensor::Tensor;
