//! Small dense optimizers used by the decay fits and tomography.

mod levenberg_marquardt;
mod nelder_mead;

pub use levenberg_marquardt::{finite_difference_jacobian, levenberg_marquardt, LeastSquares, LmOptions, LmReport};
pub use nelder_mead::{nelder_mead, Bounds, Minimum, NelderMeadOptions};
