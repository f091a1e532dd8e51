//! A small function-approximation engine: two valid convolutions with ReLU,
//! a hidden dense layer with an optional concatenation point, a linear head,
//! exact reverse-mode gradients of a (masked) MSE loss, and Adam.
//!
//! The math is generic over the scalar type; `f32` is the working precision
//! for training and `f64` backs high-precision oracles.

mod adam;
mod arch;
mod checkpoint;
mod kernels;
mod loss;
mod net;
mod params;
mod scalar;

pub use adam::{adam_step, OptimizerState};
pub use arch::{Architecture, ConvSpec, Dims};
pub use checkpoint::{load_params, load_params_expecting, save_params};
pub use loss::mse_loss;
pub use net::{forward, forward_into, gradients, Batch, BatchTargets, Workspace};
pub use params::{init_bound, init_params, Parameters};
pub use scalar::Scalar;

/// Concrete aliases for the two supported precisions.
pub type Parameters32 = Parameters<f32>;
pub type Parameters64 = Parameters<f64>;
pub type OptimizerState32 = OptimizerState<f32>;
pub type OptimizerState64 = OptimizerState<f64>;
pub type Workspace32 = Workspace<f32>;
pub type Workspace64 = Workspace<f64>;

/// Errors from shape validation, architecture checks, and checkpoint IO.
#[derive(Debug, thiserror::Error)]
pub enum NetError {
    #[error("invalid architecture: {0}")]
    InvalidArchitecture(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("bad checkpoint: {0}")]
    BadCheckpoint(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
