//! Fibonacci/Lucas auxiliary-equation solver for nonlinear PDEs.
pub mod ansatz;
pub mod case;
pub mod error;
pub mod fiblucas;
pub mod grammar;
pub mod pipeline;
pub mod reduction;
pub mod symkernel;
pub mod verify;
pub use error::{Error, KernelError, Result};
