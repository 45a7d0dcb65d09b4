//! Interior-point solver for block-structured semidefinite programs in LMI
//! form, with an independent verifier and a plain-text problem format.

pub mod instance;
pub mod ipm;
pub mod linsolve;
mod rowreduce;
pub mod verify;

pub use instance::{AffineRow, BlockEntry, LmiBlock, SdpInstance};
pub use ipm::{solve, ConicBackend, ConicSolution, InteriorPoint, IterRecord, Residuals, SolverSettings, Status};
pub use verify::{verify, VerifyReport};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConicError {
    #[error("malformed instance: {0}")]
    Malformed(String),
    #[error("line {line}: {msg}")]
    Format { line: usize, msg: String },
    #[error("numerical failure: {0}")]
    Numerical(String),
}
