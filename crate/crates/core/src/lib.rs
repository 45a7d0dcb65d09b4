//! Discretize polynomial differential problems, solve them through sparse
//! moment relaxations plus local refinement, and smooth the result with a
//! maximum-entropy estimate.

pub mod checks;
pub mod discretize;
pub mod entropy;
pub mod pipeline;
pub mod problem_file;
pub mod problems;
pub mod refine;
pub mod relaxation;

pub use problem_file::{load_problem_file, problem_from_toml};
pub use problems::{
    preset, preset_by_name, scale_domain_to_unit, shift_to_nonnegative, BoundOverride, BoundaryEq, Deriv, DiffProblem,
    Domain, Dynamics, Equation, Face, Grid, GridFunction, Objective, OcpScheme, PresetName, Rhs, Sampler, ScalarVar,
    ScaleReport, SymbolTable, Unknown,
};

#[derive(Debug, thiserror::Error)]
pub enum CoreError {
    #[error("problem: {0}")]
    Problem(String),
    #[error("lookup: {0}")]
    Lookup(String),
    #[error("transcription: {0}")]
    Transcription(String),
    #[error("parameter: {0}")]
    Parameter(String),
    #[error("relaxation order {w} is below the minimum {w_min}")]
    Order { w: usize, w_min: usize },
    #[error("relaxation: {0}")]
    Relaxation(String),
    #[error("numeric: {0}")]
    Numeric(String),
    #[error("precondition: {0}")]
    Precondition(String),
    #[error("{stage}: {source}")]
    Stage { stage: &'static str, source: Box<CoreError> },
    #[error(transparent)]
    Conic(#[from] sdpsmooth_conic::ConicError),
    #[error(transparent)]
    Poly(#[from] sdpsmooth_poly::PolyError),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("format: {0}")]
    Format(String),
}
