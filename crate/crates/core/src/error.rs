use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// The implicit step for y' = y^2 has no real root: the solution blows up inside the step.
    #[error("implicit step has no real root (y = {y}, dt = {dt}): solution crosses a singularity")]
    NoRealRoot { y: f64, dt: f64 },

    #[error("Newton iteration for the implicit step did not converge (y = {y}, dt = {dt})")]
    NoConvergence { y: f64, dt: f64 },

    #[error("implicit linear solve failed: {0}")]
    SingularSystem(String),

    #[error("interval width {width} is not an integer multiple of dt = {dt}")]
    NonIntegerStepCount { width: f64, dt: f64 },

    #[error("interpolation nodes are not distinct (node {index} = {value})")]
    DuplicateNodes { index: usize, value: f64 },

    #[error("bad grid: {0}")]
    BadGrid(String),

    #[error("least-squares design matrix is rank deficient (rank {rank} < {needed})")]
    RankDeficient { rank: usize, needed: usize },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("task failed on slice {slice}{}: {source}", sample.map(|s| format!(", sample {s}")).unwrap_or_default())]
    Task {
        slice: usize,
        sample: Option<usize>,
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn in_task(self, slice: usize, sample: Option<usize>) -> Self {
        Error::Task {
            slice,
            sample,
            source: Box::new(self),
        }
    }
}
