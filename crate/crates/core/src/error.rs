use alloc::string::String;
use core::fmt;

/// Failures while building or validating polygonal meshes and partitions.
#[derive(Debug, Clone, PartialEq)]
pub enum MeshError {
    /// A cell references a vertex index outside the vertex table.
    VertexOutOfRange { cell: usize, vertex: usize, n_vertices: usize },
    /// A cell has fewer than three vertices, is self-intersecting or not counter-clockwise.
    InvalidCell { cell: usize, reason: &'static str },
    /// Per-cell arrays disagree in length.
    Inconsistent(String),
    /// Voronoi generation kept producing degenerate cells.
    Generation { attempts: usize },
    /// Invalid generator or partition input.
    InvalidInput(&'static str),
}

impl fmt::Display for MeshError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeshError::VertexOutOfRange { cell, vertex, n_vertices } => write!(
                f,
                "cell {cell} references vertex {vertex} but the mesh has {n_vertices} vertices"
            ),
            MeshError::InvalidCell { cell, reason } => write!(f, "cell {cell} is invalid: {reason}"),
            MeshError::Inconsistent(msg) => write!(f, "inconsistent mesh: {msg}"),
            MeshError::Generation { attempts } => {
                write!(f, "mesh generation produced degenerate cells after {attempts} attempts")
            }
            MeshError::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
        }
    }
}

/// A dense or sparse symmetric factorization hit a non-positive pivot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FactorizationError {
    /// Row (in factorization order) where the pivot broke down.
    pub row: usize,
    pub pivot: f64,
}

impl fmt::Display for FactorizationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "non-positive pivot {:e} at row {}", self.pivot, self.row)
    }
}

/// Errors raised while setting up the discretization or the preconditioner.
#[derive(Debug, Clone, PartialEq)]
pub enum SetupError {
    Config(String),
    DimensionMismatch { expected: usize, found: usize },
    /// Local solver factorization failed on the given subdomain (`None` for the coarse problem).
    Subdomain { subdomain: Option<usize>, source: FactorizationError },
    Factorization(FactorizationError),
    IndexOutOfRange { index: usize, len: usize },
    TooLarge { dim: usize, limit: usize },
    NonFinite(&'static str),
}

impl fmt::Display for SetupError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SetupError::Config(msg) => write!(f, "configuration error: {msg}"),
            SetupError::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            SetupError::Subdomain { subdomain: Some(i), source } => {
                write!(f, "factorization of subdomain {i} failed: {source}")
            }
            SetupError::Subdomain { subdomain: None, source } => {
                write!(f, "factorization of the coarse problem failed: {source}")
            }
            SetupError::Factorization(e) => write!(f, "factorization failed: {e}"),
            SetupError::IndexOutOfRange { index, len } => write!(f, "index {index} out of range (len {len})"),
            SetupError::TooLarge { dim, limit } => {
                write!(f, "dimension {dim} exceeds the dense limit {limit}")
            }
            SetupError::NonFinite(what) => write!(f, "non-finite value in {what}"),
        }
    }
}

impl From<FactorizationError> for SetupError {
    fn from(e: FactorizationError) -> Self {
        SetupError::Factorization(e)
    }
}

/// Krylov solver failures.
#[derive(Debug, Clone, PartialEq)]
pub enum SolveError {
    /// A PCG scalar became non-finite or a curvature term vanished.
    Breakdown { iteration: usize },
    DimensionMismatch { expected: usize, found: usize },
}

impl fmt::Display for SolveError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolveError::Breakdown { iteration } => write!(f, "PCG breakdown at iteration {iteration}"),
            SolveError::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
        }
    }
}

/// Failure of a single time step.
#[derive(Debug, Clone, PartialEq)]
pub enum StepError {
    NotConverged { step: usize, residual_history: alloc::vec::Vec<f64> },
    Solver { step: usize, source: SolveError },
    Ionic { step: usize, reason: &'static str },
}

impl StepError {
    pub fn step(&self) -> usize {
        match self {
            StepError::NotConverged { step, .. } | StepError::Solver { step, .. } | StepError::Ionic { step, .. } => *step,
        }
    }
}

impl fmt::Display for StepError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StepError::NotConverged { step, residual_history } => write!(
                f,
                "linear solve did not converge at step {step} (final relative residual {:e})",
                residual_history.last().copied().unwrap_or(f64::NAN)
            ),
            StepError::Solver { step, source } => write!(f, "step {step}: {source}"),
            StepError::Ionic { step, reason } => write!(f, "step {step}: ionic model failure: {reason}"),
        }
    }
}

/// Top-level error for building and running simulations.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    Mesh(MeshError),
    Setup(SetupError),
    Step(StepError),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Mesh(e) => e.fmt(f),
            Error::Setup(e) => e.fmt(f),
            Error::Step(e) => e.fmt(f),
        }
    }
}

impl From<MeshError> for Error {
    fn from(e: MeshError) -> Self {
        Error::Mesh(e)
    }
}

impl From<SetupError> for Error {
    fn from(e: SetupError) -> Self {
        Error::Setup(e)
    }
}

impl From<StepError> for Error {
    fn from(e: StepError) -> Self {
        Error::Step(e)
    }
}

impl core::error::Error for MeshError {}
impl core::error::Error for FactorizationError {}
impl core::error::Error for SetupError {}
impl core::error::Error for SolveError {}
impl core::error::Error for StepError {}
impl core::error::Error for Error {}
