use crate::pharmonic::ScalarField;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("no convergence after {iterations} iterations: {context}")]
    NoConvergence {
        iterations: usize,
        context: String,
        /// Best iterate reached before giving up, when the failing routine produced one.
        best: Option<Box<ScalarField>>,
    },

    #[error("energy increased after exhausting backtracking at iteration {iteration} (regularization too small for the mesh?)")]
    NotMonotone { iteration: usize },

    #[error("origin is not strictly inside the domain")]
    OriginOutside,

    #[error("invalid mesh: {0}")]
    MeshInvalid(String),

    #[error("value out of range: {0}")]
    OutOfRange(String),

    #[error("level {level} outside the admissible range ({lo}, {hi})")]
    LevelOutOfRange { level: f64, lo: f64, hi: f64 },

    #[error("level {0} produced a contour that reaches the mesh boundary")]
    OpenContour(f64),

    #[error("competitor differs from the reference outside the compact window")]
    WindowViolation,

    #[error("positivity lost: v = {value} at node {node}")]
    PositivityLost { node: usize, value: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("linear solver failure: {0}")]
    LinearSolver(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Short machine-readable tag used in the CLI error JSON.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DegenerateInput(_) => "DegenerateInput",
            Error::NoConvergence { .. } => "NoConvergence",
            Error::NotMonotone { .. } => "NotMonotone",
            Error::OriginOutside => "OriginOutside",
            Error::MeshInvalid(_) => "MeshInvalid",
            Error::OutOfRange(_) => "OutOfRange",
            Error::LevelOutOfRange { .. } => "LevelOutOfRange",
            Error::OpenContour(_) => "OpenContour",
            Error::WindowViolation => "WindowViolation",
            Error::PositivityLost { .. } => "PositivityLost",
            Error::Config(_) => "Config",
            Error::LinearSolver(_) => "LinearSolver",
            Error::Io(_) => "Io",
            Error::Csv(_) => "Csv",
            Error::Json(_) => "Json",
        }
    }
}
