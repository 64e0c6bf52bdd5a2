use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FormError {
    #[error("exact and float scalars cannot be mixed")]
    ModeMismatch,
    #[error("degree overflow: {0} + {1} exceeds the ambient dimension {2}")]
    DegreeOverflow(usize, usize, usize),
    #[error("arity mismatch: form of degree {expected} given {got} vectors")]
    Arity { expected: usize, got: usize },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("matrix is not skew-symmetric (defect {0:e})")]
    NotSkew(f64),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FrameError {
    #[error("plane vectors are not orthonormal (defect {0:e})")]
    InvalidPlane(f64),
    #[error("all reference vectors are degenerate for this plane")]
    Degenerate,
    #[error("completed frame is not Spin(7)-adapted (|g*Phi - Phi| = {0:e})")]
    NotAdapted(f64),
    #[error("complex structure has zero projection onto the complement")]
    ZeroProjection,
    #[error("frame at stencil point is not orthonormal (defect {0:e})")]
    NonOrthonormal(f64),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CurveError {
    #[error(transparent)]
    Frame(#[from] FrameError),
    #[error("curve is not pseudoholomorphic (residual {0:e})")]
    NotPseudoholomorphic(f64),
    #[error("degree needs a closed surface; chart domain is open")]
    OpenDomain,
    #[error("section is not orthogonal to the ruling plane at ({u}, {v}): defect {defect:e}")]
    SectionNotInH { u: f64, v: f64, defect: f64 },
    #[error("I1 vanishes on the chart (sup {0:e}); the I1-line is undefined")]
    I1Vanishes(f64),
    #[error("curve is degenerate (rank < 2 at every sample)")]
    Degenerate,
    #[error("solver failed: {0}")]
    Solver(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpecError {
    #[error("{path}: {message}")]
    Invalid { path: String, message: String },
    #[error("unsupported schema version {0} (expected 1)")]
    Schema(u64),
}

impl SpecError {
    pub fn at(path: impl Into<String>, message: impl Into<String>) -> Self {
        SpecError::Invalid { path: path.into(), message: message.into() }
    }
}
