use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("inclusion touches the cell boundary: {0}")]
    InclusionTouchesBoundary(String),
    #[error("mesh generation failed: {0}")]
    MeshGenerationFailure(String),
    #[error("mesh size {h} too coarse for eps = {eps} (need h <= eps/4)")]
    ResolutionTooCoarse { h: f64, eps: f64 },
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),
    #[error("degenerate element {element} (area {area:e})")]
    DegenerateElement { element: usize, area: f64 },
    #[error("field does not match mesh: {0}")]
    FieldMeshMismatch(String),
    #[error("inconsistent constraints: {0}")]
    InconsistentConstraint(String),
    #[error("linear solver breakdown: {0}")]
    SolverBreakdown(String),
    #[error("maximum iterations ({iterations}) exceeded, relative residual {residual:e}")]
    MaxIterationsExceeded { iterations: usize, residual: f64 },
    #[error("no solid phase: {0}")]
    NoSolidPhase(String),
    #[error("formula mismatch for {quantity}: averaging {averaged:e} vs energy {energy:e}")]
    FormulaMismatch {
        quantity: String,
        averaged: f64,
        energy: f64,
    },
    #[error("point ({x}, {y}) lies outside the fluid part")]
    PointOutsideFluidPart { x: f64, y: f64 },
    #[error("inadmissible scaling: {0}")]
    InadmissibleScaling(String),
    #[error("incompatible source: net source {residual:e} exceeds tolerance {tolerance:e}")]
    IncompatibleSource { residual: f64, tolerance: f64 },
    #[error("fixed-point iteration did not converge after {iterations} iterations (last change {change:e})")]
    FixedPointDivergence { iterations: usize, change: f64 },
    #[error("coarse grid misaligned with eps-cells: {0}")]
    GridMisaligned(String),
    #[error("malformed diagnostics: {0}")]
    MalformedDiagnostics(String),
    #[error("invalid input data: {0}")]
    InvalidData(String),
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid value for `{field}`: {message}")]
    Validation { field: String, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("{module}::{operation}: {source}")]
    Context {
        module: &'static str,
        operation: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn validation(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            message: message.into(),
        }
    }

    /// Innermost error, with any operation context stripped.
    pub fn root(&self) -> &Error {
        match self {
            Error::Context { source, .. } => source.root(),
            other => other,
        }
    }

    /// True for errors caused by bad user input rather than numerics.
    pub fn is_usage(&self) -> bool {
        matches!(
            self.root(),
            Error::Parse { .. }
                | Error::Validation { .. }
                | Error::Io(_)
                | Error::MalformedDiagnostics(_)
                | Error::InadmissibleScaling(_)
        )
    }
}

/// Attaches the originating module and operation to an error.
pub trait Context<T> {
    fn during(self, module: &'static str, operation: &'static str) -> Result<T>;
}

impl<T> Context<T> for Result<T> {
    fn during(self, module: &'static str, operation: &'static str) -> Result<T> {
        self.map_err(|e| match e {
            ctx @ Error::Context { .. } => ctx,
            other => Error::Context {
                module,
                operation,
                source: Box::new(other),
            },
        })
    }
}
