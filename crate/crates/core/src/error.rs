//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum FsiError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid solid mesh: {0}")]
    InvalidMesh(String),

    #[error("point {point:?} lies outside the grid extents beyond tolerance")]
    PointOutsideDomain { point: Vec<f64> },

    #[error("solid node {node} at {point:?} lies outside the fluid domain")]
    SolidNodeOutsideDomain { node: usize, point: Vec<f64> },

    #[error("element {element} is inverted (jacobian determinant {det:.3e})")]
    InvertedElement { element: usize, det: f64 },

    #[error("unsupported quadrature order {order} for {kind}")]
    UnsupportedOrder { kind: String, order: usize },

    #[error("invalid physical parameters: {0}")]
    InvalidParams(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("conflicting constraints on dof {dof}: values {a:.6e} and {b:.6e}")]
    ConflictingConstraint { dof: usize, a: f64, b: f64 },

    #[error("linear system is singular or ill-conditioned: {0}")]
    SingularSystem(String),

    #[error("linear solve residual {residual:.3e} exceeds tolerance {tol:.3e}")]
    ResidualTooLarge { residual: f64, tol: f64 },

    #[error(
        "fixed-point loop did not converge in {iterations} iterations \
         (increment history: {history:?})"
    )]
    FixedPointDiverged { iterations: usize, history: Vec<f64> },

    #[error("step {step} failed: {source}")]
    StepFailed {
        step: usize,
        #[source]
        source: Box<FsiError>,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("mesh file format error: {0}")]
    MeshFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
