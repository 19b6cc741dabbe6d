use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("symmetric form is not positive definite (smallest eigenvalue {eigenvalue:e})")]
    NotPositiveDefinite { eigenvalue: f64 },

    #[error("metric is not positive definite at grid point {index} (smallest eigenvalue {eigenvalue:e})")]
    NotPositiveDefiniteAt { index: usize, eigenvalue: f64 },

    #[error("vectors do not span a plane (Gram determinant {gram:e})")]
    DegeneratePlane { gram: f64 },

    #[error("covector is zero")]
    ZeroCovector,

    #[error("frame is not rotated: off-diagonal Ricci component R23 = {r23:e}")]
    FrameNotRotated { r23: f64 },

    #[error("Ricci restriction to the normal plane is not diagonal: R23 = {r23:e}")]
    FrameNotDiagonalized { r23: f64 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("unsupported grid: {0}")]
    UnsupportedGrid(String),

    #[error("invalid coupling a = {0}")]
    InvalidCoupling(f64),

    #[error("linearization step {step:e} too large: perturbed metric lost definiteness")]
    StepTooLarge { step: f64 },

    #[error("integration stage lost definiteness at t = {t}, dt = {dt:e}")]
    StageFailure { t: f64, dt: f64 },

    #[error(
        "initial data rejected: parabolicity margin {margin:e} at point {point}, plane {plane:?}"
    )]
    InitialConditionRejected {
        margin: f64,
        point: usize,
        plane: [f64; 3],
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(
        "sign convention self-check failed: sectional curvature of the unit sphere came out {0}"
    )]
    SignConvention(f64),

    #[error("snapshot format: {0}")]
    Snapshot(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
