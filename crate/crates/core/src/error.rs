use thiserror::Error;

pub type Result<T, E = JcError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum JcError {
    #[error("coherent amplitude |alpha|^2 = {alpha_sq} exceeds 0.5 * n_max = {limit}")]
    Truncation { alpha_sq: f64, limit: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("sparse factorization broke down: {0}")]
    SingularSystem(String),

    #[error("steady-state residual {residual:.3e} exceeds tolerance {tol:.3e}")]
    ResidualTooLarge { residual: f64, tol: f64 },

    #[error(
        "time evolution did not reach residual {tol:.3e} by t = {t_max} (residual {residual:.3e})"
    )]
    NotConverged { t_max: f64, residual: f64, tol: f64 },

    #[error("vectorized dimension {dim} exceeds dense limit {limit}")]
    DimensionTooLarge { dim: usize, limit: usize },

    #[error(
        "null space is not one-dimensional: smallest singular values {smallest:.3e} and {next:.3e}"
    )]
    DegenerateNullSpace { smallest: f64, next: f64 },

    #[error("truncation did not converge below n_max cap {cap}; <n> history {history:?}")]
    TruncationCapExceeded {
        cap: usize,
        history: Vec<(usize, f64)>,
    },

    #[error("quadratic peak fit is not negative definite at ({x:.4}, {y:.4}); refine the grid")]
    GridTooCoarse { x: f64, y: f64 },

    #[error("step size underflow at t = {t} (h = {h:.3e})")]
    StepSizeUnderflow { t: f64, h: f64 },

    #[error("gamma = 0 and drive-qubit detuning = 0: Maxwell-Bloch state equation is singular")]
    SingularGammaTilde,

    #[error("qubit-cavity detuning is zero: use the neoclassical or phase-bistable solvers")]
    DeltaZero,

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid value for `{key}`: {message}")]
    Validation { key: String, message: String },

    #[error("{panel}: {source}")]
    Panel {
        panel: String,
        #[source]
        source: Box<JcError>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl JcError {
    pub fn in_panel(self, panel: impl Into<String>) -> Self {
        JcError::Panel {
            panel: panel.into(),
            source: Box::new(self),
        }
    }
}
