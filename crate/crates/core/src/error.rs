use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape admits no Jordan set of at least 7 hexagons at this mesh")]
    ShapeTooSmall,
    #[error("hexagon set is not a Jordan set: {0}")]
    NotJordan(String),
    #[error("invalid exploration endpoints: {0}")]
    InvalidEndpoints(String),
    #[error("domain has fewer than two e-vertices")]
    TooFewEVertices,
    #[error("loop pieces do not close into a single cycle: {0}")]
    NotClosed(String),
    #[error("inconsistent input: {0}")]
    InconsistentInput(String),
    #[error("cutoff {eps} must exceed three mesh units ({mesh})")]
    CutoffTooFine { eps: f64, mesh: f64 },
    #[error("slit map left its branch domain at step {0}")]
    StepUnstable(usize),
    #[error("point is within the resolution collar of the curve")]
    Indeterminate,
    #[error("invalid config field `{field}`: {message}")]
    ConfigInvalid { field: String, message: String },
    #[error("cannot merge manifests of different observables: {0} vs {1}")]
    MixedObservables(String, String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::ConfigInvalid {
            field: field.into(),
            message: message.into(),
        }
    }
}
