use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("site {site} out of range for {modes} modes")]
    SiteOutOfRange { site: usize, modes: usize },
    #[error("duplicate site {0} in site list")]
    DuplicateSite(usize),
    #[error("region is empty")]
    EmptyRegion,
    #[error("requested cutoff {requested} exceeds simulation cutoff {available}")]
    CutoffExceeded { requested: usize, available: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("degree mismatch: {0}")]
    DegreeMismatch(String),
    #[error("ill-conditioned or singular system: {0}")]
    Singular(String),
    #[error("node placement violated: {0}")]
    NodePlacement(String),
    #[error("integrator step budget exhausted at t = {t} after {steps} steps")]
    StepBudget { steps: usize, t: f64 },
    #[error("rejection envelope violated (ratio {ratio:.4} > 1)")]
    Envelope { ratio: f64 },
    #[error("graph has no lattice coordinates")]
    MissingCoordinates,
    #[error("dimension {dim} exceeds the configured limit {limit}")]
    DimensionOverflow { dim: usize, limit: usize },
    #[error("offset correction residual {residual:.3e} exceeds tolerance {tol:.1e}")]
    OffsetMismatch { residual: f64, tol: f64 },
    #[error("config: {0}")]
    Config(String),
    #[error("plot: {0}")]
    Plot(String),
    #[error("[{stage}] {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn at(stage: &'static str) -> impl FnOnce(Error) -> Error {
        move |e| Error::Stage {
            stage,
            source: Box::new(e),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
