use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid group rank {0} (supported: 2..=4)")]
    InvalidRank(usize),
    #[error("rank mismatch: {0} vs {1}")]
    RankMismatch(usize, usize),
    #[error("non-finite values in {0}")]
    NonFinite(&'static str),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("resolution {0} on axis {1} is below the minimum of 8")]
    ResolutionTooSmall(usize, &'static str),
    #[error("expected {expected} resolutions for {kind}, got {got}")]
    ResolutionCount { kind: &'static str, expected: usize, got: usize },
    #[error("sample count mismatch: expected {expected}, got {got}")]
    SampleCount { expected: usize, got: usize },
    #[error("domain mismatch: {0}")]
    DomainMismatch(String),
    #[error("form degree {p} + {q} exceeds domain dimension {dim}")]
    DegreeOverflow { p: usize, q: usize, dim: usize },
    #[error("exterior derivative of a top-degree form")]
    TopDegree,
    #[error("boundary mismatch: sup distance {0:.3e} exceeds tolerance")]
    BoundaryMismatch(f64),
    #[error("imaginary residual {0:.3e} exceeds tolerance")]
    ImaginaryResidual(f64),
    #[error("ambiguous sign: distance {0:.3e} to nearest of ±1 exceeds 0.1")]
    AmbiguousSign(f64),
    #[error("bump function endpoint conditions violated: {0}")]
    BumpEndpoints(String),
    #[error("not a path in K: {0}")]
    NotPathK(String),
    #[error("no constructive witness for f⁻¹g: {0}")]
    NoBridge(String),
    #[error("unknown suite '{0}'")]
    UnknownSuite(String),
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
