use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum BeltramiError {
    #[error("degree {degree} exceeds supported cap {cap}")]
    UnsupportedDegree { degree: usize, cap: usize },

    #[error("{what} = {value} is outside its domain")]
    Domain { what: &'static str, value: f64 },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("quadrature too coarse: {nodes} sphere nodes, need at least {required}")]
    Aliasing { nodes: usize, required: usize },

    #[error("fit error {achieved:.3e} exceeds tolerance {tolerance:.3e}")]
    FitFailure { achieved: f64, tolerance: f64 },

    #[error("harmonic degrees disagree: {0:?}")]
    DegreeMismatch(Vec<u32>),

    #[error("matrix is not a rotation: {0}")]
    NotRotation(String),

    #[error("invalid group generator: {0}")]
    Group(String),

    #[error("centers {i} and {j} are {kind}")]
    Centers { i: usize, j: usize, kind: &'static str },

    #[error("atom {index} direction is not on the lattice of radius^2 {norm2}")]
    NonLatticeDirection { index: usize, norm2: u64 },

    #[error("field is identically zero")]
    ZeroField,

    #[error("section not transversal at seed {seed} (|u.n| = {dot:.3e})")]
    Transversality { seed: usize, dot: f64 },

    #[error("seed {seed} made {returns} of {requested} section returns")]
    Escape { seed: usize, returns: usize, requested: usize },

    #[error("derivative order {requested} unavailable (max {available})")]
    DerivativeOrder { requested: usize, available: usize },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{check} = {value:.3e} exceeds {bound:.3e}")]
    Invariant { check: &'static str, value: f64, bound: f64 },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("config: {0}")]
    Config(String),

    #[error("stage {stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<BeltramiError>,
    },
}

pub type Result<T> = std::result::Result<T, BeltramiError>;

impl BeltramiError {
    pub fn at_stage(self, stage: &'static str) -> Self {
        BeltramiError::Stage { stage, source: Box::new(self) }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        BeltramiError::Io { path: path.into(), source }
    }
}
