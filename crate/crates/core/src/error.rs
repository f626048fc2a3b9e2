use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("ring {ring} has {len} vertices, at least 3 are required")]
    InvalidRing { ring: usize, len: usize },

    #[error("malformed element: signed area {area:e} is not positive")]
    MalformedElement { area: f64 },

    #[error("element {element} references node {node}, but the mesh has {count} nodes")]
    InvalidNodeIndex { element: usize, node: usize, count: usize },

    #[error("infeasible spacing: placed {placed} of {wanted} seeds")]
    InfeasibleSpacing { placed: usize, wanted: usize },

    #[error("degenerate interface pair: offset {offset:e} must be below the local spacing {spacing:e}")]
    DegeneratePair { offset: f64, spacing: f64 },

    #[error("degenerate Voronoi diagram: seeds {0} and {1} coincide")]
    DuplicateSeeds(usize, usize),

    #[error("a tessellation needs at least 2 seeds, got {0}")]
    TooFewSeeds(usize),

    #[error("seed {0} lies outside the domain")]
    SeedOutsideDomain(usize),

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("incompressible material (poisson = 0.5) is not supported")]
    Incompressible,

    #[error("inadmissible material: {0}")]
    InvalidMaterial(String),

    #[error("degenerate element {element}: projection matrix is singular")]
    DegenerateElement { element: usize },

    #[error("poisson ratio {0} is outside the lattice calibration range [0, 1/3)")]
    CalibrationRange(f64),

    #[error("degenerate lattice element between nodes {0} and {1}")]
    DegenerateLatticeElement(usize, usize),

    #[error("node {node} component {component} is constrained twice with different values")]
    ConflictingConstraint { node: usize, component: usize },

    #[error("traction applied on interior edge ({0}, {1})")]
    InteriorTraction(usize, usize),

    #[error("under-constrained system: {0}")]
    UnderConstrained(String),

    #[error("solver failed after {iterations} iterations, relative residual {residual:e}")]
    SolverFailure { iterations: usize, residual: f64 },

    #[error("radius {r} lies outside the domain radius {b}")]
    OutsideDomain { r: f64, b: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("unknown configuration keys: {}", .0.join(", "))]
    UnknownKeys(Vec<String>),

    #[error("phase id {0} is used by the mesh but not defined")]
    UndefinedPhase(u32),

    #[error("unsupported mesh file version {0}")]
    MeshVersion(u32),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Toml(#[from] toml::de::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
