use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("walk step {index} ({from} -> {to}) is not an edge of the graph")]
    MalformedWalk { index: usize, from: usize, to: usize },

    #[error("graph is disconnected ({components} components)")]
    Disconnected { components: usize },

    #[error("vertex {0} is not in the graph")]
    UnknownVertex(usize),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("integer overflow while integrating cochain")]
    Overflow,

    #[error("malformed tiling: {0}")]
    MalformedTiling(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("singular pentagrid: lines ({families:?}) meet at one point near {point:?}; perturb the offsets, e.g. add 1/97 to gamma_{}", families[2])]
    SingularPentagrid { families: [usize; 3], point: [f64; 2] },

    #[error("point lies on a grid line of family {family} (strip index undefined)")]
    OnGridLine { family: usize },

    #[error("non-generic window: lattice point {point:?} projects within 1e-9 of the window boundary; shift the internal offset")]
    NonGenericWindow { point: Vec<i64> },

    #[error("invalid scheme: {0}")]
    InvalidScheme(String),

    #[error("size limit exceeded: {requested} cells requested, limit is {limit}")]
    TooLarge { requested: u128, limit: u128 },

    #[error("inconsistent equivalence verdicts: {0}")]
    Inconsistent(String),
}
