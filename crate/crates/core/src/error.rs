use alloc::string::String;

/// Errors raised by graph construction, metric solvers, kernel backends and verifiers.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("empty graph specification")]
    EmptySpec,

    #[error("unknown vertex id `{0}`")]
    UnknownVertex(String),

    #[error("duplicate vertex id `{0}`")]
    DuplicateVertex(String),

    #[error("loop edge at `{0}`")]
    LoopEdge(String),

    #[error("asymmetric duplicate edge `{u}`-`{v}`: weights {first} and {second}")]
    AsymmetricDuplicate {
        u: String,
        v: String,
        first: f64,
        second: f64,
    },

    #[error("nonpositive {what} {value} at `{at}`")]
    Nonpositive {
        what: &'static str,
        at: String,
        value: f64,
    },

    #[error("graph is disconnected ({components} components)")]
    Disconnected { components: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("{what} limited to {max} vertices, got {n}")]
    TooLarge {
        what: &'static str,
        n: usize,
        max: usize,
    },

    #[error("empty vertex set")]
    EmptySet,

    #[error("solver did not converge: {0}")]
    NoConvergence(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("monotonicity violated: {0}")]
    Monotonicity(String),
}

pub type Result<T> = core::result::Result<T, Error>;
