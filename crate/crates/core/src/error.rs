use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Coarse classification used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Malformed input: bad expression, bad sizes, invalid graph.
    Input,
    /// The potential violates a modeling hypothesis (Morse, equal heights, confinement).
    Hypothesis,
    /// An algorithm failed to converge or a quantity left floating-point range.
    Numerical,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("unknown identifier `{name}` at offset {offset}")]
    UnknownIdentifier { name: String, offset: usize },

    #[error("exponent at offset {offset} must be a non-negative integer literal")]
    NonIntegerExponent { offset: usize },

    #[error("division by zero at x = {x}")]
    DivisionByZero { x: f64 },

    #[error("non-finite value while evaluating at x = {x}")]
    NonFinite { x: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("size mismatch: {0}")]
    SizeMismatch(String),

    #[error("non-positive Hessian datum {value} in `{which}`")]
    NonPositiveHessian { which: &'static str, value: f64 },

    #[error("graph is disconnected ({components} components)")]
    DisconnectedGraph { components: usize },

    #[error("graph has a repeated edge between `{0}` and `{1}`")]
    MultiEdge(String, String),

    #[error("graph has a self-loop at `{0}`")]
    SelfLoop(String),

    #[error("graph references unknown vertex `{0}`")]
    UnknownVertex(String),

    #[error("matrix is not positive semi-definite (eigenvalue {eigenvalue})")]
    NotPositiveSemiDefinite { eigenvalue: f64 },

    #[error("Newton iteration did not converge near x = {x}")]
    NewtonNonConvergence { x: f64 },

    #[error("degenerate landscape: {0}")]
    DegenerateLandscape(String),

    #[error("well {well} contains {count} minima")]
    WellMinimumCount { well: usize, count: usize },

    #[error("potential is not confining: {0}")]
    NotConfining(String),

    #[error("grid has {n} nodes, at least {min} required")]
    GridTooSmall { n: usize, min: usize },

    #[error("grid has {n} nodes, dense diagonalization is capped at {max}")]
    GridTooLarge { n: usize, max: usize },

    #[error("grid too coarse for h = {h}: exponent {exponent} exceeds {limit}")]
    ExponentTooLarge { h: f64, exponent: f64, limit: f64 },

    #[error("exponential weight out of floating-point range: {0}")]
    Overflow(String),

    #[error("cutoff plateau is empty for well {well} (eps_cut = {eps_cut})")]
    EmptyCutoff { well: usize, eps_cut: f64 },

    #[error("cutoff supports overlap: {0}")]
    OverlappingSupports(String),

    #[error("projection of quasi-mode {index} has norm {norm} < 0.5")]
    RankDeficientProjection { index: usize, norm: f64 },

    #[error("{algorithm} did not converge after {iterations} iterations")]
    NonConvergence { algorithm: &'static str, iterations: usize },
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        use Error::*;
        match self {
            Syntax { .. }
            | UnknownIdentifier { .. }
            | NonIntegerExponent { .. }
            | InvalidArgument(_)
            | SizeMismatch(_)
            | NonPositiveHessian { .. }
            | DisconnectedGraph { .. }
            | MultiEdge(..)
            | SelfLoop(_)
            | UnknownVertex(_)
            | GridTooSmall { .. }
            | GridTooLarge { .. } => ErrorClass::Input,
            DegenerateLandscape(_) | WellMinimumCount { .. } | NotConfining(_) => ErrorClass::Hypothesis,
            DivisionByZero { .. }
            | NonFinite { .. }
            | NotPositiveSemiDefinite { .. }
            | NewtonNonConvergence { .. }
            | ExponentTooLarge { .. }
            | Overflow(_)
            | EmptyCutoff { .. }
            | OverlappingSupports(_)
            | RankDeficientProjection { .. }
            | NonConvergence { .. } => ErrorClass::Numerical,
        }
    }
}
