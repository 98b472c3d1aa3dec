use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid field spec: {0}")]
    InvalidSpec(String),

    #[error("index out of range: {what} = {index} not in [{lo}, {hi}]")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        lo: usize,
        hi: usize,
    },

    #[error("index order violated: expected {lhs_name} < {rhs_name}, got {lhs} and {rhs}")]
    IndexOrder {
        lhs_name: &'static str,
        rhs_name: &'static str,
        lhs: usize,
        rhs: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("length cap exceeded: requested {requested}, cap {cap}")]
    CapExceeded { requested: usize, cap: usize },

    #[error("eigensolver failed to converge (offending index {index:?})")]
    NoConvergence { index: Option<usize> },

    #[error("near-singular resolvent: z = {re}{im:+}i lies within {distance:e} of the spectrum")]
    NearSingular { re: f64, im: f64, distance: f64 },

    #[error("resolvent residual {residual:e} exceeds {bound:e}")]
    ResidualTooLarge { residual: f64, bound: f64 },

    #[error("contour does not enclose the spectrum hull: {0}")]
    BadContour(String),

    #[error("quadrature did not converge: successive difference {difference:e} at M = {points}")]
    QuadratureNotConverged { difference: f64, points: usize },

    #[error("insufficient data for fit: {0}")]
    InsufficientData(String),

    #[error("reflection-unsafe sample at t = {t}: front {front} + margin {margin} >= N = {n}")]
    ReflectionUnsafe {
        t: f64,
        front: usize,
        margin: usize,
        n: usize,
    },

    #[error("window-limited estimate: {0}")]
    WindowLimited(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
