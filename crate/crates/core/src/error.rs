use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("trace is {trace}, expected 1")]
    TraceNotOne { trace: f64 },

    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("error-rate table has {found} entries, expected {expected} for {nodes} node(s)")]
    TableSize {
        nodes: usize,
        expected: usize,
        found: usize,
    },

    #[error("node-focused rate requires exactly one node, got {0}")]
    NodeFocusedNodeCount(usize),

    #[error("node-focused rate requires uniform basis probabilities, got p_z = {0}")]
    NodeFocusedBasis(f64),

    #[error("link {link} has zero gain")]
    ZeroGain { link: usize },

    #[error("link list is empty")]
    NoLinks,

    #[error("intensity bounds [{lower}, {upper}] are empty or outside (0, 10]")]
    EmptyBounds { lower: f64, upper: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_probability(name: &'static str, value: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&value) {
        return Err(Error::InvalidParameter {
            name,
            value,
            reason: "must lie in [0, 1]",
        });
    }
    Ok(())
}
