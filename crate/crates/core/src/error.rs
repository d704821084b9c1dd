use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{context}: dimension mismatch ({left} vs {right})")]
    DimensionMismatch {
        context: &'static str,
        left: usize,
        right: usize,
    },

    #[error("{context}: shape mismatch ({}x{} vs {}x{})", left.0, left.1, right.0, right.1)]
    ShapeMismatch {
        context: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("{0}: non-finite entry")]
    NonFinite(&'static str),

    #[error("{0}: empty input")]
    Empty(&'static str),

    #[error("{context}: operator is {rows}x{cols}, expected square")]
    NonSquare {
        context: &'static str,
        rows: usize,
        cols: usize,
    },

    #[error("operator is not Hermitian: |O - O*| = {deviation:e} exceeds {allowed:e}")]
    NotHermitian { deviation: f64, allowed: f64 },

    #[error("{what} did not converge on a {rows}x{cols} matrix (Frobenius norm {frobenius:e})")]
    Numerical {
        what: &'static str,
        rows: usize,
        cols: usize,
        frobenius: f64,
    },

    #[error("{what}: cross-check deviation {deviation:e} exceeds {allowed:e}")]
    CrossCheck {
        what: &'static str,
        deviation: f64,
        allowed: f64,
    },

    #[error("not a frame (A_opt = {lower:e}, B_opt = {upper:e})")]
    NotAFrame { lower: f64, upper: f64 },

    #[error("{0}: not a Riesz basis")]
    NotRieszBasis(&'static str),

    #[error("{0}: not a Riesz sequence")]
    NotRieszSequence(&'static str),

    #[error("symbol is not semi-normalized (min |m_k| = {min_abs:e}, max |m_k| = {max_abs:e})")]
    NotSemiNormalized { min_abs: f64, max_abs: f64 },

    #[error("{what} infeasible after {retries} retries")]
    Infeasible { what: String, retries: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
