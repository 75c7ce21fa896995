use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("index out of range: {0}")]
    Index(String),

    #[error("space mismatch: {0}")]
    Space(String),

    #[error("Jacobi identity fails at ({i},{j},{k})")]
    Jacobi { i: usize, j: usize, k: usize },

    #[error("structure constants must be given for i < j (got {i},{j})")]
    BracketOrder { i: usize, j: usize },

    #[error("form is not basic: {0}")]
    NotBasic(String),

    #[error("weight mismatch: {0}")]
    Weight(String),

    #[error("degree underflow: {p} + {q} < {n}")]
    DegreeUnderflow { p: usize, q: usize, n: usize },

    #[error("invalid valuation: {0}")]
    InvalidValuation(String),

    #[error("primitive solver failed: {0}")]
    Solver(String),

    #[error("linear system: {0}")]
    Linear(String),

    #[error("algebra table: {0}")]
    Algebra(String),

    #[error("not Ad-invariant: {0}")]
    NotInvariant(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}
