use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("AAᵀ is numerically singular: smallest eigenvalue {min_eigenvalue:e} is below tolerance {tolerance:e}")]
    SingularGram { min_eigenvalue: f64, tolerance: f64 },

    #[error("{subsets} column subsets exceed the enumeration cap of {cap}")]
    TooManySubsets { subsets: u128, cap: u128 },

    #[error("matrix is not orthonormal: max |UUᵀ - I| = {deviation:e}")]
    NotOrthonormal { deviation: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn dim_check(what: &str, expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::Dimension(format!(
            "{what}: expected length {expected}, got {got}"
        )))
    }
}
