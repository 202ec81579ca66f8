use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("incompatible polynomial spaces: degree bounds {left} and {right}")]
    IncompatibleSpaces { left: usize, right: usize },

    #[error("invalid polynomial: {0}")]
    InvalidPolynomial(String),

    #[error("no root factorization of 0")]
    ZeroPolynomial,

    #[error(
        "root finder did not converge after {iterations} iterations (max residual {residual:e})"
    )]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("division by zero polynomial")]
    DivisionByZero,

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("channel {0} identically zero")]
    ZeroChannel(usize),

    #[error(
        "correlation matrix is not coprime (gcd has degree bound {gcd_bound}); use enumerate_all"
    )]
    NotCoprime { gcd_bound: usize },

    #[error("inconsistent correlation data: {0}")]
    InconsistentData(String),

    #[error("not a valid autocorrelation gcd: {0}")]
    InvalidGcd(String),

    #[error("inconsistent spectral factor: {0}")]
    InconsistentSpectralFactor(String),

    #[error("gcd/entry inconsistency: division residual {0:e}")]
    GcdEntryInconsistency(f64),

    #[error("not a palindromic correlation matrix: {0}")]
    NotPalindromic(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("combinatorial budget exceeded: {needed} candidates > budget {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },
}
