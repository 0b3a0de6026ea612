use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BergmanError {
    #[error("malformed weight spec `{0}`: {1}")]
    WeightSyntax(String, String),
    #[error("alpha must exceed -1, got {0}")]
    AlphaOutOfRange(f64),
    #[error("M(1) must equal 1, got {0}")]
    BoundaryValue(f64),
    #[error("M is not positive on [0,1]: M({r}) = {value}")]
    NonPositiveWeight { r: f64, value: f64 },
    #[error("quadrature order must be at least 1")]
    ZeroOrder,
    #[error("tridiagonal eigensolver did not converge for eigenvalue {index} of order {order}")]
    EigenNoConvergence { index: usize, order: usize },
    #[error("argument outside the open unit disc: |{0}| >= 1")]
    OutsideDisc(String),
    #[error("series ratio rho = {0} must satisfy 0 <= rho < 1")]
    RhoOutOfRange(f64),
    #[error("truncation degree exceeds the cap of {0}")]
    TruncationCap(usize),
    #[error("malformed function spec `{0}`: {1}")]
    FnSyntax(String, String),
    #[error("samples of `{0}` are not finite on the grid")]
    NonFiniteSamples(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("exponent p = {0} must lie in (1, inf)")]
    ExponentOutOfRange(f64),
    #[error("grid built for alpha = {grid} but weight has alpha = {weight}")]
    GridMismatch { grid: f64, weight: f64 },
    #[error("truncation degree {n} too large: {reason}")]
    DegreeTooLarge { n: usize, reason: String },
    #[error("multiplier sequence has n_max = {n_max} but the input has degree {degree}")]
    DegreeOverflow { degree: usize, n_max: usize },
    #[error("`{0}` is not in L^p for p = {1} (guard: {2})")]
    NotInLp(String, f64, String),
    #[error("`{0}` has no known Taylor sequence")]
    NoTaylorSequence(String),
    #[error("lemma quantities need n >= 1")]
    LemmaIndex,
    #[error("cross-validation failed at n = {n}: direct {direct:e} vs integrated-by-parts {ibp:e}")]
    CrossValidation { n: usize, direct: f64, ibp: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, BergmanError>;
