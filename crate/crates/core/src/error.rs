use thiserror::Error;

/// Errors raised by the library. Variants are grouped by the module that
/// raises them; most carry enough context to name the offending value.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    // gridfn
    #[error("grid mismatch: ({0}, {1}) vs ({2}, {3})")]
    GridMismatch(f64, usize, f64, usize),
    #[error("aliasing risk: {mass:.3e} of L1 mass lies in the outer 10% of the grid")]
    AliasingRisk { mass: f64 },
    #[error("cutoff {cutoff} exceeds the Nyquist frequency {nyquist}")]
    CutoffAboveNyquist { cutoff: f64, nyquist: f64 },
    #[error("invalid norm exponent p = {0}")]
    InvalidP(f64),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    // kernels
    #[error("kernel scale {scale} is below 4 grid spacings ({min})")]
    ScaleTooSmall { scale: f64, min: f64 },
    #[error("unknown kernel family `{0}`")]
    UnknownFamily(String),
    #[error("invalid superkernel shape: flat = {flat}, cutoff = {cutoff}")]
    InvalidShape { flat: f64, cutoff: f64 },

    // transforms
    #[error("series not converged: |d_J| (sigma t)^J = {term:.3e} at the band edge for J = {order}")]
    SeriesNotConverged { order: usize, term: f64 },
    #[error("delta must lie in (0, 1), got {0}")]
    NegativeDelta(f64),

    // discretize
    #[error("moment matrix condition number {0:.3e} exceeds 1e12")]
    IllConditionedMoments(f64),
    #[error("invalid support: {0}")]
    InvalidSupport(String),
    #[error("support budget regime unavailable: {0}")]
    RegimeUnavailable(String),

    // priors
    #[error("invalid Pitman-Yor parameters: c = {c}, d = {d}")]
    InvalidDiscount { c: f64, d: f64 },
    #[error("stick-breaking truncation exceeded {0} sticks")]
    TruncationOverflow(usize),
    #[error("simplex point on or outside the boundary")]
    BoundaryPoint,
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("scale must be positive, got {0}")]
    NonPositiveSigma(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    // metrics
    #[error("model density vanishes where the reference density is positive ({0} points)")]
    SupportViolation(usize),

    // posterior
    #[error("need at least {need} post-burn-in draws, got {got}")]
    TooFewDraws { need: usize, got: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
