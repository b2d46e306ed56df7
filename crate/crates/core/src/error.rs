use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("sum order h must be at least 2, got {0}")]
    InvalidH(u32),

    #[error("window [{lo}, {hi}] spans more than {max} integers")]
    WindowTooLarge { lo: i64, hi: i64, max: i64 },

    #[error("infinite set requires an explicit window")]
    MissingWindow,

    #[error("invalid generator parameters: {0}")]
    InvalidGenerator(String),

    #[error("domain error in {op}: {msg}")]
    Domain { op: &'static str, msg: String },

    #[error("Bessel evaluation overflow for order {order} at x = {x}")]
    BesselOverflow { order: i64, x: f64 },

    #[error(
        "order {order} exceeds the validity range for truncation N = {n}: \
         need lambda_(N+1)/3 = {limit:.3} > 2 * order"
    )]
    OrderOutOfRange { order: u64, n: usize, limit: f64 },

    #[error("tail bound {tail:e} exceeds the configured target {target:e}; increase N")]
    TailExceedsTarget { tail: f64, target: f64 },

    #[error("adaptive integration did not reach tolerance {tol:e} within {panels} panels (estimate {err:e})")]
    ToleranceNotReached { tol: f64, panels: usize, err: f64 },

    #[error("enclosure too wide to decide {case}: {detail}")]
    Undecidable { case: String, detail: String },

    #[error("spectrum has {len} frequencies, the limit for this evaluator is {max}")]
    SpectrumTooLarge { len: usize, max: usize },

    #[error("spectrum must be nonempty with nonzero coefficients")]
    EmptySpectrum,

    #[error("spectrum is not a P({h}) set: {witness}")]
    NotPh { h: u32, witness: String },

    #[error("evaluation inconsistency: {0}")]
    Inconsistent(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("zero cache: {0}")]
    Cache(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
