use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("series carry different rho ({0} vs {1})")]
    RhoMismatch(f64, f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("index (l={l}, m={m}, n={n}) outside truncation box")]
    OutOfBounds { l: i32, m: i32, n: usize },

    #[error("exact resonance: divisor vanishes at (l, m) = ({l}, {m})")]
    Resonance { l: i32, m: i32 },

    #[error("small divisor {value:e} at (l, m) = ({l}, {m}) is below the floor {floor:e}")]
    SmallDivisor {
        l: i32,
        m: i32,
        value: f64,
        floor: f64,
    },

    #[error("degenerate twist: |Q00| = {q00} is below q = {q}")]
    Degenerate { q00: f64, q: f64 },

    #[error("analyticity index r = {r} exceeds the budget {max_r}")]
    NormBudget { r: f64, max_r: f64 },

    #[error("x = {x} lies outside the domain radius {radius}")]
    OutsideDomain { x: f64, radius: f64 },

    #[error("series is not real (defect {0:e})")]
    NotReal(f64),

    #[error("Lie series diverges: term norms stopped decreasing at term {terms} (norm {norm:e})")]
    Divergence { terms: usize, norm: f64 },

    #[error("Lie series tail {tail:e} above tolerance {tol:e} after {terms} terms")]
    NotConverged { terms: usize, tail: f64, tol: f64 },

    #[error("hypothesis ({which}) fails: {detail}")]
    Hypothesis { which: &'static str, detail: String },

    #[error("schedule condition ({condition}) fails at step {step}: {detail}")]
    Schedule {
        condition: &'static str,
        step: usize,
        detail: String,
    },

    #[error("contraction fails at step {step}: |V_next| = {next:e} > |V| = {current:e}")]
    Contraction {
        step: usize,
        current: f64,
        next: f64,
    },

    #[error("point with |X| = {0} is a pole of the (X, theta) chart")]
    Pole(f64),

    #[error("non-finite state at t = {t}; last good state {last:?}")]
    NonFinite { t: f64, last: Vec<f64> },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
