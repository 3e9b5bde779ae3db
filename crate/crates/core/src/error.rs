use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("alphabet size must be at least 1")]
    EmptyAlphabet,

    #[error("state count must be at least 1")]
    NoStates,

    #[error("symbol {symbol} out of range for alphabet of size {alphabet}")]
    SymbolOutOfRange { symbol: usize, alphabet: usize },

    #[error("state {state} out of range for {k} states")]
    StateOutOfRange { state: usize, k: usize },

    #[error("predictor index {index} out of range ({count} predictors exist)")]
    IndexOutOfRange { index: u128, count: u128 },

    #[error("predictor count overflows 128-bit arithmetic for k={k}, alphabet={alphabet}")]
    CountOverflow { k: usize, alphabet: usize },

    #[error("update factor must be at least 1, got {0}")]
    LambdaOutOfRange(String),

    #[error("update factor must be strictly greater than 1 for a finite bound, got {0}")]
    LambdaNotAboveOne(String),

    #[error("pool is empty")]
    EmptyPool,

    #[error("a materialized pool supports at most {max} members, requested {requested}; larger spaces go through the streaming evaluator or index search")]
    PoolTooLarge { requested: u128, max: u128 },

    #[error("exact mode supports sequences of at most {max} symbols, requested {requested}")]
    ExactSequenceTooLong { requested: usize, max: usize },

    #[error("streaming evaluation of {ops} predictor-steps exceeds the budget of {budget}")]
    StreamTooLarge { ops: u128, budget: u128 },

    #[error("weight cube would need {cells} cells, limit is {max}")]
    CubeTooLarge { cells: u128, max: u128 },

    #[error("cube total weight is zero")]
    ZeroTotal,

    #[error("state weight vector must have exactly one nonzero entry")]
    MalformedStateWeights,

    #[error("alphabet size {alphabet} exceeds node count {k}")]
    AlphabetExceedsNodes { alphabet: usize, k: usize },

    #[error("search space of {count} predictors exceeds the budget of {budget}; use the constructive witness for k >= period")]
    SearchBudgetExceeded { count: u128, budget: u128 },

    #[error("sweep of {ops} oracle operations exceeds the budget of {budget}")]
    SweepBudgetExceeded { ops: u128, budget: u128 },

    #[error("best error rate increased from {prev} at k={k_prev} to {next} at k={k_next}")]
    NonMonotoneCurve {
        k_prev: usize,
        prev: String,
        k_next: usize,
        next: String,
    },

    #[error("pattern must not be empty")]
    EmptyPattern,

    #[error("gate must not be empty")]
    EmptyGate,

    #[error("generator blocks must share one alphabet: {left} vs {right}")]
    AlphabetMismatch { left: usize, right: usize },

    #[error("cannot parse symbol sequence {input:?}: {reason}")]
    SequenceParse { input: String, reason: String },

    #[error("cannot parse ratio {input:?}: expected \"p\" or \"p/q\" with q > 0")]
    RatioParse { input: String },

    #[error("{0}")]
    InvalidSpec(String),
}

pub type Result<T> = std::result::Result<T, Error>;
