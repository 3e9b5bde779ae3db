//! Exact-arithmetic machinery for online prediction with finite-state
//! machines.
//!
//! The crate provides, end to end:
//!
//! - single deterministic finite-state predictors and their traces
//!   ([`predictor`]), plus a canonical integer indexing of the entire
//!   K-state predictor space ([`enumeration`]);
//! - multiplicative-weights aggregation over a pool of predictors, the
//!   exhaustive best-member search, and the classic mistake bound
//!   ([`pool`]);
//! - the weight hypercube over full transition tables, its per-state
//!   marginals, and the product-form invariance of plane updates
//!   ([`hypercube`]);
//! - the K-node mean-field network that evolves only marginal weights
//!   ([`network`]);
//! - side-by-side verification of the pool and the network in exact
//!   rational arithmetic, including full-length sweeps ([`equivalence`]);
//! - complexity profiles of periodic sequences — the best achievable
//!   asymptotic error rate as a function of machine size ([`complexity`]);
//! - sequence sources for experiments, the gated-composite lookback
//!   construction, and the bounded-window baseline ([`seqgen`]).
//!
//! All aggregate arithmetic is generic over [`scalar::Scalar`], with exact
//! rationals (`BigRational`) as the reference implementation and `f64` as
//! the fast approximate mode. Display conventions are one-based (symbols
//! `a1, a2, …`); internal indices are zero-based.

pub mod alphabet;
pub mod complexity;
pub mod enumeration;
pub mod equivalence;
pub mod error;
pub mod hypercube;
pub mod network;
pub mod pool;
pub mod predictor;
pub mod scalar;
pub mod seqgen;

pub use alphabet::{parse_sequence_text, Alphabet, StateId, Symbol};
pub use complexity::{
    asymptotic_error, best_k_state, cyclic_witness, profile, AsymptoticError, ComplexityCurve,
    ComplexityPoint,
};
pub use enumeration::{predictor_count, PredictorIndex, PredictorSpace};
pub use equivalence::{
    compare, full_space_masses, full_space_state_grid, sweep, DivergenceDetail, DivergentCase,
    EquivalenceReport, StepRecord, SweepSummary, Verdict, STREAM_OP_BUDGET, SWEEP_OP_BUDGET,
};
pub use error::{Error, Result};
pub use hypercube::{
    verify_product_form, ClassMarginals, HypercubeWeights, ProductFormCheck, MAX_CUBE_CELLS,
};
pub use network::{run_network, MeanFieldNetwork, NetworkState};
pub use pool::{
    best_expert, mistake_bound, MassSnapshot, MistakeBound, WeightedPool, MAX_EXACT_STEPS,
    MAX_POOL_MEMBERS, SEARCH_BUDGET,
};
pub use predictor::{FiniteStatePredictor, RunTrace, TraceStep};
pub use scalar::{argmax, max_abs_gap, normalize, scalar_pow, RatioSpec, Scalar};
pub use seqgen::{
    gated_composite, generate, iid_symbol_at, lookback_demo, DemoVariant, GeneratorSpec,
    LookbackDemo, WindowPredictor,
};
