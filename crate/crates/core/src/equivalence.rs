//! Side-by-side verification of the two implementations of the same
//! prediction rule: the weighted pool over every K-state machine (the
//! ground truth, evaluated by streaming over machine indices without
//! materializing the pool) and the K-node mean-field network (the reduced
//! form). Produces per-step mass vectors for both, locates the first
//! prediction disagreement if any, and can sweep every sequence of a given
//! length.

use crate::alphabet::{Alphabet, Symbol};
use crate::enumeration::{predictor_count, PredictorIndex, PredictorSpace};
use crate::error::{Error, Result};
use crate::network::{MeanFieldNetwork, NetworkState};
use crate::pool::MAX_EXACT_STEPS;
use crate::scalar::{argmax, normalize, RatioSpec, Scalar};
use rayon::prelude::*;
use serde_json::json;

/// Cap on machine-count × steps for one streaming evaluation.
pub const STREAM_OP_BUDGET: u128 = 1 << 28;
/// Cap on sequence-count × machine-count × steps for one sweep.
pub const SWEEP_OP_BUDGET: u128 = 1 << 28;

fn stream_guard(count: u128, steps: usize) -> Result<()> {
    let ops = count
        .checked_mul(steps as u128 + 1)
        .unwrap_or(u128::MAX);
    if ops > STREAM_OP_BUDGET {
        return Err(Error::StreamTooLarge {
            ops,
            budget: STREAM_OP_BUDGET,
        });
    }
    Ok(())
}

fn check_exact_cap<S: Scalar>(len: usize) -> Result<()> {
    if S::EXACT && len > MAX_EXACT_STEPS {
        return Err(Error::ExactSequenceTooLong {
            requested: len,
            max: MAX_EXACT_STEPS,
        });
    }
    Ok(())
}

/// Per-step weight kept by a machine that has predicted correctly `c`
/// times: the reward factor to the c-th power (global renormalization only
/// scales all weights alike, so it can be applied once at the end).
fn reward_powers<S: Scalar>(lambda: RatioSpec, up_to: usize) -> Vec<S> {
    let lambda_scalar: S = lambda.to_scalar();
    let mut powers = Vec::with_capacity(up_to + 1);
    let mut p = S::one();
    for _ in 0..=up_to {
        powers.push(p.clone());
        p = p.mul(&lambda_scalar);
    }
    powers
}

/// Streaming tally: machines bucketed by (correct count, current
/// prediction) at each step. Integer counts only; weights enter when the
/// buckets are folded into masses.
type StepBuckets = Vec<Vec<Vec<u64>>>;

fn empty_buckets(steps: usize, alphabet: usize) -> StepBuckets {
    (0..=steps).map(|t| vec![vec![0u64; alphabet]; t + 1]).collect()
}

fn merge_buckets(mut a: StepBuckets, b: StepBuckets) -> StepBuckets {
    for (ta, tb) in a.iter_mut().zip(b) {
        for (ca, cb) in ta.iter_mut().zip(tb) {
            for (xa, xb) in ca.iter_mut().zip(cb) {
                *xa += xb;
            }
        }
    }
    a
}

/// The aggregate's per-symbol weight masses at every step 0..=len over the
/// full K-state space, computed exactly by a single streaming pass: no
/// pool is materialized, so this scales to spaces far past the in-memory
/// pool cap. Entry t is the normalized mass vector after t observations.
pub fn full_space_masses<S: Scalar>(
    k: usize,
    alphabet: Alphabet,
    lambda: RatioSpec,
    sequence: &[Symbol],
) -> Result<Vec<Vec<S>>> {
    if !lambda.at_least_one() {
        return Err(Error::LambdaOutOfRange(lambda.to_string()));
    }
    alphabet.check_all(sequence)?;
    check_exact_cap::<S>(sequence.len())?;
    let count = predictor_count(k, alphabet)?;
    stream_guard(count, sequence.len())?;
    let space = PredictorSpace::new(k, alphabet)?;
    let steps = sequence.len();

    let buckets = (0..count as u64)
        .into_par_iter()
        .fold(
            || empty_buckets(steps, alphabet.size()),
            |mut buckets, raw| {
                let mut machine = space
                    .decode(PredictorIndex(raw as u128))
                    .expect("index below the space count decodes");
                let mut correct = 0usize;
                for (t, bucket) in buckets.iter_mut().enumerate() {
                    let predicted = machine.predict();
                    bucket[correct][predicted] += 1;
                    if t < steps {
                        if predicted == sequence[t] {
                            correct += 1;
                        }
                        machine
                            .step(sequence[t])
                            .expect("sequence already validated");
                    }
                }
                buckets
            },
        )
        .reduce(|| empty_buckets(steps, alphabet.size()), merge_buckets);

    let powers = reward_powers::<S>(lambda, steps);
    buckets
        .iter()
        .map(|per_c| {
            let mut masses = vec![S::zero(); alphabet.size()];
            for (c, per_symbol) in per_c.iter().enumerate() {
                for (symbol, &n) in per_symbol.iter().enumerate() {
                    if n > 0 {
                        let term = powers[c].mul(&S::from_ratio(n, 1));
                        masses[symbol] = masses[symbol].add(&term);
                    }
                }
            }
            normalize(&masses)
        })
        .collect()
}

/// Joint weight mass by (active state, current prediction) over the full
/// space after observing `prefix` — the reduced view used in divergence
/// diagnostics. Cells sum to one.
pub fn full_space_state_grid<S: Scalar>(
    k: usize,
    alphabet: Alphabet,
    lambda: RatioSpec,
    prefix: &[Symbol],
) -> Result<Vec<Vec<S>>> {
    if !lambda.at_least_one() {
        return Err(Error::LambdaOutOfRange(lambda.to_string()));
    }
    alphabet.check_all(prefix)?;
    check_exact_cap::<S>(prefix.len())?;
    let count = predictor_count(k, alphabet)?;
    stream_guard(count, prefix.len())?;
    let space = PredictorSpace::new(k, alphabet)?;
    let steps = prefix.len();

    // grid[state][symbol][c]
    let empty = || vec![vec![vec![0u64; steps + 1]; alphabet.size()]; k];
    let counts = (0..count as u64)
        .into_par_iter()
        .fold(empty, |mut grid, raw| {
            let mut machine = space
                .decode(PredictorIndex(raw as u128))
                .expect("index below the space count decodes");
            let mut correct = 0usize;
            for &symbol in prefix {
                if machine.predict() == symbol {
                    correct += 1;
                }
                machine.step(symbol).expect("prefix already validated");
            }
            grid[machine.active_state()][machine.predict()][correct] += 1;
            grid
        })
        .reduce(empty, |mut a, b| {
            for (sa, sb) in a.iter_mut().zip(b) {
                for (ya, yb) in sa.iter_mut().zip(sb) {
                    for (xa, xb) in ya.iter_mut().zip(yb) {
                        *xa += xb;
                    }
                }
            }
            a
        });

    let powers = reward_powers::<S>(lambda, steps);
    let cell = |per_c: &[u64]| {
        let mut mass = S::zero();
        for (c, &n) in per_c.iter().enumerate() {
            if n > 0 {
                mass = mass.add(&powers[c].mul(&S::from_ratio(n, 1)));
            }
        }
        mass
    };
    let grid: Vec<Vec<S>> = counts
        .iter()
        .map(|per_symbol| per_symbol.iter().map(|per_c| cell(per_c)).collect())
        .collect();
    let total = Scalar::sum(grid.iter().flatten());
    if total.is_zero() {
        return Err(Error::ZeroTotal);
    }
    Ok(grid
        .into_iter()
        .map(|row| row.into_iter().map(|m| m.div(&total)).collect())
        .collect())
}

fn max_componentwise_gap<S: Scalar>(a: &[S], b: &[S]) -> S {
    let mut gap = S::zero();
    for (x, y) in a.iter().zip(b) {
        let d = if x > y { x.sub(y) } else { y.sub(x) };
        if d > gap {
            gap = d;
        }
    }
    gap
}

/// One time step of a comparison: both sides' normalized mass vectors and
/// predictions. `t = 0` is the pre-observation state (`input` is `None`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepRecord {
    pub t: usize,
    pub input: Option<Symbol>,
    pub oracle: Vec<String>,
    pub network: Vec<String>,
    pub oracle_pred: Symbol,
    pub net_pred: Symbol,
    pub agree: bool,
}

impl StepRecord {
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "t": self.t,
            "in": self.input.map_or(0, |s| s + 1),
            "oracle": self.oracle,
            "network": self.network,
            "oracle_pred": self.oracle_pred + 1,
            "net_pred": self.net_pred + 1,
            "agree": self.agree,
        })
    }
}

/// Where the two sides' predictions first part ways, with both systems'
/// internal views at that step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DivergenceDetail {
    pub t: usize,
    /// Full-space weight mass by (active state, prediction), cells sum to 1.
    pub pool_state_prediction: Vec<Vec<String>>,
    pub network_active: Vec<String>,
    pub network_rows: Vec<Vec<String>>,
}

impl DivergenceDetail {
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "t": self.t,
            "pool_state_prediction": self.pool_state_prediction,
            "network_active": self.network_active,
            "network_rows": self.network_rows,
        })
    }
}

/// Outcome of a comparison over one sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    /// Every step's mass vectors were identical (exact arithmetic only).
    ExactMatch,
    /// Mass vectors differed somewhere, but the predictions never did.
    ArgmaxMatch,
    /// The predictions themselves disagreed at some step.
    Diverged,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::ExactMatch => "exact-match",
            Verdict::ArgmaxMatch => "argmax-match",
            Verdict::Diverged => "diverged",
        }
    }
}

/// Full record of one side-by-side run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquivalenceReport {
    pub k: usize,
    pub alphabet: usize,
    pub lambda: RatioSpec,
    pub sequence: Vec<Symbol>,
    pub steps: Vec<StepRecord>,
    /// First step whose predictions disagreed, if any.
    pub first_divergence: Option<usize>,
    /// Largest componentwise gap between the two normalized mass vectors
    /// over all steps, in the scalar's display form.
    pub max_normalized_gap: String,
    pub verdict: Verdict,
    pub divergence_detail: Option<DivergenceDetail>,
}

impl EquivalenceReport {
    /// External JSON form: symbols one-based, keys sorted by the emitter.
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "k": self.k,
            "alphabet": self.alphabet,
            "lambda": self.lambda.to_string(),
            "sequence": self.sequence.iter().map(|&s| s + 1).collect::<Vec<_>>(),
            "steps": self.steps.iter().map(StepRecord::to_json).collect::<Vec<_>>(),
            "first_divergence": self.first_divergence,
            "max_normalized_gap": self.max_normalized_gap,
            "verdict": self.verdict.as_str(),
            "divergence_detail": self.divergence_detail.as_ref().map(DivergenceDetail::to_json),
        })
    }
}

/// Runs the full-space aggregate and the K-node network side by side over
/// one sequence, recording both mass vectors at every step (t = 0 before
/// any observation through t = len after the last). Predictions are
/// compared per step; the first disagreement, if any, is located and both
/// systems' internals at that step are attached.
pub fn compare<S: Scalar>(
    k: usize,
    alphabet: Alphabet,
    lambda: RatioSpec,
    sequence: &[Symbol],
) -> Result<EquivalenceReport> {
    let mut network = MeanFieldNetwork::<S>::init_uniform(k, alphabet, lambda)?;
    let oracle = full_space_masses::<S>(k, alphabet, lambda, sequence)?;

    let mut steps = Vec::with_capacity(sequence.len() + 1);
    let mut first_divergence = None;
    let mut network_at_divergence: Option<NetworkState> = None;
    let mut max_gap = S::zero();
    let mut all_equal = true;
    for (t, oracle_masses) in oracle.iter().enumerate() {
        let net_masses = normalize(&network.predict_scores())?;
        let oracle_pred = argmax(oracle_masses);
        let net_pred = argmax(&net_masses);
        let agree = oracle_pred == net_pred;
        if *oracle_masses != net_masses {
            all_equal = false;
        }
        let gap = max_componentwise_gap(oracle_masses, &net_masses);
        if gap > max_gap {
            max_gap = gap;
        }
        if !agree && first_divergence.is_none() {
            first_divergence = Some(t);
            network_at_divergence = Some(network.dump());
        }
        steps.push(StepRecord {
            t,
            input: t.checked_sub(1).map(|i| sequence[i]),
            oracle: oracle_masses.iter().map(Scalar::display).collect(),
            network: net_masses.iter().map(Scalar::display).collect(),
            oracle_pred,
            net_pred,
            agree,
        });
        if t < sequence.len() {
            network.observe(sequence[t])?;
        }
    }

    let verdict = if first_divergence.is_some() {
        Verdict::Diverged
    } else if S::EXACT && all_equal {
        Verdict::ExactMatch
    } else {
        Verdict::ArgmaxMatch
    };
    let divergence_detail = match (&first_divergence, network_at_divergence) {
        (Some(t), Some(net)) => {
            let grid = full_space_state_grid::<S>(k, alphabet, lambda, &sequence[..*t])?;
            Some(DivergenceDetail {
                t: *t,
                pool_state_prediction: grid
                    .iter()
                    .map(|row| row.iter().map(Scalar::display).collect())
                    .collect(),
                network_active: net.w_active,
                network_rows: net.w_trans,
            })
        }
        _ => None,
    };

    Ok(EquivalenceReport {
        k,
        alphabet: alphabet.size(),
        lambda,
        sequence: sequence.to_vec(),
        steps,
        first_divergence,
        max_normalized_gap: max_gap.display(),
        verdict,
        divergence_detail,
    })
}

/// The `index`-th sequence of the given length in lexicographic symbol
/// order (all-a1 first).
pub(crate) fn nth_sequence(index: u64, alphabet: Alphabet, length: usize) -> Vec<Symbol> {
    let a = alphabet.size() as u64;
    let mut digits = vec![0usize; length];
    let mut rest = index;
    for slot in digits.iter_mut().rev() {
        *slot = (rest % a) as usize;
        rest /= a;
    }
    digits
}

/// One sequence of a sweep whose predictions disagreed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DivergentCase {
    pub sequence: Vec<Symbol>,
    pub first_divergence: usize,
}

/// Aggregate outcome of comparing every sequence of a fixed length.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepSummary {
    pub k: usize,
    pub alphabet: usize,
    pub lambda: RatioSpec,
    pub max_length: usize,
    pub sequences: u64,
    pub total_steps: u64,
    pub exact_match: u64,
    pub argmax_match: u64,
    pub diverged: u64,
    pub divergent: Vec<DivergentCase>,
}

impl SweepSummary {
    pub fn agreements(&self) -> u64 {
        self.exact_match + self.argmax_match
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "k": self.k,
            "alphabet": self.alphabet,
            "lambda": self.lambda.to_string(),
            "max_length": self.max_length,
            "sequences": self.sequences,
            "total_steps": self.total_steps,
            "agreements": self.agreements(),
            "disagreements": self.diverged,
            "verdicts": {
                "exact_match": self.exact_match,
                "argmax_match": self.argmax_match,
                "diverged": self.diverged,
            },
            "divergent_sequences": self
                .divergent
                .iter()
                .map(|d| {
                    json!({
                        "sequence": d.sequence.iter().map(|&s| s + 1).collect::<Vec<_>>(),
                        "first_divergence": d.first_divergence,
                    })
                })
                .collect::<Vec<_>>(),
        })
    }
}

/// Compares every sequence of length `max_length` in lexicographic order
/// and tallies the verdicts. Deterministic: the same inputs produce a
/// byte-identical summary.
pub fn sweep<S: Scalar>(
    k: usize,
    alphabet: Alphabet,
    lambda: RatioSpec,
    max_length: usize,
) -> Result<SweepSummary> {
    let count = predictor_count(k, alphabet)?;
    let mut sequences: u128 = 1;
    for _ in 0..max_length {
        sequences = sequences
            .checked_mul(alphabet.size() as u128)
            .unwrap_or(u128::MAX);
    }
    let ops = sequences
        .checked_mul(count)
        .and_then(|x| x.checked_mul(max_length as u128 + 1))
        .unwrap_or(u128::MAX);
    if ops > SWEEP_OP_BUDGET {
        return Err(Error::SweepBudgetExceeded {
            ops,
            budget: SWEEP_OP_BUDGET,
        });
    }

    let outcomes: Vec<(Verdict, Option<usize>, Vec<Symbol>)> = (0..sequences as u64)
        .into_par_iter()
        .map(|i| {
            let sequence = nth_sequence(i, alphabet, max_length);
            let report = compare::<S>(k, alphabet, lambda, &sequence)?;
            Ok((report.verdict, report.first_divergence, sequence))
        })
        .collect::<Result<_>>()?;

    let mut summary = SweepSummary {
        k,
        alphabet: alphabet.size(),
        lambda,
        max_length,
        sequences: sequences as u64,
        total_steps: sequences as u64 * (max_length as u64 + 1),
        exact_match: 0,
        argmax_match: 0,
        diverged: 0,
        divergent: Vec::new(),
    };
    for (verdict, first_divergence, sequence) in outcomes {
        match verdict {
            Verdict::ExactMatch => summary.exact_match += 1,
            Verdict::ArgmaxMatch => summary.argmax_match += 1,
            Verdict::Diverged => {
                summary.diverged += 1;
                summary.divergent.push(DivergentCase {
                    sequence,
                    first_divergence: first_divergence
                        .expect("a diverged verdict always carries a step"),
                });
            }
        }
    }
    Ok(summary)
}
