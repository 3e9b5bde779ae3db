//! Complexity profiles of periodic sequences: the long-run error rate of a
//! single machine on a repeating pattern, the best rate achievable with K
//! states (exhaustive search over the whole K-state space, or an explicit
//! lossless construction once K reaches the period), and the resulting
//! rate-versus-K curve in CSV form.

use crate::alphabet::{Alphabet, Symbol};
use crate::enumeration::{predictor_count, PredictorIndex, PredictorSpace};
use crate::error::{Error, Result};
use crate::pool::SEARCH_BUDGET;
use crate::predictor::FiniteStatePredictor;
use num_rational::Ratio;
use rayon::prelude::*;

/// Long-run behaviour of one machine on one repeating pattern.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AsymptoticError {
    /// Exact errors-per-symbol once the joint (state, phase) orbit cycles.
    pub rate: Ratio<u64>,
    /// Errors made before the orbit first enters its cycle.
    pub transient_loss: u64,
    /// Length of the (state, phase) cycle, a multiple of the period's
    /// contribution to the orbit.
    pub cycle_length: u64,
}

/// Runs `machine` on the infinite repetition of `pattern` until the joint
/// (active state, pattern phase) pair repeats, then reads the exact
/// asymptotic error rate off the cycle. Terminates within K·n steps.
pub fn asymptotic_error(
    machine: &FiniteStatePredictor,
    pattern: &[Symbol],
) -> Result<AsymptoticError> {
    if pattern.is_empty() {
        return Err(Error::EmptyPattern);
    }
    machine.alphabet().check_all(pattern)?;

    let n = pattern.len();
    let k = machine.num_states();
    // First-visit bookkeeping per (state, phase): step and errors so far.
    let mut first_visit: Vec<Option<(u64, u64)>> = vec![None; k * n];
    let mut m = machine.clone();
    m.reset();
    let mut errors: u64 = 0;
    let mut step: u64 = 0;
    loop {
        let phase = (step % n as u64) as usize;
        let key = m.active_state() * n + phase;
        if let Some((first_step, first_errors)) = first_visit[key] {
            let cycle_length = step - first_step;
            let cycle_errors = errors - first_errors;
            return Ok(AsymptoticError {
                rate: Ratio::new(cycle_errors, cycle_length),
                transient_loss: first_errors,
                cycle_length,
            });
        }
        first_visit[key] = Some((step, errors));
        let observed = pattern[phase];
        if m.predict() != observed {
            errors += 1;
        }
        m.step(observed)?;
        step += 1;
    }
}

/// One point of a complexity curve: the best K-state machine found for a
/// pattern of the given period.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComplexityPoint {
    pub period_n: usize,
    pub k: usize,
    pub rate: Ratio<u64>,
    pub witness: PredictorIndex,
    pub transient_loss: u64,
}

/// Exhaustively searches all K-state machines for the lowest asymptotic
/// error rate on `pattern` (ties broken toward the lowest index). Refuses
/// spaces larger than [`SEARCH_BUDGET`].
pub fn best_k_state(
    k: usize,
    alphabet: Alphabet,
    pattern: &[Symbol],
) -> Result<ComplexityPoint> {
    if pattern.is_empty() {
        return Err(Error::EmptyPattern);
    }
    alphabet.check_all(pattern)?;
    let count = predictor_count(k, alphabet)?;
    if count > SEARCH_BUDGET {
        return Err(Error::SearchBudgetExceeded {
            count,
            budget: SEARCH_BUDGET,
        });
    }
    let space = PredictorSpace::new(k, alphabet)?;
    let best = (0..count as u64)
        .into_par_iter()
        .map(|raw| {
            let index = PredictorIndex(raw as u128);
            let machine = space
                .decode(index)
                .expect("index below the space count decodes");
            let outcome = asymptotic_error(&machine, pattern)
                .expect("pattern already validated against the alphabet");
            (outcome.rate, raw, outcome.transient_loss)
        })
        .min_by_key(|&(rate, raw, _)| (rate, raw))
        .expect("space is never empty");
    Ok(ComplexityPoint {
        period_n: pattern.len(),
        k,
        rate: best.0,
        witness: PredictorIndex(best.1 as u128),
        transient_loss: best.2,
    })
}

/// Builds a lossless K-state machine for `pattern` when K is at least the
/// period: state i remembers "the last symbol completed phase i", predicts
/// the next phase's symbol, advances on a match, and re-synchronizes to the
/// earliest matching phase otherwise. States beyond the period are
/// unreachable padding.
pub fn cyclic_witness(
    k: usize,
    alphabet: Alphabet,
    pattern: &[Symbol],
) -> Result<FiniteStatePredictor> {
    if pattern.is_empty() {
        return Err(Error::EmptyPattern);
    }
    alphabet.check_all(pattern)?;
    let n = pattern.len();
    if k < n {
        return Err(Error::InvalidSpec(format!(
            "a lossless cyclic machine needs at least {n} states, got {k}"
        )));
    }
    let mut transitions = vec![vec![0usize; k]; alphabet.size()];
    let mut predictions = vec![0usize; k];
    for state in 0..k {
        if state < n {
            predictions[state] = pattern[(state + 1) % n];
            for symbol in alphabet.symbols() {
                transitions[symbol][state] = if symbol == pattern[(state + 1) % n] {
                    (state + 1) % n
                } else if let Some(j) = pattern.iter().position(|&p| p == symbol) {
                    j
                } else {
                    state
                };
            }
        } else {
            predictions[state] = pattern[0];
            for symbol in alphabet.symbols() {
                transitions[symbol][state] = state;
            }
        }
    }
    FiniteStatePredictor::new(alphabet, transitions, predictions, n - 1)
}

/// Best-rate-per-K curve for one pattern.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComplexityCurve {
    pub pattern: Vec<Symbol>,
    pub alphabet: Alphabet,
    pub points: Vec<ComplexityPoint>,
}

/// Computes the curve for K = 1..=k_max. Each K is searched exhaustively
/// when the space fits the budget; beyond the budget, a K of at least the
/// period falls back to the explicit lossless construction (verified, and
/// reported under its own index). The finished curve is checked to be
/// non-increasing in K.
pub fn profile(pattern: &[Symbol], alphabet: Alphabet, k_max: usize) -> Result<ComplexityCurve> {
    if pattern.is_empty() {
        return Err(Error::EmptyPattern);
    }
    if k_max == 0 {
        return Err(Error::NoStates);
    }
    alphabet.check_all(pattern)?;
    let n = pattern.len();
    let mut points = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        let count = predictor_count(k, alphabet)?;
        let point = if count <= SEARCH_BUDGET {
            best_k_state(k, alphabet, pattern)?
        } else if k >= n {
            let witness = cyclic_witness(k, alphabet, pattern)?;
            let outcome = asymptotic_error(&witness, pattern)?;
            let space = PredictorSpace::new(k, alphabet)?;
            ComplexityPoint {
                period_n: n,
                k,
                rate: outcome.rate,
                witness: space.encode(&witness)?,
                transient_loss: outcome.transient_loss,
            }
        } else {
            return Err(Error::SearchBudgetExceeded {
                count,
                budget: SEARCH_BUDGET,
            });
        };
        if let Some(prev) = points.last() {
            let prev: &ComplexityPoint = prev;
            if point.rate > prev.rate {
                return Err(Error::NonMonotoneCurve {
                    k_prev: prev.k,
                    prev: prev.rate.to_string(),
                    k_next: point.k,
                    next: point.rate.to_string(),
                });
            }
        }
        points.push(point);
    }
    Ok(ComplexityCurve {
        pattern: pattern.to_vec(),
        alphabet,
        points,
    })
}

impl ComplexityCurve {
    /// Renders the curve as CSV with one row per K.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "period_n,K,rate_num,rate_den,rate_float,witness_index,transient_loss\n",
        );
        for p in &self.points {
            let rate_float = *p.rate.numer() as f64 / *p.rate.denom() as f64;
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                p.period_n,
                p.k,
                p.rate.numer(),
                p.rate.denom(),
                rate_float,
                p.witness,
                p.transient_loss
            ));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn alphabet(n: usize) -> Alphabet {
        Alphabet::new(n).unwrap()
    }

    #[test]
    fn lossless_machine_has_zero_rate() {
        let a = alphabet(3);
        let witness = cyclic_witness(3, a, &[0, 1, 2]).unwrap();
        let outcome = asymptotic_error(&witness, &[0, 1, 2]).unwrap();
        assert_eq!(outcome.rate, Ratio::new(0, 1));
        assert_eq!(outcome.transient_loss, 0);
    }

    #[test]
    fn constant_machine_errs_once_per_period() {
        let a = alphabet(2);
        let constant = FiniteStatePredictor::constant(a, 0).unwrap();
        let outcome = asymptotic_error(&constant, &[0, 0, 1]).unwrap();
        assert_eq!(outcome.rate, Ratio::new(1, 3));
        assert_eq!(outcome.transient_loss, 0);
        assert_eq!(outcome.cycle_length, 3);
    }

    #[test]
    fn transient_is_separated_from_the_cycle() {
        // Two states: the first mispredicts and always hands off to the
        // second, which self-loops and predicts a1 forever. On the constant
        // pattern a1 the single error is transient; the cycle is clean.
        let a = alphabet(2);
        let machine = FiniteStatePredictor::new(
            a,
            vec![vec![1, 1], vec![1, 1]],
            vec![1, 0],
            0,
        )
        .unwrap();
        let outcome = asymptotic_error(&machine, &[0]).unwrap();
        assert_eq!(outcome.rate, Ratio::new(0, 1));
        assert_eq!(outcome.transient_loss, 1);
    }

    #[test]
    fn asymptotic_error_validates_inputs() {
        let a = alphabet(2);
        let constant = FiniteStatePredictor::constant(a, 0).unwrap();
        assert!(matches!(
            asymptotic_error(&constant, &[]),
            Err(Error::EmptyPattern)
        ));
        assert!(asymptotic_error(&constant, &[0, 2]).is_err());
    }

    #[test]
    fn single_state_best_matches_majority_frequency() {
        // One state can only predict a constant; the best constant misses
        // every minority symbol.
        let best = best_k_state(1, alphabet(2), &[0, 0, 1]).unwrap();
        assert_eq!(best.rate, Ratio::new(1, 3));
        assert_eq!(best.witness, PredictorIndex(0));
    }

    #[test]
    fn two_states_cannot_track_period_three() {
        // Tracking phase mod 3 needs the two a1-phases distinguished, which
        // two states driven by the pattern itself cannot do: the best
        // two-state machine still errs once per period.
        let best = best_k_state(2, alphabet(2), &[0, 0, 1]).unwrap();
        assert_eq!(best.rate, Ratio::new(1, 3));
        let space = PredictorSpace::new(2, alphabet(2)).unwrap();
        let machine = space.decode(best.witness).unwrap();
        let outcome = asymptotic_error(&machine, &[0, 0, 1]).unwrap();
        assert_eq!(outcome.rate, best.rate);
        assert_eq!(outcome.transient_loss, best.transient_loss);
    }

    #[test]
    fn enough_states_reach_zero() {
        let best = best_k_state(2, alphabet(2), &[0, 1]).unwrap();
        assert_eq!(best.rate, Ratio::new(0, 1));
        let best = best_k_state(3, alphabet(2), &[0, 0, 1]).unwrap();
        assert_eq!(best.rate, Ratio::new(0, 1));
    }

    #[test]
    fn search_refuses_oversized_spaces() {
        // 5 states over a binary alphabet enumerate past the search budget.
        assert!(matches!(
            best_k_state(5, alphabet(2), &[0, 1]),
            Err(Error::SearchBudgetExceeded { .. })
        ));
    }

    #[test]
    fn witness_construction_requires_enough_states() {
        assert!(cyclic_witness(2, alphabet(2), &[0, 0, 1]).is_err());
    }

    #[test]
    fn witness_padding_states_are_harmless() {
        let a = alphabet(2);
        for k in 3..=6 {
            let witness = cyclic_witness(k, a, &[0, 0, 1]).unwrap();
            let outcome = asymptotic_error(&witness, &[0, 0, 1]).unwrap();
            assert_eq!(outcome.rate, Ratio::new(0, 1), "k = {k}");
            assert_eq!(outcome.transient_loss, 0, "k = {k}");
        }
    }

    #[test]
    fn witness_resynchronizes_after_noise() {
        // Drop the machine into the pattern mid-way with a foreign prefix;
        // the re-synchronization transitions keep the long-run rate at zero.
        let a = alphabet(3);
        let witness = cyclic_witness(4, a, &[0, 1, 0, 2]).unwrap();
        let mut m = witness.clone();
        for &s in &[2, 2, 1, 0] {
            m.step(s).unwrap();
        }
        // From whatever state noise left it in, a fresh run over the pattern
        // must lock on: only finitely many transient errors.
        let outcome = asymptotic_error(&witness, &[0, 1, 0, 2]).unwrap();
        assert_eq!(outcome.rate, Ratio::new(0, 1));
    }

    #[test]
    fn curve_is_monotone_and_hits_zero_at_the_period() {
        let curve = profile(&[0, 0, 1], alphabet(2), 3).unwrap();
        let rates: Vec<_> = curve.points.iter().map(|p| p.rate).collect();
        assert_eq!(
            rates,
            vec![Ratio::new(1, 3), Ratio::new(1, 3), Ratio::new(0, 1)]
        );
        for pair in curve.points.windows(2) {
            assert!(pair[1].rate <= pair[0].rate);
        }
        for p in &curve.points {
            assert_eq!(p.period_n, 3);
        }
    }

    #[test]
    fn curve_uses_the_witness_when_the_space_is_too_big() {
        // K = 5 over a binary alphabet is past the search budget, but the
        // period-5 pattern admits the explicit construction.
        let curve = profile(&[0, 0, 1, 0, 1], alphabet(2), 5).unwrap();
        let last = curve.points.last().unwrap();
        assert_eq!(last.k, 5);
        assert_eq!(last.rate, Ratio::new(0, 1));
        // The reported witness index decodes back to a lossless machine.
        let space = PredictorSpace::new(5, alphabet(2)).unwrap();
        let machine = space.decode(last.witness).unwrap();
        let outcome = asymptotic_error(&machine, &[0, 0, 1, 0, 1]).unwrap();
        assert_eq!(outcome.rate, Ratio::new(0, 1));
    }

    #[test]
    fn oversized_space_below_the_period_is_an_error() {
        // K = 5, binary alphabet, period 6: too big to search, too small for
        // the lossless construction.
        assert!(matches!(
            profile(&[0, 0, 0, 0, 0, 1], alphabet(2), 5),
            Err(Error::SearchBudgetExceeded { .. })
        ));
    }

    #[test]
    fn csv_layout_is_stable() {
        let curve = ComplexityCurve {
            pattern: vec![0, 0, 1],
            alphabet: alphabet(2),
            points: vec![
                ComplexityPoint {
                    period_n: 3,
                    k: 1,
                    rate: Ratio::new(1, 3),
                    witness: PredictorIndex(0),
                    transient_loss: 0,
                },
                ComplexityPoint {
                    period_n: 3,
                    k: 3,
                    rate: Ratio::new(0, 1),
                    witness: PredictorIndex(42),
                    transient_loss: 0,
                },
            ],
        };
        let expected = "period_n,K,rate_num,rate_den,rate_float,witness_index,transient_loss\n\
                        3,1,1,3,0.3333333333333333,0,0\n\
                        3,3,0,1,0,42,0\n";
        assert_eq!(curve.to_csv(), expected);
    }
}
