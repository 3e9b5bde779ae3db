//! Canonical enumeration of every K-state predictor over an alphabet.
//!
//! The whole space has `K^(|A|·K) · |A|^K · K` machines: one factor per
//! transition table, prediction vector, and initial state. Each machine gets
//! a unique index via a mixed-radix code:
//!
//! ```text
//! index = ((m · |A|^K) + q) · K + s0
//! ```
//!
//! where `m` encodes the transition table in base K (entry (symbol i,
//! state j) at digit position i·K + j, least significant first), `q` encodes
//! the prediction vector in base |A| (state 0 least significant), and `s0` is
//! the initial state. The layout makes the two structural symmetries of the
//! space — same table with a different prediction vector, and same machine
//! with one transition entry changed — contiguous strides, which the tests
//! exploit and which lets parallel searches partition index ranges evenly.

use crate::alphabet::Alphabet;
use crate::error::{Error, Result};
use crate::predictor::FiniteStatePredictor;
use serde::{Deserialize, Serialize};

/// Index of one predictor within the canonical enumeration of its space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PredictorIndex(pub u128);

impl std::fmt::Display for PredictorIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Number of distinct K-state predictors over the alphabet:
/// `K^(|A|·K) · |A|^K · K`. Overflow beyond u128 is reported, not wrapped.
pub fn predictor_count(k: usize, alphabet: Alphabet) -> Result<u128> {
    if k == 0 {
        return Err(Error::NoStates);
    }
    let a = alphabet.size() as u128;
    let kk = k as u128;
    let overflow = || Error::CountOverflow {
        k,
        alphabet: alphabet.size(),
    };
    let tables = checked_pow(kk, alphabet.size() * k).ok_or_else(overflow)?;
    let predictions = checked_pow(a, k).ok_or_else(overflow)?;
    tables
        .checked_mul(predictions)
        .and_then(|n| n.checked_mul(kk))
        .ok_or_else(overflow)
}

fn checked_pow(base: u128, exp: usize) -> Option<u128> {
    let mut acc: u128 = 1;
    for _ in 0..exp {
        acc = acc.checked_mul(base)?;
    }
    Some(acc)
}

/// The canonical space of all K-state predictors over one alphabet, with
/// encode/decode between machines and indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PredictorSpace {
    k: usize,
    alphabet: Alphabet,
    count: u128,
    /// |A|^K, the radix block holding the prediction vector.
    prediction_block: u128,
}

impl PredictorSpace {
    pub fn new(k: usize, alphabet: Alphabet) -> Result<Self> {
        let count = predictor_count(k, alphabet)?;
        let prediction_block = checked_pow(alphabet.size() as u128, k)
            .expect("bounded by the count check above");
        Ok(PredictorSpace {
            k,
            alphabet,
            count,
            prediction_block,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn count(&self) -> u128 {
        self.count
    }

    /// Decodes an index into its machine. The machine starts in its initial
    /// state.
    pub fn decode(&self, index: PredictorIndex) -> Result<FiniteStatePredictor> {
        if index.0 >= self.count {
            return Err(Error::IndexOutOfRange {
                index: index.0,
                count: self.count,
            });
        }
        let k = self.k as u128;
        let a = self.alphabet.size() as u128;

        let initial_state = (index.0 % k) as usize;
        let rest = index.0 / k;
        let mut q = rest % self.prediction_block;
        let mut m = rest / self.prediction_block;

        let mut predictions = Vec::with_capacity(self.k);
        for _ in 0..self.k {
            predictions.push((q % a) as usize);
            q /= a;
        }
        let mut transitions = vec![vec![0usize; self.k]; self.alphabet.size()];
        for row in transitions.iter_mut() {
            for entry in row.iter_mut() {
                *entry = (m % k) as usize;
                m /= k;
            }
        }
        FiniteStatePredictor::new(self.alphabet, transitions, predictions, initial_state)
    }

    /// Encodes a machine into its canonical index (ignores the live active
    /// state; the code covers table, predictions, and initial state).
    pub fn encode(&self, p: &FiniteStatePredictor) -> Result<PredictorIndex> {
        if p.num_states() != self.k {
            return Err(Error::StateOutOfRange {
                state: p.num_states(),
                k: self.k,
            });
        }
        if p.alphabet() != self.alphabet {
            return Err(Error::AlphabetMismatch {
                left: p.alphabet().size(),
                right: self.alphabet.size(),
            });
        }
        let k = self.k as u128;
        let a = self.alphabet.size() as u128;
        let mut m: u128 = 0;
        for row in p.transitions().iter().rev() {
            for &entry in row.iter().rev() {
                m = m * k + entry as u128;
            }
        }
        let mut q: u128 = 0;
        for &pred in p.predictions().iter().rev() {
            q = q * a + pred as u128;
        }
        Ok(PredictorIndex(
            (m * self.prediction_block + q) * k + p.initial_state() as u128,
        ))
    }

    /// Iterates (index, machine) pairs over the whole space. Intended for
    /// spaces that fit an exhaustive pass; callers guard the size.
    pub fn iter(&self) -> impl Iterator<Item = (PredictorIndex, FiniteStatePredictor)> + '_ {
        (0..self.count).map(move |i| {
            let idx = PredictorIndex(i);
            (
                idx,
                self.decode(idx)
                    .expect("indices below count always decode"),
            )
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::HashSet;

    fn space(k: usize, a: usize) -> PredictorSpace {
        PredictorSpace::new(k, Alphabet::new(a).unwrap()).unwrap()
    }

    #[test]
    fn counts_match_closed_form() {
        assert_eq!(predictor_count(1, Alphabet::new(1).unwrap()).unwrap(), 1);
        assert_eq!(predictor_count(2, Alphabet::new(2).unwrap()).unwrap(), 128);
        assert_eq!(
            predictor_count(3, Alphabet::new(2).unwrap()).unwrap(),
            17_496
        );
        assert_eq!(
            predictor_count(3, Alphabet::new(3).unwrap()).unwrap(),
            1_594_323
        );
        assert_eq!(
            predictor_count(4, Alphabet::new(2).unwrap()).unwrap(),
            4_194_304
        );
    }

    #[test]
    fn count_overflow_is_reported() {
        // 64 states over 64 symbols is astronomically past u128.
        let err = predictor_count(64, Alphabet::new(64).unwrap()).unwrap_err();
        assert!(matches!(err, Error::CountOverflow { .. }));
    }

    #[test]
    fn index_zero_is_the_all_zero_machine() {
        let s = space(2, 2);
        let p = s.decode(PredictorIndex(0)).unwrap();
        assert!(p.transitions().iter().flatten().all(|&t| t == 0));
        assert!(p.predictions().iter().all(|&q| q == 0));
        assert_eq!(p.initial_state(), 0);
        assert_eq!(p.active_state(), 0);
    }

    #[test]
    fn last_index_is_the_all_max_machine() {
        let s = space(2, 2);
        let p = s.decode(PredictorIndex(s.count() - 1)).unwrap();
        assert!(p.transitions().iter().flatten().all(|&t| t == 1));
        assert!(p.predictions().iter().all(|&q| q == 1));
        assert_eq!(p.initial_state(), 1);
    }

    #[test]
    fn out_of_range_index_is_rejected() {
        let s = space(2, 2);
        assert!(matches!(
            s.decode(PredictorIndex(128)),
            Err(Error::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn full_bijection_at_two_states_two_symbols() {
        let s = space(2, 2);
        let mut seen = HashSet::new();
        for (idx, machine) in s.iter() {
            assert_eq!(s.encode(&machine).unwrap(), idx);
            assert!(seen.insert(machine.clone()), "duplicate machine at {idx}");
        }
        assert_eq!(seen.len(), 128);
    }

    #[test]
    fn prediction_vector_siblings_are_contiguous() {
        // Machines sharing a transition table and initial state but differing
        // in prediction vector sit |A|^K·K apart in blocks of stride K.
        let s = space(2, 2);
        for (idx, machine) in s.iter() {
            let mut vectors = HashSet::new();
            for q in 0..4u128 {
                let base = idx.0 / (4 * 2) * (4 * 2) + idx.0 % 2;
                let sibling = s.decode(PredictorIndex(base + q * 2)).unwrap();
                assert_eq!(sibling.transitions(), machine.transitions());
                assert_eq!(sibling.initial_state(), machine.initial_state());
                vectors.insert(sibling.predictions().to_vec());
            }
            assert_eq!(vectors.len(), 4, "all prediction vectors present");
        }
    }

    #[test]
    fn single_transition_entry_siblings_exist() {
        // For every machine and every table entry (i,j), the K-1 machines
        // identical except that entry live at strides of K^(iK+j)·|A|^K·K.
        let s = space(2, 2);
        for (idx, machine) in s.iter() {
            for i in 0..2usize {
                for j in 0..2usize {
                    let digit_pos = (i * 2 + j) as u32;
                    let stride = 2u128.pow(digit_pos) * 4 * 2;
                    let current = machine.transitions()[i][j] as u128;
                    for other in 0..2u128 {
                        let sibling_idx =
                            PredictorIndex((idx.0 as i128 + (other as i128 - current as i128) * stride as i128) as u128);
                        let sibling = s.decode(sibling_idx).unwrap();
                        assert_eq!(sibling.predictions(), machine.predictions());
                        assert_eq!(sibling.initial_state(), machine.initial_state());
                        assert_eq!(sibling.transitions()[i][j], other as usize);
                        for (ri, row) in sibling.transitions().iter().enumerate() {
                            for (rj, &entry) in row.iter().enumerate() {
                                if (ri, rj) != (i, j) {
                                    assert_eq!(entry, machine.transitions()[ri][rj]);
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    proptest! {
        #[test]
        fn sampled_round_trip_three_states(raw in 0u128..17_496) {
            let s = space(3, 2);
            let machine = s.decode(PredictorIndex(raw)).unwrap();
            prop_assert_eq!(s.encode(&machine).unwrap(), PredictorIndex(raw));
        }

        #[test]
        fn sampled_round_trip_three_symbols(raw in 0u128..1_594_323) {
            let s = space(3, 3);
            let machine = s.decode(PredictorIndex(raw)).unwrap();
            prop_assert_eq!(s.encode(&machine).unwrap(), PredictorIndex(raw));
        }
    }
}
