//! One prediction class — all predictors sharing a transition table and
//! active state, differing only in their per-state prediction vectors — in
//! two representations:
//!
//! * [`HypercubeWeights`]: one weight per prediction vector, a dense array of
//!   |A|^K cells (cell index = base-|A| encoding of the vector, state 0 least
//!   significant).
//! * [`ClassMarginals`]: the K×|A| matrix of per-state prediction fractions
//!   plus the class's total weight and active state — |A|·K quantities
//!   instead of |A|^K.
//!
//! Multiplicative reward updates touch whole axis-aligned planes of the
//! cube, so starting from the uniform cube the cells stay an exact outer
//! product of the row marginals; [`verify_product_form`] replays an update
//! script through both representations and checks they never drift apart.
//! All arithmetic here is exact rational — this module is verification
//! machinery, not a performance path.

use crate::alphabet::{Alphabet, StateId, Symbol};
use crate::error::{Error, Result};
use crate::predictor::FiniteStatePredictor;
use crate::scalar::RatioSpec;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

/// Largest cube this module will allocate (cells = |A|^K).
pub const MAX_CUBE_CELLS: u128 = 1 << 24;

fn frac(num: u64, den: u64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

fn sum(values: &[BigRational]) -> BigRational {
    values.iter().fold(BigRational::zero(), |acc, v| acc + v)
}

/// Dense per-prediction-vector weights of one class.
#[derive(Debug, Clone, PartialEq)]
pub struct HypercubeWeights {
    k: usize,
    alphabet: Alphabet,
    cells: Vec<BigRational>,
}

impl HypercubeWeights {
    /// Uniform weights summing to one.
    pub fn uniform(k: usize, alphabet: Alphabet) -> Result<Self> {
        let cells = Self::cell_count(k, alphabet)?;
        Ok(HypercubeWeights {
            k,
            alphabet,
            cells: vec![frac(1, cells as u64); cells],
        })
    }

    /// All weight on a single prediction vector.
    pub fn point_mass(k: usize, alphabet: Alphabet, vector: &[Symbol]) -> Result<Self> {
        let cells = Self::cell_count(k, alphabet)?;
        if vector.len() != k {
            return Err(Error::InvalidSpec(format!(
                "prediction vector of length {} for {k} states",
                vector.len()
            )));
        }
        alphabet.check_all(vector)?;
        let mut index = 0usize;
        for &p in vector.iter().rev() {
            index = index * alphabet.size() + p;
        }
        let mut cube = vec![BigRational::zero(); cells];
        cube[index] = BigRational::one();
        Ok(HypercubeWeights {
            k,
            alphabet,
            cells: cube,
        })
    }

    fn cell_count(k: usize, alphabet: Alphabet) -> Result<usize> {
        if k == 0 {
            return Err(Error::NoStates);
        }
        let mut cells: u128 = 1;
        for _ in 0..k {
            cells = cells.saturating_mul(alphabet.size() as u128);
            if cells > MAX_CUBE_CELLS {
                return Err(Error::CubeTooLarge {
                    cells,
                    max: MAX_CUBE_CELLS,
                });
            }
        }
        Ok(cells as usize)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn cells(&self) -> &[BigRational] {
        &self.cells
    }

    pub fn total(&self) -> BigRational {
        sum(&self.cells)
    }

    /// The symbol at coordinate `state` of the cell's prediction vector.
    fn digit(&self, cell: usize, state: StateId) -> Symbol {
        (cell / self.alphabet.size().pow(state as u32)) % self.alphabet.size()
    }

    /// Multiplies every cell whose vector predicts `symbol` at `state` by λ,
    /// then rescales all cells so the total weight is unchanged.
    pub fn update_plane(&self, state: StateId, symbol: Symbol, lambda: RatioSpec) -> Result<Self> {
        if state >= self.k {
            return Err(Error::StateOutOfRange { state, k: self.k });
        }
        self.alphabet.check(symbol)?;
        if !lambda.at_least_one() {
            return Err(Error::LambdaOutOfRange(lambda.to_string()));
        }
        let factor = frac(lambda.num, lambda.den);
        let before = self.total();
        if before.is_zero() {
            return Err(Error::ZeroTotal);
        }
        let mut cells = self.cells.clone();
        for (i, cell) in cells.iter_mut().enumerate() {
            if self.digit(i, state) == symbol {
                *cell = &*cell * &factor;
            }
        }
        let after = sum(&cells);
        let rescale = before / after;
        for cell in cells.iter_mut() {
            *cell = &*cell * &rescale;
        }
        Ok(HypercubeWeights {
            k: self.k,
            alphabet: self.alphabet,
            cells,
        })
    }

    /// Row `i`, column `j` = fraction of total weight predicting symbol `j`
    /// at state `i`.
    pub fn marginals(&self) -> Result<Vec<Vec<BigRational>>> {
        let total = self.total();
        if total.is_zero() {
            return Err(Error::ZeroTotal);
        }
        let mut rows = vec![vec![BigRational::zero(); self.alphabet.size()]; self.k];
        for (i, cell) in self.cells.iter().enumerate() {
            for (state, row) in rows.iter_mut().enumerate() {
                let j = (i / self.alphabet.size().pow(state as u32)) % self.alphabet.size();
                let bumped = &row[j] + cell;
                row[j] = bumped;
            }
        }
        for row in rows.iter_mut() {
            for entry in row.iter_mut() {
                *entry = &*entry / &total;
            }
        }
        Ok(rows)
    }
}

/// The reduced form of one class: row-normalized prediction fractions per
/// state, the class's total weight, and where that weight currently sits.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassMarginals {
    /// K×|A|; row i sums to one.
    pub w_trans: Vec<Vec<BigRational>>,
    /// Length K; exactly one nonzero entry (the active state) equal to
    /// `total`.
    pub w_state: Vec<BigRational>,
    pub total: BigRational,
}

impl ClassMarginals {
    /// Uniform fractions, unit total, weight at `active`.
    pub fn uniform(k: usize, alphabet: Alphabet, active: StateId) -> Result<Self> {
        if k == 0 {
            return Err(Error::NoStates);
        }
        if active >= k {
            return Err(Error::StateOutOfRange { state: active, k });
        }
        let row = vec![frac(1, alphabet.size() as u64); alphabet.size()];
        let mut w_state = vec![BigRational::zero(); k];
        w_state[active] = BigRational::one();
        Ok(ClassMarginals {
            w_trans: vec![row; k],
            w_state,
            total: BigRational::one(),
        })
    }

    /// The state currently holding the class weight. Errors unless exactly
    /// one entry is nonzero.
    pub fn active_state(&self) -> Result<StateId> {
        let mut active = None;
        for (i, w) in self.w_state.iter().enumerate() {
            if !w.is_zero() {
                if active.is_some() {
                    return Err(Error::MalformedStateWeights);
                }
                active = Some(i);
            }
        }
        active.ok_or(Error::MalformedStateWeights)
    }

    /// One observation step for the class under transition table `g`:
    /// the total grows by the correctly-predicting fraction
    /// (total ← total·(1 + (λ−1)·w_trans[active][observed])), the active
    /// row is rewarded at the observed column and renormalized, and the
    /// class weight moves to the state `g` maps (observed, active) to.
    pub fn class_step(
        &self,
        g: &FiniteStatePredictor,
        observed: Symbol,
        lambda: RatioSpec,
    ) -> Result<Self> {
        let active = self.active_state()?;
        if !lambda.at_least_one() {
            return Err(Error::LambdaOutOfRange(lambda.to_string()));
        }
        let factor = frac(lambda.num, lambda.den);
        let correct = &self.w_trans[active][observed];
        let growth = BigRational::one() + (&factor - BigRational::one()) * correct;
        let total = &self.total * &growth;

        let mut w_trans = self.w_trans.clone();
        let rewarded = &w_trans[active][observed] * &factor;
        w_trans[active][observed] = rewarded;
        let row_sum = sum(&w_trans[active]);
        for entry in w_trans[active].iter_mut() {
            *entry = &*entry / &row_sum;
        }

        let next = g.transition(observed, active)?;
        let mut w_state = vec![BigRational::zero(); self.w_state.len()];
        w_state[next] = total.clone();
        Ok(ClassMarginals {
            w_trans,
            w_state,
            total,
        })
    }
}

/// Result of replaying one update script through both representations.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductFormCheck {
    pub agree: bool,
    /// Largest |cube marginal − row marginal| seen at any step.
    pub max_deviation: BigRational,
}

/// Replays `script` (state, symbol, λ triples) through the dense cube (plane
/// updates) and through bare row marginals (multiplicative row updates),
/// comparing the cube's marginals against the maintained rows after every
/// update. Exact agreement at every step means the |A|^K → |A|·K reduction
/// lost nothing on this script.
pub fn verify_product_form(
    k: usize,
    alphabet: Alphabet,
    script: &[(StateId, Symbol, RatioSpec)],
) -> Result<ProductFormCheck> {
    let mut cube = HypercubeWeights::uniform(k, alphabet)?;
    let mut rows = vec![vec![frac(1, alphabet.size() as u64); alphabet.size()]; k];
    let mut max_deviation = BigRational::zero();
    let mut agree = true;
    for &(state, symbol, lambda) in script {
        cube = cube.update_plane(state, symbol, lambda)?;
        let factor = frac(lambda.num, lambda.den);
        let rewarded = &rows[state][symbol] * &factor;
        rows[state][symbol] = rewarded;
        let row_sum = sum(&rows[state]);
        for entry in rows[state].iter_mut() {
            *entry = &*entry / &row_sum;
        }

        let from_cube = cube.marginals()?;
        for (cube_row, kept_row) in from_cube.iter().zip(&rows) {
            for (a, b) in cube_row.iter().zip(kept_row) {
                let gap = if a >= b { a - b } else { b - a };
                if gap > max_deviation {
                    max_deviation = gap.clone();
                }
                if !gap.is_zero() {
                    agree = false;
                }
            }
        }
    }
    Ok(ProductFormCheck {
        agree,
        max_deviation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_chacha::rand_core::{RngCore, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn lam(text: &str) -> RatioSpec {
        RatioSpec::parse(text).unwrap()
    }

    fn disp(r: &BigRational) -> String {
        format!("{}/{}", r.numer(), r.denom())
    }

    fn show(rows: &[Vec<BigRational>]) -> Vec<Vec<String>> {
        rows.iter().map(|r| r.iter().map(disp).collect()).collect()
    }

    #[test]
    fn uniform_cube_has_flat_marginals() {
        let cube = HypercubeWeights::uniform(2, Alphabet::new(2).unwrap()).unwrap();
        assert_eq!(cube.cells().len(), 4);
        assert_eq!(disp(&cube.total()), "1/1");
        assert_eq!(
            show(&cube.marginals().unwrap()),
            [["1/2", "1/2"], ["1/2", "1/2"]]
        );
    }

    #[test]
    fn plane_update_reweights_one_row_only() {
        // Reward the vectors predicting a2 at the first state (λ=2): the
        // first state's marginal shifts to (1/3, 2/3); the second state's
        // stays put, and so does the total.
        let cube = HypercubeWeights::uniform(2, Alphabet::new(2).unwrap()).unwrap();
        let updated = cube.update_plane(0, 1, lam("2")).unwrap();
        assert_eq!(
            show(&updated.marginals().unwrap()),
            [["1/3", "2/3"], ["1/2", "1/2"]]
        );
        assert_eq!(updated.total(), cube.total());
    }

    #[test]
    fn unit_factor_leaves_cube_unchanged() {
        let cube = HypercubeWeights::uniform(3, Alphabet::new(2).unwrap()).unwrap();
        let updated = cube.update_plane(1, 0, lam("1")).unwrap();
        assert_eq!(updated, cube);
    }

    #[test]
    fn update_plane_checks_ranges() {
        let cube = HypercubeWeights::uniform(2, Alphabet::new(2).unwrap()).unwrap();
        assert!(cube.update_plane(2, 0, lam("2")).is_err());
        assert!(cube.update_plane(0, 2, lam("2")).is_err());
        assert!(cube.update_plane(0, 0, lam("1/2")).is_err());
    }

    #[test]
    fn point_mass_has_unit_marginals() {
        let cube = HypercubeWeights::point_mass(2, Alphabet::new(2).unwrap(), &[0, 0]).unwrap();
        assert_eq!(
            show(&cube.marginals().unwrap()),
            [["1/1", "0/1"], ["1/1", "0/1"]]
        );
    }

    #[test]
    fn oversized_cube_is_rejected() {
        // 2^25 cells crosses the cap.
        let err = HypercubeWeights::uniform(25, Alphabet::new(2).unwrap()).unwrap_err();
        assert!(matches!(err, Error::CubeTooLarge { .. }));
    }

    #[test]
    fn class_step_grows_total_by_correct_fraction() {
        let alphabet = Alphabet::new(2).unwrap();
        let g =
            FiniteStatePredictor::new(alphabet, vec![vec![0, 1], vec![1, 0]], vec![0, 0], 0)
                .unwrap();
        let m = ClassMarginals::uniform(2, alphabet, 0).unwrap();
        // Half the class predicts the observed symbol: total 1 → 3/2.
        let next = m.class_step(&g, 0, lam("2")).unwrap();
        assert_eq!(disp(&next.total), "3/2");
        assert_eq!(show(&next.w_trans), [["2/3", "1/3"], ["1/2", "1/2"]]);
        // Weight moved to the state the table sends (a1, s1) to: s1.
        assert_eq!(next.active_state().unwrap(), 0);
        assert_eq!(next.w_state[0], next.total);

        // Whole class correct: total doubles.
        let point = ClassMarginals {
            w_trans: vec![
                vec![BigRational::one(), BigRational::zero()],
                vec![frac(1, 2), frac(1, 2)],
            ],
            w_state: vec![BigRational::one(), BigRational::zero()],
            total: BigRational::one(),
        };
        let next = point.class_step(&g, 0, lam("2")).unwrap();
        assert_eq!(disp(&next.total), "2/1");
    }

    #[test]
    fn class_step_follows_the_transition_table() {
        let alphabet = Alphabet::new(2).unwrap();
        // On a1 stay put, on a2 swap states.
        let g =
            FiniteStatePredictor::new(alphabet, vec![vec![0, 1], vec![1, 0]], vec![0, 0], 0)
                .unwrap();
        let m = ClassMarginals::uniform(2, alphabet, 0).unwrap();
        let next = m.class_step(&g, 1, lam("2")).unwrap();
        assert_eq!(next.active_state().unwrap(), 1);
    }

    #[test]
    fn malformed_state_weights_are_rejected() {
        let alphabet = Alphabet::new(2).unwrap();
        let g = FiniteStatePredictor::new(
            alphabet,
            vec![vec![0, 0], vec![0, 0]],
            vec![0, 0],
            0,
        )
        .unwrap();
        let broken = ClassMarginals {
            w_trans: vec![vec![frac(1, 2), frac(1, 2)]; 2],
            w_state: vec![BigRational::one(), BigRational::one()],
            total: BigRational::one(),
        };
        assert!(matches!(
            broken.class_step(&g, 0, lam("2")),
            Err(Error::MalformedStateWeights)
        ));
        let empty = ClassMarginals {
            w_trans: vec![vec![frac(1, 2), frac(1, 2)]; 2],
            w_state: vec![BigRational::zero(), BigRational::zero()],
            total: BigRational::one(),
        };
        assert!(matches!(
            empty.active_state(),
            Err(Error::MalformedStateWeights)
        ));
    }

    #[test]
    fn single_update_keeps_representations_equal() {
        let check =
            verify_product_form(2, Alphabet::new(2).unwrap(), &[(0, 1, lam("2"))]).unwrap();
        assert!(check.agree);
        assert!(check.max_deviation.is_zero());
    }

    #[test]
    fn seeded_random_scripts_keep_representations_equal() {
        let alphabet = Alphabet::new(3).unwrap();
        let lambdas = [lam("3/2"), lam("2"), lam("3"), lam("1")];
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let script: Vec<_> = (0..20)
            .map(|_| {
                (
                    (rng.next_u64() % 3) as usize,
                    (rng.next_u64() % 3) as usize,
                    lambdas[(rng.next_u64() % 4) as usize],
                )
            })
            .collect();
        let check = verify_product_form(3, alphabet, &script).unwrap();
        assert!(check.agree);
        assert!(check.max_deviation.is_zero());
    }

    #[test]
    fn repeated_same_row_updates_keep_representations_equal() {
        let script: Vec<_> = (0..12)
            .map(|i| (1usize, (i % 2) as usize, lam("2")))
            .collect();
        let check = verify_product_form(2, Alphabet::new(2).unwrap(), &script).unwrap();
        assert!(check.agree);
    }

    #[test]
    fn cube_stays_an_outer_product_of_its_marginals() {
        let alphabet = Alphabet::new(2).unwrap();
        let mut cube = HypercubeWeights::uniform(3, alphabet).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..15 {
            let state = (rng.next_u64() % 3) as usize;
            let symbol = (rng.next_u64() % 2) as usize;
            cube = cube.update_plane(state, symbol, lam("2")).unwrap();
        }
        let rows = cube.marginals().unwrap();
        let total = cube.total();
        for (i, cell) in cube.cells().iter().enumerate() {
            let mut expect = total.clone();
            for (state, row) in rows.iter().enumerate() {
                let digit = (i / alphabet.size().pow(state as u32)) % alphabet.size();
                expect = &expect * &row[digit];
            }
            assert_eq!(cell, &expect, "cell {i}");
        }
    }
}
