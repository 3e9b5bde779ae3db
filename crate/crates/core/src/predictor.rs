//! Deterministic finite-state predictors.
//!
//! A predictor has `k` internal states. Each state carries one predicted
//! symbol; on observing the actual next symbol it moves to another state via
//! a transition table indexed by (observed symbol, current state). This is a
//! Moore-style machine: the prediction depends only on the active state, and
//! the observation drives the state change.

use crate::alphabet::{Alphabet, StateId, Symbol};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// A deterministic finite-state predictor over an alphabet.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FiniteStatePredictor {
    alphabet: Alphabet,
    k: usize,
    /// `transitions[i][j]` is the next state when symbol `i` is observed in
    /// state `j`. Row per symbol, column per state.
    transitions: Vec<Vec<StateId>>,
    /// `predictions[j]` is the symbol predicted while state `j` is active.
    predictions: Vec<Symbol>,
    /// State the machine starts in before any observation.
    initial_state: StateId,
    /// Currently active state.
    active_state: StateId,
}

impl FiniteStatePredictor {
    pub fn new(
        alphabet: Alphabet,
        transitions: Vec<Vec<StateId>>,
        predictions: Vec<Symbol>,
        initial_state: StateId,
    ) -> Result<Self> {
        let k = predictions.len();
        if k == 0 {
            return Err(Error::NoStates);
        }
        if transitions.len() != alphabet.size() || transitions.iter().any(|row| row.len() != k) {
            return Err(Error::InvalidSpec(format!(
                "transition table must be {} rows of {} entries",
                alphabet.size(),
                k
            )));
        }
        let check_state = |state: StateId| {
            if state < k {
                Ok(())
            } else {
                Err(Error::StateOutOfRange { state, k })
            }
        };
        transitions
            .iter()
            .flatten()
            .try_for_each(|&s| check_state(s))?;
        alphabet.check_all(&predictions)?;
        check_state(initial_state)?;
        Ok(FiniteStatePredictor {
            alphabet,
            k,
            transitions,
            predictions,
            initial_state,
            active_state: initial_state,
        })
    }

    /// A single-state machine that always predicts `symbol`.
    pub fn constant(alphabet: Alphabet, symbol: Symbol) -> Result<Self> {
        alphabet.check(symbol)?;
        FiniteStatePredictor::new(
            alphabet,
            vec![vec![0]; alphabet.size()],
            vec![symbol],
            0,
        )
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn num_states(&self) -> usize {
        self.k
    }

    pub fn initial_state(&self) -> StateId {
        self.initial_state
    }

    pub fn active_state(&self) -> StateId {
        self.active_state
    }

    pub fn transitions(&self) -> &[Vec<StateId>] {
        &self.transitions
    }

    pub fn predictions(&self) -> &[Symbol] {
        &self.predictions
    }

    /// The symbol predicted for the next observation.
    pub fn predict(&self) -> Symbol {
        self.predictions[self.active_state]
    }

    /// Next state if `symbol` were observed in `state`, without mutating.
    pub fn transition(&self, symbol: Symbol, state: StateId) -> Result<StateId> {
        self.alphabet.check(symbol)?;
        if state >= self.k {
            return Err(Error::StateOutOfRange { state, k: self.k });
        }
        Ok(self.transitions[symbol][state])
    }

    /// Observes `symbol`: moves the active state along the transition table.
    pub fn step(&mut self, symbol: Symbol) -> Result<()> {
        self.alphabet.check(symbol)?;
        self.active_state = self.transitions[symbol][self.active_state];
        Ok(())
    }

    /// Resets the active state to the initial state.
    pub fn reset(&mut self) {
        self.active_state = self.initial_state;
    }

    /// Runs the predictor over a sequence from its initial state, recording
    /// each prediction before the corresponding observation.
    pub fn run(&self, sequence: &[Symbol]) -> Result<RunTrace> {
        self.alphabet.check_all(sequence)?;
        let mut machine = self.clone();
        machine.reset();
        let mut trace = RunTrace::new();
        for (i, &symbol) in sequence.iter().enumerate() {
            let guess = machine.predict();
            trace.push(i + 1, guess, symbol);
            machine.step(symbol)?;
        }
        trace.final_state = Some(machine.active_state);
        Ok(trace)
    }

    /// Cumulative 0/1 prediction loss over a sequence from the initial state.
    pub fn loss(&self, sequence: &[Symbol]) -> Result<u64> {
        Ok(self.run(sequence)?.cumulative_loss)
    }
}

/// One prediction/observation pair in a run. `t` is 1-based: step `t`
/// predicts the `t`-th symbol of the sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TraceStep {
    pub t: usize,
    pub predicted: Symbol,
    pub observed: Symbol,
    /// 0 when predicted == observed, 1 otherwise.
    pub loss: u8,
}

/// The full record of one run: every prediction/observation pair, the total
/// number of wrong predictions, and (for a single machine) the state the run
/// ended in. Aggregate runners leave `final_state` unset.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RunTrace {
    pub steps: Vec<TraceStep>,
    pub cumulative_loss: u64,
    pub final_state: Option<StateId>,
}

impl RunTrace {
    pub fn new() -> Self {
        RunTrace::default()
    }

    pub fn push(&mut self, t: usize, predicted: Symbol, observed: Symbol) {
        let loss = u8::from(predicted != observed);
        self.steps.push(TraceStep {
            t,
            predicted,
            observed,
            loss,
        });
        self.cumulative_loss += u64::from(loss);
    }

    /// Re-adds the per-step losses; always equals `cumulative_loss`.
    pub fn recount_loss(&self) -> u64 {
        self.steps.iter().map(|s| u64::from(s.loss)).sum()
    }
}
