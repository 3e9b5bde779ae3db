//! Sequence sources for experiments: periodic repetition, seeded i.i.d.
//! streams, automaton-filtered streams (a machine driven by i.i.d. input,
//! emitting its per-state prediction symbol), and the gated-composite
//! construction whose predictions depend on events arbitrarily far in the
//! past — together with the fixed-window baseline predictor that provably
//! cannot see those events.

use crate::alphabet::{Alphabet, Symbol};
use crate::error::{Error, Result};
use crate::predictor::FiniteStatePredictor;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;

/// What to generate. Every variant is fully deterministic given its fields.
#[derive(Debug, Clone, PartialEq)]
pub enum GeneratorSpec {
    /// `pattern` repeated (and truncated) to `length`.
    Periodic { pattern: Vec<Symbol>, length: usize },
    /// Independent uniform symbols from a seeded, counter-addressable
    /// generator: symbol `i` depends only on (seed, i), so any chunking of
    /// the range produces the same stream.
    Iid {
        alphabet: Alphabet,
        seed: u64,
        length: usize,
    },
    /// A machine driven by the seeded i.i.d. stream over its own alphabet,
    /// emitting the active state's prediction symbol before each step.
    AutomatonFiltered {
        automaton: FiniteStatePredictor,
        seed: u64,
        length: usize,
    },
    /// One input of the two-block lookback demonstration pair (see
    /// [`lookback_demo`]): both inputs share a long common suffix but leave
    /// the composite machine in different blocks.
    GatedCompositeDemo { gate_len: usize, variant: DemoVariant },
}

/// Which input of the demonstration pair to generate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DemoVariant {
    First,
    Second,
}

/// The `position`-th symbol of the seeded i.i.d. stream, uniform over the
/// alphabet. Addressable by position: the generator is seeked to the words
/// backing that position, so streams can be produced in any chunking.
pub fn iid_symbol_at(seed: u64, position: u64, alphabet: Alphabet) -> Symbol {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Each u64 draw consumes two 32-bit words.
    rng.set_word_pos(position as u128 * 2);
    let raw = rng.next_u64();
    // Multiply-shift keeps the map uniform without rejection sampling; the
    // bias for alphabet sizes in this crate's range is ~|A|/2^64.
    ((raw as u128 * alphabet.size() as u128) >> 64) as usize
}

/// Materializes the spec into a symbol sequence.
pub fn generate(spec: &GeneratorSpec) -> Result<Vec<Symbol>> {
    match spec {
        GeneratorSpec::Periodic { pattern, length } => {
            if pattern.is_empty() {
                return Err(Error::EmptyPattern);
            }
            Ok(pattern.iter().copied().cycle().take(*length).collect())
        }
        GeneratorSpec::Iid {
            alphabet,
            seed,
            length,
        } => Ok((0..*length as u64)
            .map(|i| iid_symbol_at(*seed, i, *alphabet))
            .collect()),
        GeneratorSpec::AutomatonFiltered {
            automaton,
            seed,
            length,
        } => {
            let mut machine = automaton.clone();
            machine.reset();
            let mut out = Vec::with_capacity(*length);
            for t in 0..*length as u64 {
                out.push(machine.predict());
                machine.step(iid_symbol_at(*seed, t, machine.alphabet()))?;
            }
            Ok(out)
        }
        GeneratorSpec::GatedCompositeDemo { gate_len, variant } => {
            let demo = lookback_demo(*gate_len)?;
            Ok(match variant {
                DemoVariant::First => demo.input_first,
                DemoVariant::Second => demo.input_second,
            })
        }
    }
}

/// Joins two machines into one: control lives in exactly one block at a
/// time, and jumps to the other block's initial state precisely when the
/// input completes the gate pattern. Gate progress follows string-matching
/// semantics (a failed symbol falls back to the longest prefix of the gate
/// it still extends, so overlapping occurrences fire repeatedly), and a
/// completed gate resets progress to zero. The result is an ordinary
/// predictor with `(K_a + K_b) · gate_len` states.
pub fn gated_composite(
    block_a: &FiniteStatePredictor,
    block_b: &FiniteStatePredictor,
    gate: &[Symbol],
) -> Result<FiniteStatePredictor> {
    if gate.is_empty() {
        return Err(Error::EmptyGate);
    }
    let alphabet = block_a.alphabet();
    if block_b.alphabet() != alphabet {
        return Err(Error::AlphabetMismatch {
            left: alphabet.size(),
            right: block_b.alphabet().size(),
        });
    }
    alphabet.check_all(gate)?;

    let g = gate.len();
    let ka = block_a.num_states();
    let kb = block_b.num_states();
    let total = (ka + kb) * g;

    // Longest proper prefix of the gate that is also a suffix of gate[..=i].
    let mut fail = vec![0usize; g];
    for i in 1..g {
        let mut p = fail[i - 1];
        loop {
            if gate[p] == gate[i] {
                fail[i] = p + 1;
                break;
            }
            if p == 0 {
                fail[i] = 0;
                break;
            }
            p = fail[p - 1];
        }
    }
    let advance = |progress: usize, symbol: Symbol| -> usize {
        let mut p = progress;
        loop {
            if gate[p] == symbol {
                return p + 1;
            }
            if p == 0 {
                return 0;
            }
            p = fail[p - 1];
        }
    };

    // Composite state id: ((block offset + block state) * g) + progress.
    let id = |in_b: bool, state: usize, progress: usize| -> usize {
        ((if in_b { ka } else { 0 }) + state) * g + progress
    };

    let mut transitions = vec![vec![0usize; total]; alphabet.size()];
    let mut predictions = vec![0usize; total];
    for in_b in [false, true] {
        let (block, other_entry) = if in_b {
            (block_b, id(false, block_a.initial_state(), 0))
        } else {
            (block_a, id(true, block_b.initial_state(), 0))
        };
        for state in 0..block.num_states() {
            for progress in 0..g {
                let here = id(in_b, state, progress);
                predictions[here] = block.predictions()[state];
                for symbol in alphabet.symbols() {
                    let next_progress = advance(progress, symbol);
                    transitions[symbol][here] = if next_progress == g {
                        other_entry
                    } else {
                        id(in_b, block.transitions()[symbol][state], next_progress)
                    };
                }
            }
        }
    }
    FiniteStatePredictor::new(
        alphabet,
        transitions,
        predictions,
        id(false, block_a.initial_state(), 0),
    )
}

/// A baseline predictor that sees only the last `window` symbols: a lookup
/// table over recent contexts, defaulting to repeating the most recent
/// symbol (and to the first symbol on an empty history).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WindowPredictor {
    window: usize,
    alphabet: Alphabet,
    table: HashMap<Vec<Symbol>, Symbol>,
}

impl WindowPredictor {
    pub fn new(
        window: usize,
        alphabet: Alphabet,
        table: HashMap<Vec<Symbol>, Symbol>,
    ) -> Result<Self> {
        if window == 0 {
            return Err(Error::InvalidSpec(
                "window must cover at least one symbol".to_string(),
            ));
        }
        for (context, &prediction) in &table {
            alphabet.check_all(context)?;
            alphabet.check(prediction)?;
            if context.len() > window {
                return Err(Error::InvalidSpec(format!(
                    "table context of length {} exceeds window {window}",
                    context.len()
                )));
            }
        }
        Ok(WindowPredictor {
            window,
            alphabet,
            table,
        })
    }

    pub fn window(&self) -> usize {
        self.window
    }

    /// Predicts from the last `min(window, |history|)` symbols only.
    pub fn predict(&self, history: &[Symbol]) -> Symbol {
        let start = history.len().saturating_sub(self.window);
        let context = &history[start..];
        if let Some(&prediction) = self.table.get(context) {
            return prediction;
        }
        context.last().copied().unwrap_or(0)
    }
}

/// The lookback demonstration: a two-block composite (one block always
/// predicts a1, the other always a2, gate = a1 repeated `gate_len` times)
/// plus two inputs of length ≥ 100 that share their entire tail — no gate
/// completions occur in it — but differ in how many gates fired near the
/// start. The composite therefore ends in different blocks and predicts
/// different next symbols, while any predictor of the shared-tail's length
/// cannot tell the inputs apart.
#[derive(Debug, Clone, PartialEq)]
pub struct LookbackDemo {
    pub composite: FiniteStatePredictor,
    pub input_first: Vec<Symbol>,
    pub input_second: Vec<Symbol>,
    /// Length of the identical tail shared by the two inputs.
    pub shared_suffix_len: usize,
}

pub fn lookback_demo(gate_len: usize) -> Result<LookbackDemo> {
    if gate_len == 0 {
        return Err(Error::EmptyGate);
    }
    let alphabet = Alphabet::new(2)?;
    let block_a = FiniteStatePredictor::constant(alphabet, 0)?;
    let block_b = FiniteStatePredictor::constant(alphabet, 1)?;
    let gate = vec![0usize; gate_len];
    let composite = gated_composite(&block_a, &block_b, &gate)?;

    let g = gate_len;
    // First input: a run of a2 (no progress), one completed gate, a2.
    // Control ends in the second block.
    let mut first: Vec<Symbol> = Vec::new();
    first.extend(std::iter::repeat(1).take(g + 1));
    first.extend(std::iter::repeat(0).take(g));
    first.push(1);
    // Second input: two completed gates separated by a2. Control returns to
    // the first block. Same length as the first input.
    let mut second: Vec<Symbol> = Vec::new();
    second.extend(std::iter::repeat(0).take(g));
    second.push(1);
    second.extend(std::iter::repeat(0).take(g));
    second.push(1);
    debug_assert_eq!(first.len(), second.len());

    // Shared tail with no gate completion: every a1 run is shorter than the
    // gate. Both prefixes end on a2, so both machines enter the tail with
    // zero gate progress.
    let unit: Vec<Symbol> = match g {
        1 => vec![1],
        2 => vec![0, 1],
        _ => vec![0, 0, 1],
    };
    let suffix_len = std::cmp::max(50, 100usize.saturating_sub(first.len()));
    let suffix: Vec<Symbol> = unit.iter().copied().cycle().take(suffix_len).collect();
    first.extend(&suffix);
    second.extend(&suffix);

    Ok(LookbackDemo {
        composite,
        input_first: first,
        input_second: second,
        shared_suffix_len: suffix_len,
    })
}
