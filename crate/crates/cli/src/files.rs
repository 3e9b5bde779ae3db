//! One-based JSON mirrors of core types — the on-disk formats the CLI
//! reads and writes. Internally everything is zero-based; these structs are
//! the only place the two conventions meet.

use fsp_core::{Alphabet, DemoVariant, FiniteStatePredictor, GeneratorSpec};
use serde::{Deserialize, Serialize};

/// A finite-state machine as stored in files: states and symbols 1-based.
/// `transitions[s][q]` is the next state when symbol `a(s+1)` arrives in
/// state `q+1`; `predictions[q]` is the symbol predicted in state `q+1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MachineFile {
    pub alphabet: usize,
    pub initial_state: usize,
    pub predictions: Vec<usize>,
    pub transitions: Vec<Vec<usize>>,
}

fn one_based(value: usize, what: &str) -> Result<usize, String> {
    value
        .checked_sub(1)
        .ok_or_else(|| format!("{what} indices are 1-based; found 0"))
}

impl MachineFile {
    pub fn from_core(machine: &FiniteStatePredictor) -> Self {
        MachineFile {
            alphabet: machine.alphabet().size(),
            initial_state: machine.initial_state() + 1,
            predictions: machine.predictions().iter().map(|&p| p + 1).collect(),
            transitions: machine
                .transitions()
                .iter()
                .map(|row| row.iter().map(|&s| s + 1).collect())
                .collect(),
        }
    }

    pub fn to_core(&self) -> Result<FiniteStatePredictor, String> {
        let alphabet = Alphabet::new(self.alphabet).map_err(|e| e.to_string())?;
        let predictions = self
            .predictions
            .iter()
            .map(|&p| one_based(p, "symbol"))
            .collect::<Result<Vec<_>, _>>()?;
        let transitions = self
            .transitions
            .iter()
            .map(|row| {
                row.iter()
                    .map(|&s| one_based(s, "state"))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        let initial = one_based(self.initial_state, "state")?;
        FiniteStatePredictor::new(alphabet, transitions, predictions, initial)
            .map_err(|e| e.to_string())
    }
}

/// A sequence generator as stored in files; symbols 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SpecFile {
    Periodic {
        pattern: Vec<usize>,
        length: usize,
    },
    Iid {
        alphabet: usize,
        seed: u64,
        length: usize,
    },
    AutomatonFiltered {
        automaton: MachineFile,
        seed: u64,
        length: usize,
    },
    GatedCompositeDemo {
        gate_len: usize,
        variant: u8,
    },
}

impl SpecFile {
    pub fn to_core(&self) -> Result<GeneratorSpec, String> {
        match self {
            SpecFile::Periodic { pattern, length } => {
                let pattern = pattern
                    .iter()
                    .map(|&p| one_based(p, "symbol"))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(GeneratorSpec::Periodic {
                    pattern,
                    length: *length,
                })
            }
            SpecFile::Iid {
                alphabet,
                seed,
                length,
            } => Ok(GeneratorSpec::Iid {
                alphabet: Alphabet::new(*alphabet).map_err(|e| e.to_string())?,
                seed: *seed,
                length: *length,
            }),
            SpecFile::AutomatonFiltered {
                automaton,
                seed,
                length,
            } => Ok(GeneratorSpec::AutomatonFiltered {
                automaton: automaton.to_core()?,
                seed: *seed,
                length: *length,
            }),
            SpecFile::GatedCompositeDemo { gate_len, variant } => {
                let variant = match variant {
                    1 => DemoVariant::First,
                    2 => DemoVariant::Second,
                    other => {
                        return Err(format!(
                            "demonstration variant must be 1 or 2, got {other}"
                        ))
                    }
                };
                Ok(GeneratorSpec::GatedCompositeDemo {
                    gate_len: *gate_len,
                    variant,
                })
            }
        }
    }
}
