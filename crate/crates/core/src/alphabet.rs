use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Symbols are `usize` indices in `0..alphabet.size()`. Human-readable forms
/// are 1-based (`a1`, `a2`, ...); the conversion happens only at the text
/// boundary, never in the data structures.
pub type Symbol = usize;

/// A state index in `0..k`.
pub type StateId = usize;

/// A finite input alphabet, identified only by its size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Alphabet {
    size: usize,
}

impl Alphabet {
    pub fn new(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::EmptyAlphabet);
        }
        Ok(Alphabet { size })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn symbols(&self) -> impl Iterator<Item = Symbol> {
        0..self.size
    }

    pub fn check(&self, symbol: Symbol) -> Result<()> {
        if symbol < self.size {
            Ok(())
        } else {
            Err(Error::SymbolOutOfRange {
                symbol,
                alphabet: self.size,
            })
        }
    }

    pub fn check_all(&self, symbols: &[Symbol]) -> Result<()> {
        symbols.iter().try_for_each(|&s| self.check(s))
    }

    /// Renders a symbol in the 1-based display form, e.g. internal 0 -> "a1".
    pub fn display_symbol(&self, symbol: Symbol) -> String {
        format!("a{}", symbol + 1)
    }

    /// Renders a sequence in compact text form, e.g. "a1a2a3".
    pub fn display_sequence(&self, symbols: &[Symbol]) -> String {
        symbols.iter().map(|&s| self.display_symbol(s)).collect()
    }

    /// Parses compact text form ("a1a2a3", whitespace and commas allowed)
    /// into internal 0-based symbols.
    pub fn parse_sequence(&self, text: &str) -> Result<Vec<Symbol>> {
        parse_sequence_text(text).and_then(|seq| {
            self.check_all(&seq)?;
            Ok(seq)
        })
    }
}

/// Parses "a1a2a3" (case-insensitive, whitespace/comma separators tolerated)
/// without an alphabet bound; callers validate the range.
pub fn parse_sequence_text(text: &str) -> Result<Vec<Symbol>> {
    let err = |reason: &str| Error::SequenceParse {
        input: text.to_string(),
        reason: reason.to_string(),
    };
    let mut symbols = Vec::new();
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        if c.is_whitespace() || c == ',' {
            continue;
        }
        if c != 'a' && c != 'A' {
            return Err(err(&format!("unexpected character {c:?}")));
        }
        let mut digits = String::new();
        while let Some(d) = chars.peek().filter(|d| d.is_ascii_digit()) {
            digits.push(*d);
            chars.next();
        }
        if digits.is_empty() {
            return Err(err("'a' must be followed by a 1-based index"));
        }
        let value: usize = digits
            .parse()
            .map_err(|_| err(&format!("index {digits:?} too large")))?;
        if value == 0 {
            return Err(err("symbol indices are 1-based; a0 is not a symbol"));
        }
        symbols.push(value - 1);
    }
    Ok(symbols)
}
