use std::fmt;

use serde::Serialize;

use crate::error::ModelError;

/// The terminal symbols available for free at the start of every assembly.
///
/// Symbol order is significant: the binary witness encoding refers to
/// terminals by their position here.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct Alphabet {
    symbols: Vec<char>,
}

impl Alphabet {
    pub fn new(symbols: impl IntoIterator<Item = char>) -> Result<Self, ModelError> {
        let symbols: Vec<char> = symbols.into_iter().collect();
        if symbols.is_empty() {
            return Err(ModelError::EmptyAlphabet);
        }
        for (i, c) in symbols.iter().enumerate() {
            if symbols[..i].contains(c) {
                return Err(ModelError::DuplicateSymbol(*c));
            }
        }
        Ok(Self { symbols })
    }

    /// Distinct symbols of `text` in order of first appearance.
    pub fn infer(text: &str) -> Result<Self, ModelError> {
        let mut symbols = Vec::new();
        for c in text.chars() {
            if !symbols.contains(&c) {
                symbols.push(c);
            }
        }
        Self::new(symbols)
    }

    pub fn symbols(&self) -> &[char] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn contains(&self, c: char) -> bool {
        self.symbols.contains(&c)
    }

    pub fn position(&self, c: char) -> Option<usize> {
        self.symbols.iter().position(|&s| s == c)
    }

    /// Returns a copy of this alphabet with `extra` appended, skipping
    /// symbols that are already present.
    pub fn extended(&self, extra: impl IntoIterator<Item = char>) -> Self {
        let mut symbols = self.symbols.clone();
        for c in extra {
            if !symbols.contains(&c) {
                symbols.push(c);
            }
        }
        Self { symbols }
    }
}

impl fmt::Display for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.symbols.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

/// A non-empty sequence of symbols. Comparison is by exact symbol sequence.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word {
    symbols: Vec<char>,
}

impl Word {
    pub fn new(symbols: Vec<char>) -> Result<Self, ModelError> {
        if symbols.is_empty() {
            return Err(ModelError::EmptyWord);
        }
        Ok(Self { symbols })
    }

    /// Builds a word and checks every symbol against `alphabet`.
    pub fn over(alphabet: &Alphabet, symbols: Vec<char>) -> Result<Self, ModelError> {
        if let Some(&c) = symbols.iter().find(|&&c| !alphabet.contains(c)) {
            return Err(ModelError::SymbolNotInAlphabet(c));
        }
        Self::new(symbols)
    }

    pub fn parse(text: &str) -> Result<Self, ModelError> {
        Self::new(text.chars().collect())
    }

    pub fn symbols(&self) -> &[char] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    /// Always false; present for API symmetry with `len`.
    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// The alphabet of this word's distinct symbols, in first-appearance order.
    pub fn inferred_alphabet(&self) -> Alphabet {
        let mut symbols = Vec::new();
        for &c in &self.symbols {
            if !symbols.contains(&c) {
                symbols.push(c);
            }
        }
        Alphabet { symbols }
    }

    /// Symbols mapped to their alphabet positions. Callers must have checked
    /// membership.
    pub(crate) fn codes(&self, alphabet: &Alphabet) -> Vec<u32> {
        self.symbols
            .iter()
            .map(|&c| alphabet.position(c).expect("symbol in alphabet") as u32)
            .collect()
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.symbols {
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl Serialize for Word {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}
