//! Assignments and the query-counting oracle the testers go through.

use super::{Alphabet, FormulaError, Sym};
use std::fmt;

/// A full assignment: one symbol per variable position. The text form is one
/// character per position (see [`Alphabet::symbol_char`]), position 0 first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Assignment {
    alphabet: Alphabet,
    values: Vec<Sym>,
}

impl Assignment {
    pub fn new(alphabet: Alphabet, values: Vec<Sym>) -> Result<Self, FormulaError> {
        if let Some(s) = values.iter().find(|s| s.0 as usize >= alphabet.size()) {
            return Err(FormulaError::BadSymbol(s.0));
        }
        Ok(Assignment { alphabet, values })
    }

    /// Parses the single-character-per-position text form.
    pub fn parse(alphabet: Alphabet, text: &str) -> Result<Self, FormulaError> {
        let values = text
            .chars()
            .enumerate()
            .map(|(pos, c)| {
                alphabet.parse_char(c).ok_or(FormulaError::Syntax {
                    pos,
                    msg: format!("character {c:?} is not a {} symbol code", alphabet.label()),
                })
            })
            .collect::<Result<_, _>>()?;
        Ok(Assignment { alphabet, values })
    }

    /// Boolean-valued assignment over any alphabet (bit -> that alphabet's 0/1).
    pub fn from_bits(alphabet: Alphabet, bits: &[bool]) -> Self {
        Assignment {
            alphabet,
            values: bits.iter().map(|&b| alphabet.bool_sym(b)).collect(),
        }
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, var: u32) -> Sym {
        self.values[var as usize]
    }

    pub fn values(&self) -> &[Sym] {
        &self.values
    }

    pub fn set(&mut self, var: u32, s: Sym) {
        self.values[var as usize] = s;
    }

    /// Hamming distance; both assignments must have equal length.
    pub fn hamming(&self, other: &Assignment) -> u64 {
        debug_assert_eq!(self.values.len(), other.values.len());
        self.values
            .iter()
            .zip(&other.values)
            .filter(|(a, b)| a != b)
            .count() as u64
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &s in &self.values {
            write!(f, "{}", self.alphabet.symbol_char(s))?;
        }
        Ok(())
    }
}

/// Wraps an assignment and counts every variable query. Repeat queries count
/// again: the algorithms are implemented exactly per their pseudocode, with
/// no caching, so the counts upper-bound the query complexity.
#[derive(Debug)]
pub struct CountingOracle<'a> {
    assignment: &'a Assignment,
    queries: u64,
}

impl<'a> CountingOracle<'a> {
    pub fn new(assignment: &'a Assignment) -> Self {
        CountingOracle {
            assignment,
            queries: 0,
        }
    }

    pub fn query(&mut self, var: u32) -> Result<Sym, FormulaError> {
        if var as usize >= self.assignment.len() {
            return Err(FormulaError::QueryOutOfRange(var));
        }
        self.queries += 1;
        Ok(self.assignment.get(var))
    }

    /// Queried as a Boolean: true iff the variable holds the alphabet's `1`.
    pub fn query_bool(&mut self, var: u32) -> Result<bool, FormulaError> {
        Ok(self.query(var)? == self.assignment.alphabet().one())
    }

    pub fn query_count(&self) -> u64 {
        self.queries
    }

    pub fn alphabet(&self) -> Alphabet {
        self.assignment.alphabet()
    }

    pub fn assignment_len(&self) -> usize {
        self.assignment.len()
    }
}
