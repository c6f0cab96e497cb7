//! Finite words over small integer alphabets.
//!
//! Letters are `u8` values `0..q`. Everything downstream works on `&[u8]`;
//! [`Word`] adds the alphabet and derefs to its letters.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::Deref;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The alphabet `{0, 1, ..., size - 1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Alphabet(u8);

impl Alphabet {
    /// Alphabets serialize as single digits, so they stop at ten letters.
    pub const MAX: usize = 10;

    pub fn new(size: usize) -> Result<Self> {
        if size == 0 || size > Self::MAX {
            return Err(Error::BadAlphabet(size));
        }
        Ok(Alphabet(size as u8))
    }

    pub fn size(self) -> usize {
        self.0 as usize
    }

    pub fn letters(self) -> impl Iterator<Item = u8> {
        0..self.0
    }

    pub fn contains(self, letter: u8) -> bool {
        letter < self.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Word {
    letters: Vec<u8>,
    alphabet: Alphabet,
}

impl Word {
    pub fn new(letters: Vec<u8>, alphabet: Alphabet) -> Result<Self> {
        if let Some((position, &letter)) = letters
            .iter()
            .enumerate()
            .find(|(_, &l)| !alphabet.contains(l))
        {
            return Err(Error::LetterOutOfRange {
                letter,
                position,
                size: alphabet.0,
            });
        }
        Ok(Word { letters, alphabet })
    }

    pub fn empty(alphabet: Alphabet) -> Self {
        Word {
            letters: Vec::new(),
            alphabet,
        }
    }

    /// Parses a digit string over the given alphabet.
    pub fn parse_over(s: &str, alphabet: Alphabet) -> Result<Self> {
        Word::new(parse_digits(s)?, alphabet)
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn letters(&self) -> &[u8] {
        &self.letters
    }

    pub fn into_letters(self) -> Vec<u8> {
        self.letters
    }
}

impl Deref for Word {
    type Target = [u8];

    fn deref(&self) -> &[u8] {
        &self.letters
    }
}

impl AsRef<[u8]> for Word {
    fn as_ref(&self) -> &[u8] {
        &self.letters
    }
}

/// Parses a digit string; the alphabet is the smallest one containing every
/// letter (at least one letter, so the empty word lives over `{0}`).
impl FromStr for Word {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let letters = parse_digits(s)?;
        let size = letters.iter().map(|&l| l as usize + 1).max().unwrap_or(1);
        Word::new(letters, Alphabet::new(size)?)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&to_digits(&self.letters))
    }
}

pub fn parse_digits(s: &str) -> Result<Vec<u8>> {
    s.trim()
        .chars()
        .map(|c| {
            c.to_digit(10)
                .map(|d| d as u8)
                .ok_or_else(|| Error::parse("word", format!("{c:?} is not a digit in {s:?}")))
        })
        .collect()
}

pub fn to_digits(letters: &[u8]) -> String {
    letters.iter().map(|&l| char::from(b'0' + l)).collect()
}

/// Multiset of letter occurrences.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LetterCounts(BTreeMap<u8, usize>);

impl LetterCounts {
    pub fn get(&self, letter: u8) -> usize {
        self.0.get(&letter).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (u8, usize)> + '_ {
        self.0.iter().map(|(&l, &c)| (l, c))
    }

    pub fn total(&self) -> usize {
        self.0.values().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl FromIterator<(u8, usize)> for LetterCounts {
    fn from_iter<I: IntoIterator<Item = (u8, usize)>>(iter: I) -> Self {
        LetterCounts(iter.into_iter().collect())
    }
}

pub fn letter_counts(w: &[u8]) -> LetterCounts {
    let mut counts = BTreeMap::new();
    for &l in w {
        *counts.entry(l).or_insert(0) += 1;
    }
    LetterCounts(counts)
}

/// A tangram has every letter an even number of times. The empty word counts.
pub fn is_tangram(w: &[u8]) -> bool {
    let mut odd = [false; 256];
    for &l in w {
        odd[l as usize] ^= true;
    }
    odd.iter().all(|o| !o)
}

/// Every factor with length in `min_len..=max_len`, grouped by length and
/// then by offset.
pub fn factors(w: &[u8], min_len: usize, max_len: usize) -> impl Iterator<Item = (usize, &[u8])> {
    let min_len = min_len.max(1);
    let max_len = max_len.min(w.len());
    (min_len..=max_len).flat_map(move |len| (0..=w.len() - len).map(move |i| (i, &w[i..i + len])))
}
