//! The 38-class character space shared by annotations, predictions and queries.
//!
//! Channel 0 is background, 1..=26 are the letters `a`..`z` (case folded),
//! 27..=36 are the digits `0`..`9` and 37 collects everything else.

use crate::error::{Error, Result};

/// Number of channels in every Soft-PHOC tensor.
pub const NUM_CLASSES: usize = 38;

/// Number of non-background (character) channels.
pub const NUM_CHAR_CLASSES: usize = NUM_CLASSES - 1;

pub const BACKGROUND: CharClassId = CharClassId(0);
pub const PUNCTUATION: CharClassId = CharClassId(37);

const FIRST_LETTER: u8 = 1;
const FIRST_DIGIT: u8 = 27;

/// Index of a channel in `[0, 38)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CharClassId(u8);

impl CharClassId {
    pub fn new(index: usize) -> Option<Self> {
        (index < NUM_CLASSES).then_some(CharClassId(index as u8))
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn is_background(self) -> bool {
        self == BACKGROUND
    }

    /// A representative character for display purposes.
    pub fn symbol(self) -> char {
        match self.0 {
            0 => '_',
            c @ 1..=26 => (b'a' + c - FIRST_LETTER) as char,
            c @ 27..=36 => (b'0' + c - FIRST_DIGIT) as char,
            _ => '#',
        }
    }
}

/// Maps any character to its (never background) class.
pub fn classify_char(c: char) -> CharClassId {
    let mut lower = c.to_lowercase();
    // Multi-scalar lowercase expansions are never plain ASCII letters.
    let folded = match (lower.next(), lower.next()) {
        (Some(l), None) => l,
        _ => return PUNCTUATION,
    };
    match folded {
        'a'..='z' => CharClassId(FIRST_LETTER + (folded as u8 - b'a')),
        '0'..='9' => CharClassId(FIRST_DIGIT + (folded as u8 - b'0')),
        _ => PUNCTUATION,
    }
}

pub fn transcription_to_classes(word: &str) -> Result<Vec<CharClassId>> {
    if word.is_empty() {
        return Err(Error::EmptyTranscription);
    }
    Ok(word.chars().map(classify_char).collect())
}
