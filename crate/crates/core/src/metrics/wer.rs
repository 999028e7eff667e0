//! Word error rate with a small, fixed English normaliser.
//!
//! The normaliser is deliberately simpler than the reference ASR toolkits':
//! lowercase, a fixed contraction table, punctuation stripped except for
//! apostrophes inside words, and single digits spelled out.

use crate::error::{Error, Result};

const CONTRACTIONS: &[(&str, &str)] = &[
    ("won't", "will not"),
    ("can't", "can not"),
    ("shan't", "shall not"),
    ("ain't", "aint"),
    ("let's", "let us"),
    ("y'all", "you all"),
    ("gonna", "going to"),
    ("wanna", "want to"),
    ("gotta", "got to"),
];

const DIGITS: [&str; 10] = ["zero", "one", "two", "three", "four", "five", "six", "seven", "eight", "nine"];

pub fn normalize_text(s: &str) -> Vec<String> {
    let lowered = s.to_lowercase().replace(['’', '‘'], "'");
    let cleaned: String = lowered.chars().map(|c| if c.is_alphanumeric() || c == '\'' { c } else { ' ' }).collect();
    let mut out = Vec::new();
    for raw in cleaned.split_whitespace() {
        let word = raw.trim_matches('\'');
        if word.is_empty() {
            continue;
        }
        if let Some((_, expansion)) = CONTRACTIONS.iter().find(|(c, _)| *c == word) {
            out.extend(expansion.split(' ').map(str::to_string));
        } else if let Some(d) = word.parse::<usize>().ok().filter(|_| word.len() == 1) {
            out.push(DIGITS[d].to_string());
        } else {
            out.push(word.to_string());
        }
    }
    out
}

/// Minimum number of word substitutions, insertions and deletions.
pub fn word_edits<S: AsRef<str>>(reference: &[S], hypothesis: &[S]) -> usize {
    let mut prev: Vec<usize> = (0..=hypothesis.len()).collect();
    let mut curr = vec![0; hypothesis.len() + 1];
    for (i, r) in reference.iter().enumerate() {
        curr[0] = i + 1;
        for (j, h) in hypothesis.iter().enumerate() {
            let sub = prev[j] + usize::from(r.as_ref() != h.as_ref());
            curr[j + 1] = sub.min(prev[j + 1] + 1).min(curr[j] + 1);
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    prev[hypothesis.len()]
}

/// Edit count and reference length, additive across documents.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct WerCounts {
    pub edits: usize,
    pub reference_words: usize,
}

impl WerCounts {
    pub fn between(reference: &str, hypothesis: &str) -> Self {
        let r = normalize_text(reference);
        let h = normalize_text(hypothesis);
        WerCounts { edits: word_edits(&r, &h), reference_words: r.len() }
    }

    pub fn add(&mut self, other: &WerCounts) {
        self.edits += other.edits;
        self.reference_words += other.reference_words;
    }

    pub fn rate(&self) -> Result<f64> {
        if self.reference_words == 0 {
            Err(Error::UndefinedMetric("WER needs a non-empty reference"))
        } else {
            Ok(self.edits as f64 / self.reference_words as f64)
        }
    }
}

/// Word error rate as a fraction of normalised reference words.
pub fn wer(reference: &str, hypothesis: &str) -> Result<f64> {
    WerCounts::between(reference, hypothesis).rate()
}
