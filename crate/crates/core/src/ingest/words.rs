use std::collections::BTreeSet;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::{read_records, write_records};
use crate::error::{Error, Result};
use crate::types::{SegmentId, SpeechSegment, WordToken};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WordRecord {
    w: String,
    s: f64,
    e: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    c: Option<f64>,
}

/// Parses a words file. Tokens must appear in non-decreasing start order.
pub fn parse_words(reader: impl BufRead, source_name: &str) -> Result<Vec<WordToken>> {
    let mut words: Vec<WordToken> = Vec::new();
    for (line, rec) in read_records::<WordRecord>(reader, source_name)? {
        if rec.w.trim().is_empty() {
            return Err(Error::parse(source_name, line, "empty word text"));
        }
        if !rec.s.is_finite() || !rec.e.is_finite() || rec.s < 0.0 {
            return Err(Error::parse(source_name, line, "timestamps must be finite and >= 0"));
        }
        if rec.e < rec.s {
            return Err(Error::parse(source_name, line, format!("word ends before it starts ({} < {})", rec.e, rec.s)));
        }
        if let Some(c) = rec.c {
            if !(0.0..=1.0).contains(&c) {
                return Err(Error::parse(source_name, line, format!("confidence {c} outside [0, 1]")));
            }
        }
        if let Some(prev) = words.last() {
            if rec.s < prev.start {
                return Err(Error::parse(
                    source_name,
                    line,
                    format!("start {} precedes previous word start {}", rec.s, prev.start),
                ));
            }
        }
        words.push(WordToken { text: rec.w, start: rec.s, end: rec.e, confidence: rec.c });
    }
    Ok(words)
}

pub fn write_words(writer: impl Write, words: &[WordToken]) -> std::io::Result<()> {
    write_records(writer, words.iter().map(|w| WordRecord { w: w.text.clone(), s: w.start, e: w.end, c: w.confidence }))
}

pub const DEFAULT_ABBREVIATIONS: [&str; 7] = ["mr.", "mrs.", "dr.", "ms.", "st.", "jr.", "sr."];

/// Rule-based sentence splitter settings.
#[derive(Debug, Clone)]
pub struct SentenceRules {
    abbreviations: BTreeSet<String>,
    max_gap: f64,
}

impl SentenceRules {
    pub fn new(max_gap: f64, extra_abbreviations: &[String]) -> Self {
        let abbreviations = DEFAULT_ABBREVIATIONS
            .iter()
            .map(|s| s.to_string())
            .chain(extra_abbreviations.iter().map(|s| s.trim().to_lowercase()))
            .collect();
        SentenceRules { abbreviations, max_gap }
    }

    fn closes_sentence(&self, word: &str) -> bool {
        let stripped = word.trim().trim_start_matches(|c: char| !c.is_alphanumeric()).to_lowercase();
        if self.abbreviations.contains(&stripped) {
            return false;
        }
        let core = word.trim().trim_end_matches(['"', '\'', ')', ']', '”', '’']);
        core.ends_with(['.', '?', '!', '…'])
    }
}

impl Default for SentenceRules {
    fn default() -> Self {
        SentenceRules::new(3.0, &[])
    }
}

/// Partitions a start-sorted word list into sentence segments.
///
/// A sentence closes after a word ending in terminal punctuation (unless it is
/// a listed abbreviation) or before a word that starts more than `max_gap`
/// seconds after the previous word ended.
pub fn sentence_segments(words: &[WordToken], rules: &SentenceRules) -> Vec<SpeechSegment> {
    let mut segments = Vec::new();
    let mut begin = 0;
    for i in 0..words.len() {
        let last = i + 1 == words.len();
        let gap_break = !last && words[i + 1].start - words[i].end > rules.max_gap;
        if last || gap_break || rules.closes_sentence(&words[i].text) {
            segments.push(make_segment(words, begin..i + 1, segments.len()));
            begin = i + 1;
        }
    }
    segments
}

fn make_segment(words: &[WordToken], range: std::ops::Range<usize>, index: usize) -> SpeechSegment {
    let slice = &words[range.clone()];
    let end = slice.iter().map(|w| w.end).fold(f64::NEG_INFINITY, f64::max);
    SpeechSegment {
        id: SegmentId(index as u32),
        start: slice[0].start,
        end,
        text: slice.iter().map(|w| w.text.trim()).collect::<Vec<_>>().join(" "),
        word_range: range,
    }
}
