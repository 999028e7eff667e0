//! Domain types shared across the pipeline stages.

use std::collections::BTreeSet;
use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Slug identifying a character within a series, e.g. `jerry`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CharacterId(String);

impl CharacterId {
    pub fn new(id: impl Into<String>) -> Self {
        CharacterId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for CharacterId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for CharacterId {
    fn from(s: &str) -> Self {
        CharacterId(s.to_string())
    }
}

/// Episode-local segment index, assigned in timeline order starting at 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SegmentId(pub u32);

impl fmt::Display for SegmentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WordToken {
    pub text: String,
    pub start: f64,
    pub end: f64,
    /// ASR confidence; absent means 1.0.
    pub confidence: Option<f64>,
}

impl WordToken {
    pub fn new(text: impl Into<String>, start: f64, end: f64) -> Self {
        WordToken { text: text.into(), start, end, confidence: None }
    }

    pub fn confidence(&self) -> f64 {
        self.confidence.unwrap_or(1.0)
    }
}

/// A sentence-level unit of speech, assumed to have a single speaker.
#[derive(Debug, Clone, PartialEq)]
pub struct SpeechSegment {
    pub id: SegmentId,
    pub start: f64,
    pub end: f64,
    pub text: String,
    /// Indices into the episode word list.
    pub word_range: Range<usize>,
}

impl SpeechSegment {
    pub fn duration(&self) -> f64 {
        self.end - self.start
    }

    pub fn contains_time(&self, t: f64) -> bool {
        t >= self.start && t <= self.end
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaughterInterval {
    pub start: f64,
    pub end: f64,
    pub score: f64,
}

/// A voice vector of corpus-defined dimension. Entries are always finite.
#[derive(Debug, Clone, PartialEq)]
pub struct VoiceEmbedding(Vec<f64>);

impl VoiceEmbedding {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(VoiceEmbedding(values))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

/// Row-major H×W matrix of localisation scores in [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl Grid {
    pub fn new(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Invalid(format!("grid must be non-empty, got {rows}x{cols}")));
        }
        if values.len() != rows * cols {
            return Err(Error::DimensionMismatch { expected: rows * cols, actual: values.len() });
        }
        if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::Invalid(format!("grid value {v} outside [0, 1]")));
        }
        Ok(Grid { rows, cols, values })
    }

    pub fn filled(rows: usize, cols: usize, value: f64) -> Result<Self> {
        Grid::new(rows, cols, vec![value; rows * cols])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.cols + col]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeatmapFrame {
    pub timestamp: f64,
    pub grid: Grid,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub row: usize,
    pub col: usize,
    pub value: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PeakSet {
    pub peaks: Vec<Peak>,
}

impl PeakSet {
    pub fn len(&self) -> usize {
        self.peaks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.peaks.is_empty()
    }
}

/// Frame-level visual embedding, as produced by the face classifier's image tower.
#[derive(Debug, Clone, PartialEq)]
pub struct FaceFrame {
    pub timestamp: f64,
    pub embedding: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CastEntry {
    pub id: CharacterId,
    pub display_name: String,
    /// L2-normalised text-image prototype.
    pub prototype: Vec<f64>,
    pub episodes: BTreeSet<String>,
    /// Transcript speaker names that map to this character.
    pub aliases: Vec<String>,
}

impl CastEntry {
    pub fn appears_in(&self, episode_id: &str) -> bool {
        self.episodes.contains(episode_id)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExemplarRecord {
    pub episode_id: String,
    pub segment_id: SegmentId,
    pub character: CharacterId,
    pub embedding: VoiceEmbedding,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Label {
    Character(CharacterId),
    Unknown,
}

impl Label {
    pub const UNKNOWN: &'static str = "UNKNOWN";

    pub fn character(&self) -> Option<&CharacterId> {
        match self {
            Label::Character(c) => Some(c),
            Label::Unknown => None,
        }
    }

    pub fn is_unknown(&self) -> bool {
        matches!(self, Label::Unknown)
    }

    pub fn parse(s: &str) -> Label {
        if s == Self::UNKNOWN {
            Label::Unknown
        } else {
            Label::Character(CharacterId::new(s))
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Character(c) => c.fmt(f),
            Label::Unknown => f.write_str(Self::UNKNOWN),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    pub segment_id: SegmentId,
    pub label: Label,
    /// Cosine distance to the nearest centroid; infinite when the bank is empty.
    pub distance: f64,
}

/// Ground-truth speaker turn.
#[derive(Debug, Clone, PartialEq)]
pub struct GtSegment {
    pub start: f64,
    pub end: f64,
    pub speaker: CharacterId,
    pub text: String,
}

/// A labelled time span on the hypothesis side of evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct HypSegment {
    pub start: f64,
    pub end: f64,
    pub label: Label,
}

/// Length of the intersection of two closed intervals, zero when disjoint.
pub fn overlap(a_start: f64, a_end: f64, b_start: f64, b_end: f64) -> f64 {
    (a_end.min(b_end) - a_start.max(b_start)).max(0.0)
}
