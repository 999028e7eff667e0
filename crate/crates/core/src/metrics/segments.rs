use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::types::{overlap, CharacterId, GtSegment, HypSegment};

/// Index of the reference segment with the largest positive overlap with
/// `[start, end]`. Ties go to the earlier reference segment.
pub fn best_match(start: f64, end: f64, reference: &[GtSegment]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, r) in reference.iter().enumerate() {
        let ov = overlap(start, end, r.start, r.end);
        if ov <= 0.0 {
            continue;
        }
        let better = match best {
            None => true,
            Some((j, b)) => ov > b || (ov == b && r.start < reference[j].start),
        };
        if better {
            best = Some((i, ov));
        }
    }
    best.map(|(i, _)| i)
}

/// Correct / total over hypothesis segments that overlap some reference segment.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct AccuracyCounts {
    pub correct: usize,
    pub total: usize,
}

impl AccuracyCounts {
    pub fn rate(&self) -> Result<f64> {
        if self.total == 0 {
            Err(Error::UndefinedMetric("no hypothesis segment overlaps the reference"))
        } else {
            Ok(self.correct as f64 / self.total as f64)
        }
    }
}

pub fn accuracy_counts(hypothesis: &[HypSegment], reference: &[GtSegment]) -> AccuracyCounts {
    let mut counts = AccuracyCounts::default();
    for h in hypothesis {
        if let Some(i) = best_match(h.start, h.end, reference) {
            counts.total += 1;
            if h.label.character() == Some(&reference[i].speaker) {
                counts.correct += 1;
            }
        }
    }
    counts
}

/// Identity accuracy on hypothesis segments overlapping the reference. UNKNOWN
/// labels count as wrong.
pub fn accuracy_on_overlap(hypothesis: &[HypSegment], reference: &[GtSegment]) -> Result<f64> {
    accuracy_counts(hypothesis, reference).rate()
}

/// Per-character tallies, additive across episodes.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PrCounts {
    /// Hypothesis segments labelled with the character.
    pub predicted: usize,
    /// Of those, segments whose best-matching reference speaker agrees.
    pub true_positive: usize,
    /// Reference segments of the character.
    pub support: usize,
    /// Reference segments recovered by at least one true positive.
    pub recalled: usize,
}

impl PrCounts {
    pub fn add(&mut self, other: &PrCounts) {
        self.predicted += other.predicted;
        self.true_positive += other.true_positive;
        self.support += other.support;
        self.recalled += other.recalled;
    }
}

pub fn pr_counts(hypothesis: &[HypSegment], reference: &[GtSegment]) -> BTreeMap<CharacterId, PrCounts> {
    let mut table: BTreeMap<CharacterId, PrCounts> = BTreeMap::new();
    let mut recalled = vec![false; reference.len()];
    for r in reference {
        table.entry(r.speaker.clone()).or_default().support += 1;
    }
    for h in hypothesis {
        let Some(c) = h.label.character() else {
            continue;
        };
        let entry = table.entry(c.clone()).or_default();
        entry.predicted += 1;
        if let Some(i) = best_match(h.start, h.end, reference) {
            if &reference[i].speaker == c {
                entry.true_positive += 1;
                recalled[i] = true;
            }
        }
    }
    for (r, hit) in reference.iter().zip(recalled) {
        if hit {
            table.get_mut(&r.speaker).expect("seeded above").recalled += 1;
        }
    }
    table
}

#[derive(Debug, Clone, PartialEq)]
pub struct CharacterScore {
    pub character: CharacterId,
    /// `None` when the character was never predicted.
    pub precision: Option<f64>,
    pub recall: f64,
    pub support: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CharacterPr {
    /// Mean precision over reference characters that were predicted at least once.
    pub ppc: Option<f64>,
    /// Mean recall over all reference characters.
    pub rpc: Option<f64>,
    pub table: Vec<CharacterScore>,
}

/// Averages per-character tallies. Characters absent from the reference are
/// left out of both means.
pub fn summarize_pr(counts: &BTreeMap<CharacterId, PrCounts>) -> CharacterPr {
    let table: Vec<CharacterScore> = counts
        .iter()
        .filter(|(_, c)| c.support > 0)
        .map(|(id, c)| CharacterScore {
            character: id.clone(),
            precision: (c.predicted > 0).then(|| c.true_positive as f64 / c.predicted as f64),
            recall: c.recalled as f64 / c.support as f64,
            support: c.support,
        })
        .collect();
    let mean = |xs: Vec<f64>| (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64);
    CharacterPr {
        ppc: mean(table.iter().filter_map(|s| s.precision).collect()),
        rpc: mean(table.iter().map(|s| s.recall).collect()),
        table,
    }
}

pub fn per_character_pr(hypothesis: &[HypSegment], reference: &[GtSegment]) -> CharacterPr {
    summarize_pr(&pr_counts(hypothesis, reference))
}
