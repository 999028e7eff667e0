//! Evaluation against ground-truth speaker segments.

mod der;
mod segments;
mod wer;

use std::collections::BTreeMap;

use crate::error::Result;
use crate::types::{CharacterId, GtSegment, HypSegment};

pub use der::{der, der_breakdown, DerBreakdown, DerOptions};
pub use segments::{
    accuracy_counts, accuracy_on_overlap, best_match, per_character_pr, pr_counts, summarize_pr, AccuracyCounts,
    CharacterPr, CharacterScore, PrCounts,
};
pub use wer::{normalize_text, wer, word_edits, WerCounts};

/// Series-level results. Rates are percentages; Ppc and Rpc are fractions.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    /// DER with overlapping reference speech excluded.
    pub der: f64,
    /// DER scoring overlapping reference speech too.
    pub der_with_overlap: f64,
    pub accuracy: f64,
    pub ppc: Option<f64>,
    pub rpc: Option<f64>,
    /// `None` when the reference carries no transcript text.
    pub wer: Option<f64>,
    pub characters: Vec<CharacterScore>,
}

/// Sums per-episode tallies so that DER and WER end up duration- and
/// word-weighted and accuracy segment-weighted.
#[derive(Debug, Clone, Default)]
pub struct MetricsAccumulator {
    der: DerBreakdown,
    der_overlap: DerBreakdown,
    accuracy: AccuracyCounts,
    pr: BTreeMap<CharacterId, PrCounts>,
    wer: WerCounts,
}

impl MetricsAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    /// `transcript` is the recognised text of the episode, compared against
    /// the concatenated reference text.
    pub fn add_episode(
        &mut self,
        reference: &[GtSegment],
        hypothesis: &[HypSegment],
        transcript: &str,
        collar: f64,
        unknown_as_miss: bool,
    ) -> Result<()> {
        let opts = |include_overlap| DerOptions { collar, include_overlap, unknown_as_miss };
        self.der.add(&der_breakdown(reference, hypothesis, opts(false))?);
        self.der_overlap.add(&der_breakdown(reference, hypothesis, opts(true))?);
        let acc = accuracy_counts(hypothesis, reference);
        self.accuracy.correct += acc.correct;
        self.accuracy.total += acc.total;
        for (c, counts) in pr_counts(hypothesis, reference) {
            self.pr.entry(c).or_default().add(&counts);
        }
        let reference_text: Vec<&str> = reference.iter().map(|r| r.text.as_str()).collect();
        self.wer.add(&WerCounts::between(&reference_text.join(" "), transcript));
        Ok(())
    }

    pub fn finish(&self) -> Result<MetricsReport> {
        if self.der.total <= 0.0 {
            return Err(crate::error::Error::UndefinedMetric("no episodes evaluated"));
        }
        let pr = summarize_pr(&self.pr);
        Ok(MetricsReport {
            der: 100.0 * self.der.rate(),
            der_with_overlap: 100.0 * self.der_overlap.rate(),
            accuracy: 100.0 * self.accuracy.rate()?,
            ppc: pr.ppc,
            rpc: pr.rpc,
            wer: self.wer.rate().ok().map(|w| 100.0 * w),
            characters: pr.table,
        })
    }
}
