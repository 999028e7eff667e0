use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::types::{GtSegment, HypSegment, Label};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerOptions {
    /// Half-width of the no-score zone around each reference boundary, seconds.
    pub collar: f64,
    /// Score regions where two or more reference speakers talk at once.
    pub include_overlap: bool,
    /// Treat UNKNOWN hypothesis speech as absent (miss) instead of confusion.
    pub unknown_as_miss: bool,
}

impl DerOptions {
    pub fn new(collar: f64, include_overlap: bool) -> Self {
        DerOptions { collar, include_overlap, unknown_as_miss: false }
    }
}

/// Scored durations in seconds.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DerBreakdown {
    pub missed: f64,
    pub false_alarm: f64,
    pub confusion: f64,
    /// Reference speech inside the scored region.
    pub total: f64,
}

impl DerBreakdown {
    pub fn rate(&self) -> f64 {
        (self.missed + self.false_alarm + self.confusion) / self.total
    }

    pub fn add(&mut self, other: &DerBreakdown) {
        self.missed += other.missed;
        self.false_alarm += other.false_alarm;
        self.confusion += other.confusion;
        self.total += other.total;
    }
}

/// Diarisation error with literal identity matching.
///
/// Both sides use character ids, so no speaker mapping is searched. The
/// timeline is cut at every segment and collar boundary and each elementary
/// interval is scored by its reference and hypothesis speaker sets.
pub fn der_breakdown(reference: &[GtSegment], hypothesis: &[HypSegment], options: DerOptions) -> Result<DerBreakdown> {
    if reference.is_empty() {
        return Err(Error::UndefinedMetric("DER needs reference speech"));
    }
    let hyp: Vec<&HypSegment> =
        hypothesis.iter().filter(|h| !(options.unknown_as_miss && h.label.is_unknown())).collect();

    let collar = options.collar;
    let ref_edges: Vec<f64> = reference.iter().flat_map(|r| [r.start, r.end]).collect();
    let mut cuts: Vec<f64> = ref_edges.clone();
    cuts.extend(hyp.iter().flat_map(|h| [h.start, h.end]));
    if collar > 0.0 {
        cuts.extend(ref_edges.iter().flat_map(|&t| [t - collar, t + collar]));
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let mut out = DerBreakdown::default();
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let len = b - a;
        if len <= 0.0 {
            continue;
        }
        let mid = 0.5 * (a + b);
        if collar > 0.0 && ref_edges.iter().any(|&t| (mid - t).abs() < collar) {
            continue;
        }
        let ref_active: BTreeSet<&str> =
            reference.iter().filter(|r| r.start < mid && mid < r.end).map(|r| r.speaker.as_str()).collect();
        if !options.include_overlap && ref_active.len() >= 2 {
            continue;
        }
        let hyp_active: BTreeSet<&Label> =
            hyp.iter().filter(|h| h.start < mid && mid < h.end).map(|h| &h.label).collect();
        let n_ref = ref_active.len();
        let n_hyp = hyp_active.len();
        let correct =
            hyp_active.iter().filter_map(|l| l.character()).filter(|c| ref_active.contains(c.as_str())).count();
        out.total += len * n_ref as f64;
        out.missed += len * n_ref.saturating_sub(n_hyp) as f64;
        out.false_alarm += len * n_hyp.saturating_sub(n_ref) as f64;
        out.confusion += len * (n_ref.min(n_hyp) - correct) as f64;
    }
    if out.total <= 0.0 {
        return Err(Error::UndefinedMetric("no reference speech outside the collars"));
    }
    Ok(out)
}

/// DER as a fraction of scored reference speech.
pub fn der(reference: &[GtSegment], hypothesis: &[HypSegment], options: DerOptions) -> Result<f64> {
    der_breakdown(reference, hypothesis, options).map(|b| b.rate())
}
