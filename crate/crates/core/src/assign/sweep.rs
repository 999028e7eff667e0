use std::collections::BTreeSet;
use std::fmt;

use crate::metrics::best_match;
use crate::types::{CharacterId, GtSegment, Label};

/// A segment with its nearest-centroid label, before thresholding.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredSpan {
    pub start: f64,
    pub end: f64,
    /// Nearest character; UNKNOWN only when the bank is empty.
    pub nearest: Label,
    pub distance: f64,
}

#[derive(Debug, Clone, Default)]
pub struct EpisodeScores {
    pub spans: Vec<ScoredSpan>,
    pub truth: Vec<GtSegment>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SegmentClass {
    All,
    /// Segments longer than the long-segment cutoff.
    Long,
}

impl fmt::Display for SegmentClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SegmentClass::All => "all",
            SegmentClass::Long => "long",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub d: f64,
    /// Proportion of classified (non-UNKNOWN) segments.
    pub pocs: f64,
    /// Correct / classified; 1.0 when nothing is classified.
    pub precision: f64,
    pub class: SegmentClass,
}

struct Judged {
    distance: f64,
    correct: bool,
    long: bool,
}

fn judge(episodes: &[EpisodeScores], long_cutoff: f64) -> Vec<Judged> {
    episodes
        .iter()
        .flat_map(|ep| {
            ep.spans.iter().map(|s| {
                let truth = best_match(s.start, s.end, &ep.truth).map(|i| &ep.truth[i].speaker);
                Judged {
                    distance: s.distance,
                    correct: truth.is_some() && s.nearest.character() == truth,
                    long: s.end - s.start > long_cutoff,
                }
            })
        })
        .collect()
}

/// Precision and POCS for every threshold in `grid`, for all segments and for
/// long segments only. The nearest label does not depend on the threshold, so
/// raising `d` can only add classified segments.
pub fn sweep_thresholds(episodes: &[EpisodeScores], grid: &[f64], long_cutoff: f64) -> Vec<CurvePoint> {
    let judged = judge(episodes, long_cutoff);
    let mut out = Vec::with_capacity(grid.len() * 2);
    for class in [SegmentClass::All, SegmentClass::Long] {
        let pool: Vec<&Judged> = judged.iter().filter(|j| class == SegmentClass::All || j.long).collect();
        for &d in grid {
            let classified: Vec<&&Judged> = pool.iter().filter(|j| j.distance <= d).collect();
            let correct = classified.iter().filter(|j| j.correct).count();
            out.push(CurvePoint {
                d,
                pocs: if pool.is_empty() { 0.0 } else { classified.len() as f64 / pool.len() as f64 },
                precision: if classified.is_empty() { 1.0 } else { correct as f64 / classified.len() as f64 },
                class,
            });
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OraclePoint {
    pub pocs: f64,
    pub precision: f64,
    /// Set when nothing is classifiable, so precision is a convention.
    pub precision_undefined: bool,
}

/// Best achievable point: every segment whose true speaker has exemplars is
/// classified correctly; everything else is UNKNOWN.
pub fn oracle_point(
    episodes: &[EpisodeScores],
    covered: &BTreeSet<CharacterId>,
    class: SegmentClass,
    long_cutoff: f64,
) -> OraclePoint {
    let mut total = 0usize;
    let mut classifiable = 0usize;
    for ep in episodes {
        for s in &ep.spans {
            if class == SegmentClass::Long && s.end - s.start <= long_cutoff {
                continue;
            }
            total += 1;
            if let Some(i) = best_match(s.start, s.end, &ep.truth) {
                if covered.contains(&ep.truth[i].speaker) {
                    classifiable += 1;
                }
            }
        }
    }
    OraclePoint {
        pocs: if total == 0 { 0.0 } else { classifiable as f64 / total as f64 },
        precision: 1.0,
        precision_undefined: classifiable == 0,
    }
}
