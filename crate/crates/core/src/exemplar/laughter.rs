use crate::types::{overlap, LaughterInterval, SpeechSegment};

/// Drops every segment that overlaps a laughter detection scoring at least
/// `threshold`. Order of the survivors is preserved.
pub fn filter_laughter(
    segments: &[SpeechSegment],
    laughter: &[LaughterInterval],
    threshold: f64,
) -> Vec<SpeechSegment> {
    let loud: Vec<&LaughterInterval> = laughter.iter().filter(|l| l.score >= threshold).collect();
    segments
        .iter()
        .filter(|seg| !loud.iter().any(|l| overlap(seg.start, seg.end, l.start, l.end) > 0.0))
        .cloned()
        .collect()
}
