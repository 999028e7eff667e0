use crate::error::{Error, Result};
use crate::types::{CastEntry, CharacterId, FaceFrame, SpeechSegment};
use crate::vector::cosine_similarity;

#[derive(Debug, Clone, PartialEq)]
pub struct VisualMatch {
    pub character: CharacterId,
    /// Mean cosine similarity between the segment's frames and the prototype.
    pub score: f64,
}

/// Face frames whose timestamp lies in `[segment.start, segment.end]`.
/// `frames` must be sorted by timestamp.
pub fn faces_in<'a>(frames: &'a [FaceFrame], segment: &SpeechSegment) -> &'a [FaceFrame] {
    let lo = frames.partition_point(|f| f.timestamp < segment.start);
    let hi = frames.partition_point(|f| f.timestamp <= segment.end);
    &frames[lo..hi.max(lo)]
}

/// Names the on-screen character of a segment from its frame embeddings.
///
/// Each cast member scores the mean frame-to-prototype cosine similarity.
/// The best member is returned only if its score exceeds `tau_rec` and no
/// other member ties it.
pub fn classify_character(frames: &[FaceFrame], cast: &[&CastEntry], tau_rec: f64) -> Result<Option<VisualMatch>> {
    if frames.is_empty() || cast.is_empty() {
        return Ok(None);
    }
    let mut best: Option<(usize, f64)> = None;
    let mut tied = false;
    for (idx, entry) in cast.iter().enumerate() {
        let mut total = 0.0;
        for frame in frames {
            if frame.embedding.len() != entry.prototype.len() {
                return Err(Error::DimensionMismatch {
                    expected: entry.prototype.len(),
                    actual: frame.embedding.len(),
                });
            }
            total += cosine_similarity(&frame.embedding, &entry.prototype)?;
        }
        let score = total / frames.len() as f64;
        match best {
            Some((_, b)) if score == b => tied = true,
            Some((_, b)) if score < b => {}
            _ => {
                best = Some((idx, score));
                tied = false;
            }
        }
    }
    Ok(match best {
        Some((idx, score)) if !tied && score > tau_rec => Some(VisualMatch { character: cast[idx].id.clone(), score }),
        _ => None,
    })
}
