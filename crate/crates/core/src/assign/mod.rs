//! Stage 2: nearest-centroid voice classification with an UNKNOWN threshold.

mod sweep;

use std::collections::BTreeMap;

use crate::config::PipelineConfig;
use crate::episode::Episode;
use crate::error::{Error, Result};
use crate::exemplar::filter_laughter;
use crate::types::{Assignment, CharacterId, ExemplarRecord, Label, SegmentId, SpeechSegment};
use crate::vector::{l2_normalize, unit_distance};

pub use sweep::{oracle_point, sweep_thresholds, CurvePoint, EpisodeScores, OraclePoint, ScoredSpan, SegmentClass};

/// Per-character unit-length voice centroids.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CharacterBank {
    centroids: BTreeMap<CharacterId, Vec<f64>>,
    counts: BTreeMap<CharacterId, usize>,
}

impl CharacterBank {
    pub fn is_empty(&self) -> bool {
        self.centroids.is_empty()
    }

    pub fn len(&self) -> usize {
        self.centroids.len()
    }

    pub fn centroid(&self, id: &CharacterId) -> Option<&[f64]> {
        self.centroids.get(id).map(Vec::as_slice)
    }

    pub fn exemplar_count(&self, id: &CharacterId) -> usize {
        self.counts.get(id).copied().unwrap_or(0)
    }

    pub fn characters(&self) -> impl Iterator<Item = &CharacterId> {
        self.centroids.keys()
    }

    pub fn dim(&self) -> Option<usize> {
        self.centroids.values().next().map(Vec::len)
    }

    /// Nearest centroid by cosine distance, ties to the smallest character id.
    /// `None` for an empty bank.
    pub fn nearest(&self, embedding: &[f64]) -> Result<Option<(CharacterId, f64)>> {
        if let Some(dim) = self.dim() {
            if dim != embedding.len() {
                return Err(Error::DimensionMismatch { expected: dim, actual: embedding.len() });
            }
        }
        let unit = l2_normalize(embedding)?;
        let mut best: Option<(&CharacterId, f64)> = None;
        // BTreeMap order plus strict comparison keeps the smallest id on ties.
        for (id, c) in &self.centroids {
            let d = unit_distance(&unit, c);
            if best.is_none_or(|(_, b)| d < b) {
                best = Some((id, d));
            }
        }
        Ok(best.map(|(id, d)| (id.clone(), d)))
    }
}

/// Normalise each exemplar, average per character, renormalise.
///
/// A character whose exemplars cancel out to the zero vector is dropped
/// with a warning.
pub fn build_centroids(exemplars: &[ExemplarRecord]) -> Result<CharacterBank> {
    let mut sums: BTreeMap<CharacterId, (Vec<f64>, usize)> = BTreeMap::new();
    let dim = exemplars.first().map(|e| e.embedding.dim());
    for e in exemplars {
        let expected = dim.expect("non-empty");
        if e.embedding.dim() != expected {
            return Err(Error::DimensionMismatch { expected, actual: e.embedding.dim() });
        }
        let unit = l2_normalize(e.embedding.as_slice())?;
        let (sum, n) = sums.entry(e.character.clone()).or_insert_with(|| (vec![0.0; expected], 0));
        for (s, u) in sum.iter_mut().zip(&unit) {
            *s += u;
        }
        *n += 1;
    }
    let mut bank = CharacterBank::default();
    for (id, (sum, n)) in sums {
        let mean: Vec<f64> = sum.iter().map(|s| s / n as f64).collect();
        match l2_normalize(&mean) {
            Ok(c) if crate::vector::norm(&mean) > 1e-12 => {
                bank.centroids.insert(id.clone(), c);
                bank.counts.insert(id, n);
            }
            _ => log::warn!("dropping {id}: exemplar embeddings cancel to a zero mean"),
        }
    }
    Ok(bank)
}

/// Labels one segment: the nearest character if within `max_distance`,
/// otherwise UNKNOWN. An empty bank gives UNKNOWN at infinite distance.
pub fn assign(segment_id: SegmentId, embedding: &[f64], bank: &CharacterBank, max_distance: f64) -> Result<Assignment> {
    let (label, distance) = match bank.nearest(embedding)? {
        Some((id, d)) if d <= max_distance => (Label::Character(id), d),
        Some((_, d)) => (Label::Unknown, d),
        None => (Label::Unknown, f64::INFINITY),
    };
    Ok(Assignment { segment_id, label, distance })
}

/// Segments eligible for assignment: all sentence segments minus those
/// removed as laughter.
pub fn assignable_segments(episode: &Episode, config: &PipelineConfig) -> Vec<SpeechSegment> {
    filter_laughter(&episode.segments, &episode.laughter, config.laughter_threshold)
}

/// Assigns every non-laughter segment of the episode, in segment order.
pub fn assign_episode(episode: &Episode, bank: &CharacterBank, config: &PipelineConfig) -> Result<Vec<Assignment>> {
    assign_segments(episode, &assignable_segments(episode, config), bank, config.unknown_distance)
}

pub(crate) fn assign_segments(
    episode: &Episode,
    segments: &[SpeechSegment],
    bank: &CharacterBank,
    max_distance: f64,
) -> Result<Vec<Assignment>> {
    let missing: Vec<u32> = segments.iter().filter(|s| !episode.voice.contains_key(&s.id)).map(|s| s.id.0).collect();
    if !missing.is_empty() {
        return Err(Error::MissingEmbeddings { episode: episode.episode_id.clone(), ids: missing });
    }
    segments.iter().map(|s| assign(s.id, episode.voice[&s.id].as_slice(), bank, max_distance)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::VoiceEmbedding;
    use proptest::prelude::*;

    fn ex(id: u32, who: &str, v: Vec<f64>) -> ExemplarRecord {
        ExemplarRecord {
            episode_id: "e".into(),
            segment_id: SegmentId(id),
            character: CharacterId::new(who),
            embedding: VoiceEmbedding::new(v).unwrap(),
        }
    }

    fn unit(deg: f64) -> Vec<f64> {
        let r = deg.to_radians();
        vec![r.cos(), r.sin()]
    }

    #[test]
    fn single_exemplar_centroid_is_normalised() {
        let bank = build_centroids(&[ex(0, "a", vec![3.0, 4.0])]).unwrap();
        assert_eq!(bank.centroid(&"a".into()).unwrap(), &[0.6, 0.8]);
        assert_eq!(bank.exemplar_count(&"a".into()), 1);
    }

    #[test]
    fn identical_exemplars() {
        let bank = build_centroids(&[ex(0, "a", vec![1.0, 2.0, 2.0]), ex(1, "a", vec![1.0, 2.0, 2.0])]).unwrap();
        let c = bank.centroid(&"a".into()).unwrap();
        assert!((crate::vector::norm(c) - 1.0).abs() < 1e-12);
        assert!((c[0] - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn three_unit_vectors_average_to_middle_angle() {
        // Mean of unit vectors at 0°, 10°, 20° points at 10° by symmetry.
        let bank = build_centroids(&[ex(0, "a", unit(0.0)), ex(1, "a", unit(10.0)), ex(2, "a", unit(20.0))]).unwrap();
        let c = bank.centroid(&"a".into()).unwrap();
        let angle = c[1].atan2(c[0]).to_degrees();
        assert!((angle - 10.0).abs() < 1e-6);
    }

    #[test]
    fn antipodal_exemplars_drop_character() {
        let bank =
            build_centroids(&[ex(0, "a", vec![1.0, 0.0]), ex(1, "a", vec![-1.0, 0.0]), ex(2, "b", vec![0.0, 1.0])])
                .unwrap();
        assert_eq!(bank.len(), 1);
        assert!(bank.centroid(&"a".into()).is_none());
    }

    #[test]
    fn embedding_on_centroid() {
        let bank = build_centroids(&[ex(0, "a", unit(30.0)), ex(1, "b", unit(120.0))]).unwrap();
        let a = assign(SegmentId(9), &unit(30.0), &bank, 0.4).unwrap();
        assert_eq!(a.label, Label::Character("a".into()));
        assert!(a.distance.abs() < 1e-12);
        assert_eq!(a.segment_id, SegmentId(9));
    }

    #[test]
    fn far_from_everything_is_unknown() {
        let bank = build_centroids(&[ex(0, "a", vec![1.0, 0.0, 0.0])]).unwrap();
        // cos = 0.1 → distance 0.9
        let v = vec![0.1, (1.0f64 - 0.01).sqrt(), 0.0];
        let a = assign(SegmentId(0), &v, &bank, 0.4).unwrap();
        assert_eq!(a.label, Label::Unknown);
        assert!((a.distance - 0.9).abs() < 1e-12);
    }

    #[test]
    fn equidistant_goes_to_smaller_id() {
        let bank = build_centroids(&[ex(0, "zed", unit(45.0)), ex(1, "amy", unit(-45.0))]).unwrap();
        let a = assign(SegmentId(0), &unit(0.0), &bank, 1.0).unwrap();
        assert_eq!(a.label, Label::Character("amy".into()));
    }

    #[test]
    fn empty_bank_is_unknown_at_infinity() {
        let a = assign(SegmentId(0), &[1.0, 0.0], &CharacterBank::default(), 2.0).unwrap();
        assert_eq!(a.label, Label::Unknown);
        assert_eq!(a.distance, f64::INFINITY);
    }

    #[test]
    fn zero_embedding_and_wrong_dim_error() {
        let bank = build_centroids(&[ex(0, "a", vec![1.0, 0.0])]).unwrap();
        assert!(assign(SegmentId(0), &[0.0, 0.0], &bank, 0.4).is_err());
        assert!(assign(SegmentId(0), &[1.0, 0.0, 0.0], &bank, 0.4).is_err());
    }

    proptest! {
        #[test]
        fn label_is_scale_invariant(
            v in prop::collection::vec(-1.0f64..1.0, 3),
            scale in 0.001f64..1000.0,
            d in 0.0f64..2.0,
        ) {
            prop_assume!(crate::vector::norm(&v) > 1e-3);
            let bank = build_centroids(&[
                ex(0, "a", vec![1.0, 0.0, 0.0]),
                ex(1, "b", vec![0.0, 1.0, 0.0]),
                ex(2, "c", vec![0.0, 0.2, -1.0]),
            ]).unwrap();
            let scaled: Vec<f64> = v.iter().map(|x| x * scale).collect();
            let a = assign(SegmentId(0), &v, &bank, d).unwrap();
            let b = assign(SegmentId(0), &scaled, &bank, d).unwrap();
            prop_assert!((a.distance - b.distance).abs() < 1e-9);
            if (a.distance - d).abs() > 1e-9 {
                prop_assert_eq!(a.label, b.label);
            }
        }
    }
}
