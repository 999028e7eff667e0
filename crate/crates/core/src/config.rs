use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmbeddingDims {
    pub voice: usize,
    pub visual: usize,
}

impl Default for EmbeddingDims {
    fn default() -> Self {
        // ECAPA-TDNN speaker vectors and CLIP image-tower vectors.
        EmbeddingDims { voice: 192, visual: 512 }
    }
}

/// Thresholds and knobs for every pipeline stage.
///
/// Deserialising an empty document yields [`PipelineConfig::default`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Laughter detections at or above this score remove overlapping segments.
    pub laughter_threshold: f64,
    /// A heatmap peak counts only if strictly larger than this.
    pub tau_det: f64,
    /// Maximum number of peaks accepted by non-maximum suppression.
    pub peak_count: usize,
    /// Suppression radius in grid cells; `None` derives it from the grid size.
    pub nms_radius: Option<usize>,
    /// Minimum mean cosine similarity for a visual character match.
    pub tau_rec: f64,
    pub knn_k: usize,
    /// Cosine distance above which a segment is labelled UNKNOWN.
    pub unknown_distance: f64,
    pub der_collar: f64,
    pub long_segment_cutoff: f64,
    pub embedding_dims: EmbeddingDims,
    /// A silence longer than this between consecutive words closes a sentence.
    pub max_word_gap: f64,
    /// Added to the built-in abbreviation list of the sentence splitter.
    pub extra_abbreviations: Vec<String>,
    /// Score UNKNOWN hypothesis speech as missed speech instead of confusion.
    pub unknown_as_miss: bool,
    pub sweep_points: usize,
    pub sweep_max_distance: f64,
    /// Emit WebVTT `<v Name>` spans instead of `NAME:` prefixes.
    pub vtt_voice_spans: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            laughter_threshold: 0.8,
            tau_det: 0.7,
            peak_count: 4,
            nms_radius: None,
            tau_rec: 0.85,
            knn_k: 5,
            unknown_distance: 0.4,
            der_collar: 0.25,
            long_segment_cutoff: 2.0,
            embedding_dims: EmbeddingDims::default(),
            max_word_gap: 3.0,
            extra_abbreviations: Vec::new(),
            unknown_as_miss: false,
            sweep_points: 50,
            sweep_max_distance: 2.0,
            vtt_voice_spans: false,
        }
    }
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: PipelineConfig = toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |name: &str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must be in [0, 1], got {v}")))
            }
        };
        let non_negative = |name: &str, v: f64| {
            if v >= 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must be finite and >= 0, got {v}")))
            }
        };
        unit("laughter_threshold", self.laughter_threshold)?;
        unit("tau_det", self.tau_det)?;
        if !(-1.0..=1.0).contains(&self.tau_rec) {
            return Err(Error::Config(format!("tau_rec must be in [-1, 1], got {}", self.tau_rec)));
        }
        non_negative("unknown_distance", self.unknown_distance)?;
        non_negative("der_collar", self.der_collar)?;
        non_negative("long_segment_cutoff", self.long_segment_cutoff)?;
        non_negative("max_word_gap", self.max_word_gap)?;
        non_negative("sweep_max_distance", self.sweep_max_distance)?;
        if self.knn_k == 0 {
            return Err(Error::Config("knn_k must be >= 1".into()));
        }
        if self.peak_count == 0 {
            return Err(Error::Config("peak_count must be >= 1".into()));
        }
        if self.sweep_points < 2 {
            return Err(Error::Config("sweep_points must be >= 2".into()));
        }
        if self.embedding_dims.voice == 0 || self.embedding_dims.visual == 0 {
            return Err(Error::Config("embedding dimensions must be >= 1".into()));
        }
        Ok(())
    }

    /// Suppression radius for a grid of the given shape.
    pub fn nms_radius_for(&self, rows: usize, cols: usize) -> usize {
        self.nms_radius.unwrap_or_else(|| (rows.min(cols) / 8).max(1))
    }

    /// Evenly spaced unknown-distance thresholds from 0 to `sweep_max_distance`.
    pub fn sweep_grid(&self) -> Vec<f64> {
        let n = self.sweep_points;
        (0..n).map(|i| self.sweep_max_distance * i as f64 / (n - 1) as f64).collect()
    }
}
