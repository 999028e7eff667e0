use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::{EmbeddingDims, PipelineConfig};
use crate::error::{Error, Result};

/// Per-episode document naming the feature files. Relative paths resolve
/// against the manifest's own directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EpisodeManifest {
    pub episode_id: String,
    pub series_id: String,
    pub words: PathBuf,
    pub laughter: PathBuf,
    pub heatmaps: PathBuf,
    pub faces: PathBuf,
    /// Written once segments exist; required before exemplar mining.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub voice: Option<PathBuf>,
    /// Speaker-attributed transcript, `NAME: text` per line.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transcript: Option<PathBuf>,
    /// Ground-truth speaker segments.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truth: Option<PathBuf>,
    pub dims: EmbeddingDims,
    pub heatmap_fps: f64,
    /// Feature provenance: model name to version, as declared by adapters.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub models: BTreeMap<String, String>,
}

impl EpisodeManifest {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut manifest: EpisodeManifest = serde_json::from_str(&text)
            .map_err(|e| Error::parse(&path.display().to_string(), e.line(), e.to_string()))?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        manifest.resolve(base);
        Ok(manifest)
    }

    fn resolve(&mut self, base: &Path) {
        let join = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        join(&mut self.words);
        join(&mut self.laughter);
        join(&mut self.heatmaps);
        join(&mut self.faces);
        for p in [&mut self.voice, &mut self.transcript, &mut self.truth].into_iter().flatten() {
            join(p);
        }
    }

    pub fn check_dims(&self, config: &PipelineConfig) -> Result<()> {
        if self.dims != config.embedding_dims {
            return Err(Error::Config(format!(
                "episode {}: manifest dims {:?} differ from configured {:?}",
                self.episode_id, self.dims, config.embedding_dims
            )));
        }
        if self.heatmap_fps.is_nan() || self.heatmap_fps <= 0.0 {
            return Err(Error::Config(format!("episode {}: heatmap_fps must be > 0", self.episode_id)));
        }
        Ok(())
    }
}
