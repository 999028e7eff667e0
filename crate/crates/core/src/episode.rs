use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use crate::config::PipelineConfig;
use crate::error::{Error, Result};
use crate::ingest::{self, EpisodeManifest, SentenceRules, VoiceTable};
use crate::types::{FaceFrame, HeatmapFrame, LaughterInterval, SpeechSegment, WordToken};

/// All parsed features of one episode.
#[derive(Debug, Clone, Default)]
pub struct Episode {
    pub episode_id: String,
    pub words: Vec<WordToken>,
    pub segments: Vec<SpeechSegment>,
    pub laughter: Vec<LaughterInterval>,
    pub heatmaps: Vec<HeatmapFrame>,
    pub faces: Vec<FaceFrame>,
    pub voice: VoiceTable,
}

pub(crate) fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| Error::io(path, e))
}

impl Episode {
    /// Parses every feature file named by the manifest. A missing voice file
    /// is an error; use [`Episode::load_without_voice`] before embeddings exist.
    pub fn load(manifest: &EpisodeManifest, config: &PipelineConfig) -> Result<Self> {
        let mut episode = Self::load_without_voice(manifest, config)?;
        let path = manifest.voice.as_ref().ok_or_else(|| {
            Error::Invalid(format!("episode {}: manifest names no voice embeddings file", manifest.episode_id))
        })?;
        episode.voice =
            ingest::parse_voice_embeddings(open(path)?, &path.display().to_string(), config.embedding_dims.voice)?;
        Ok(episode)
    }

    pub fn load_without_voice(manifest: &EpisodeManifest, config: &PipelineConfig) -> Result<Self> {
        manifest.check_dims(config)?;
        let name = |p: &Path| p.display().to_string();
        let words = ingest::parse_words(open(&manifest.words)?, &name(&manifest.words))?;
        let rules = SentenceRules::new(config.max_word_gap, &config.extra_abbreviations);
        let segments = ingest::sentence_segments(&words, &rules);
        Ok(Episode {
            episode_id: manifest.episode_id.clone(),
            segments,
            words,
            laughter: ingest::parse_laughter(open(&manifest.laughter)?, &name(&manifest.laughter))?,
            heatmaps: ingest::parse_heatmaps(open(&manifest.heatmaps)?, &name(&manifest.heatmaps))?,
            faces: ingest::parse_face_embeddings(
                open(&manifest.faces)?,
                &name(&manifest.faces),
                config.embedding_dims.visual,
            )?,
            voice: VoiceTable::new(),
        })
    }
}
