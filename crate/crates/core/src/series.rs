//! The per-series config document: cast, episode manifests, thresholds and
//! transcript speaker aliases in one TOML file.
//!
//! ```toml
//! series_id = "demo"
//! cast = "cast.ndjson"
//! episodes = ["e01/manifest.json", "e02/manifest.json"]
//!
//! [pipeline]
//! unknown_distance = 0.35
//! embedding_dims = { voice = 16, visual = 16 }
//!
//! [aliases]
//! "DOC" = "amy"
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::align::SpeakerAliases;
use crate::config::PipelineConfig;
use crate::episode::open;
use crate::error::{Error, Result};
use crate::ingest::{self, EpisodeManifest};
use crate::types::{CastEntry, CharacterId};

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SeriesFile {
    series_id: String,
    cast: PathBuf,
    episodes: Vec<PathBuf>,
    #[serde(default)]
    pipeline: PipelineConfig,
    #[serde(default)]
    aliases: BTreeMap<String, CharacterId>,
}

#[derive(Debug, Clone)]
pub struct SeriesConfig {
    pub series_id: String,
    /// Absolute or config-relative paths, already resolved.
    pub cast_path: PathBuf,
    pub episode_manifests: Vec<PathBuf>,
    pub pipeline: PipelineConfig,
    /// Extra transcript names, on top of each character's id and display name.
    pub aliases: BTreeMap<String, CharacterId>,
}

impl SeriesConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path.parent().unwrap_or_else(|| Path::new("."))).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// Parses a config whose relative paths resolve against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let file: SeriesFile = toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
        if file.episodes.is_empty() {
            return Err(Error::Config("series lists no episodes".into()));
        }
        let resolve = |p: PathBuf| if p.is_relative() { base.join(p) } else { p };
        Ok(SeriesConfig {
            series_id: file.series_id,
            cast_path: resolve(file.cast),
            episode_manifests: file.episodes.into_iter().map(resolve).collect(),
            pipeline: file.pipeline,
            aliases: file.aliases,
        })
    }

    pub fn load_cast(&self) -> Result<Vec<CastEntry>> {
        ingest::parse_cast(
            open(&self.cast_path)?,
            &self.cast_path.display().to_string(),
            self.pipeline.embedding_dims.visual,
        )
    }

    /// Loads every manifest; episode ids must be unique and series ids must match.
    pub fn manifests(&self) -> Result<Vec<EpisodeManifest>> {
        let mut seen = std::collections::BTreeSet::new();
        let mut out = Vec::new();
        for path in &self.episode_manifests {
            let m = EpisodeManifest::load(path)?;
            if m.series_id != self.series_id {
                return Err(Error::Invalid(format!(
                    "{}: series_id {:?} does not match config {:?}",
                    path.display(),
                    m.series_id,
                    self.series_id
                )));
            }
            if !seen.insert(m.episode_id.clone()) {
                return Err(Error::Invalid(format!("duplicate episode id {}", m.episode_id)));
            }
            out.push(m);
        }
        Ok(out)
    }

    pub fn speaker_aliases(&self, cast: &[CastEntry]) -> Result<SpeakerAliases> {
        let mut table = SpeakerAliases::from_cast(cast);
        for (name, id) in &self.aliases {
            if !cast.iter().any(|c| &c.id == id) {
                return Err(Error::Config(format!("alias {name:?} points at unknown character {id}")));
            }
            table.insert(name, id.clone());
        }
        Ok(table)
    }
}
