//! Stage 1: mine high-precision voice exemplars per character.
//!
//! Segments are funnelled through laughter removal, the single-visible-speaker
//! gate, visual character classification and finally k-NN voice filtering
//! pooled over the whole series.

mod heatmap;
mod knn;
mod laughter;
mod visual;

use std::fmt;

use rayon::prelude::*;

use crate::config::PipelineConfig;
use crate::episode::Episode;
use crate::error::{Error, Result};
use crate::types::{CastEntry, ExemplarRecord};

pub use heatmap::{average_heatmap, detect_peaks, frames_in, single_speaker_gate};
pub use knn::knn_filter;
pub use laughter::filter_laughter;
pub use visual::{classify_character, faces_in, VisualMatch};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Stage {
    /// Sentence segments before laughter removal.
    Detected,
    /// After laughter removal; the 100% row of the yield table.
    Vad,
    AvGate,
    Visual,
    AudioFilter,
}

impl Stage {
    pub const ALL: [Stage; 5] = [Stage::Detected, Stage::Vad, Stage::AvGate, Stage::Visual, Stage::AudioFilter];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Detected => "detected",
            Stage::Vad => "vad",
            Stage::AvGate => "av_gate",
            Stage::Visual => "visual",
            Stage::AudioFilter => "audio_filter",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Survivor count of one stage for one episode.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StageEvent {
    pub stage: Stage,
    pub episode: String,
    pub count: usize,
}

impl StageEvent {
    fn emit(stage: Stage, episode: &str, count: usize) -> Self {
        log::info!("stage={stage} episode={episode} count={count}");
        StageEvent { stage, episode: episode.to_string(), count }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StageYield {
    pub detected: usize,
    pub vad: usize,
    pub av_gate: usize,
    pub visual: usize,
    pub audio_filter: usize,
}

impl StageYield {
    /// Totals the stage log.
    pub fn from_events(events: &[StageEvent]) -> Self {
        let mut y = StageYield::default();
        for e in events {
            *y.slot(e.stage) += e.count;
        }
        y
    }

    fn slot(&mut self, stage: Stage) -> &mut usize {
        match stage {
            Stage::Detected => &mut self.detected,
            Stage::Vad => &mut self.vad,
            Stage::AvGate => &mut self.av_gate,
            Stage::Visual => &mut self.visual,
            Stage::AudioFilter => &mut self.audio_filter,
        }
    }

    pub fn count(&self, stage: Stage) -> usize {
        let mut copy = *self;
        *copy.slot(stage)
    }

    /// Share of the post-VAD segment count, in percent.
    pub fn percent(&self, stage: Stage) -> f64 {
        if self.vad == 0 {
            0.0
        } else {
            100.0 * self.count(stage) as f64 / self.vad as f64
        }
    }

    pub fn check_monotone(&self) -> Result<()> {
        for pair in Stage::ALL.windows(2) {
            let (before, after) = (self.count(pair[0]), self.count(pair[1]));
            if after > before {
                return Err(Error::YieldViolation { from: pair[0].name(), before, to: pair[1].name(), after });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct ExemplarSet {
    pub exemplars: Vec<ExemplarRecord>,
    pub events: Vec<StageEvent>,
    pub stage_yield: StageYield,
}

/// Runs laughter removal, the AV gate and visual classification on one
/// episode, returning the labelled candidates and the stage log.
pub fn episode_candidates(
    episode: &Episode,
    cast: &[CastEntry],
    config: &PipelineConfig,
) -> Result<(Vec<ExemplarRecord>, Vec<StageEvent>)> {
    let id = episode.episode_id.as_str();
    let mut events = vec![StageEvent::emit(Stage::Detected, id, episode.segments.len())];

    let voiced = filter_laughter(&episode.segments, &episode.laughter, config.laughter_threshold);
    events.push(StageEvent::emit(Stage::Vad, id, voiced.len()));

    let mut single = Vec::new();
    for seg in voiced {
        let Some(avg) = average_heatmap(&episode.heatmaps, &seg)? else {
            continue;
        };
        let radius = config.nms_radius_for(avg.rows(), avg.cols());
        let peaks = detect_peaks(&avg, config.tau_det, config.peak_count, radius);
        if single_speaker_gate(&peaks) {
            single.push(seg);
        }
    }
    events.push(StageEvent::emit(Stage::AvGate, id, single.len()));

    let present: Vec<&CastEntry> = cast.iter().filter(|c| c.appears_in(id)).collect();
    let mut named = Vec::new();
    for seg in single {
        if let Some(m) = classify_character(faces_in(&episode.faces, &seg), &present, config.tau_rec)? {
            named.push((seg, m.character));
        }
    }
    events.push(StageEvent::emit(Stage::Visual, id, named.len()));

    let missing: Vec<u32> =
        named.iter().filter(|(seg, _)| !episode.voice.contains_key(&seg.id)).map(|(seg, _)| seg.id.0).collect();
    if !missing.is_empty() {
        return Err(Error::MissingEmbeddings { episode: id.to_string(), ids: missing });
    }
    let records = named
        .into_iter()
        .map(|(seg, character)| ExemplarRecord {
            episode_id: id.to_string(),
            segment_id: seg.id,
            character,
            embedding: episode.voice[&seg.id].clone(),
        })
        .collect();
    Ok((records, events))
}

/// Builds the series-wide exemplar set.
///
/// Per-episode steps run in parallel on the current rayon pool; the k-NN
/// filter runs once over the pooled candidates of all episodes.
pub fn build_exemplars(episodes: &[Episode], cast: &[CastEntry], config: &PipelineConfig) -> Result<ExemplarSet> {
    let per_episode = episodes.par_iter().map(|ep| episode_candidates(ep, cast, config)).collect::<Result<Vec<_>>>()?;

    let mut events = Vec::new();
    let mut pooled = Vec::new();
    for (records, ep_events) in per_episode {
        events.extend(ep_events);
        pooled.extend(records);
    }
    let exemplars = knn_filter(&pooled, config.knn_k)?;
    for ep in episodes {
        let kept = exemplars.iter().filter(|r| r.episode_id == ep.episode_id).count();
        events.push(StageEvent::emit(Stage::AudioFilter, &ep.episode_id, kept));
    }

    let stage_yield = StageYield::from_events(&events);
    stage_yield.check_monotone()?;
    Ok(ExemplarSet { exemplars, events, stage_yield })
}
