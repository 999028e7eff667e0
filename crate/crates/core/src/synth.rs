//! Synthetic series with planted ground truth.
//!
//! Every quantity the pipeline observes is drawn from a known generative
//! story: each segment has one true speaker, a voice vector scattered around
//! that speaker's center, a heatmap with zero, one or two planted peaks and
//! face frames near the speaker's prototype when on screen. The generator's
//! truth is therefore an oracle for every stage.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::seq::index::sample;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::config::{EmbeddingDims, PipelineConfig};
use crate::episode::Episode;
use crate::error::{Error, Result};
use crate::ingest::{self, EpisodeManifest, SentenceRules, VoiceTable};
use crate::output::write_atomic;
use crate::types::{
    CastEntry, CharacterId, ExemplarRecord, FaceFrame, Grid, GtSegment, HeatmapFrame, LaughterInterval, SegmentId,
    WordToken,
};
use crate::vector::l2_normalize;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub seed: u64,
    pub series_id: String,
    pub n_characters: usize,
    pub n_episodes: usize,
    pub segments_per_episode: usize,
    pub voice_dim: usize,
    pub visual_dim: usize,
    /// Per-coordinate Gaussian noise added to the voice center before normalising.
    pub sigma_v: f64,
    /// Same for face frames around the character prototype.
    pub sigma_f: f64,
    pub grid_rows: usize,
    pub grid_cols: usize,
    pub heatmap_fps: f64,
    /// Background heatmap values are uniform in `[0, heatmap_noise]`.
    pub heatmap_noise: f64,
    pub multi_speaker_fraction: f64,
    pub offscreen_fraction: f64,
    pub laughter_fraction: f64,
    /// Share of characters that are never seen on screen, so never get exemplars.
    pub exemplarless_fraction: f64,
    /// Share of segments shorter than two seconds.
    pub short_fraction: f64,
    /// Voice noise on short segments is `sigma_v` times this.
    pub short_noise_multiplier: f64,
    /// Share of ASR words replaced by a different word.
    pub asr_error_fraction: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig::easy(0)
    }
}

impl SynthConfig {
    /// Well separated voices, everyone on screen, no laughter.
    pub fn easy(seed: u64) -> Self {
        SynthConfig {
            seed,
            series_id: "synth".into(),
            n_characters: 8,
            n_episodes: 3,
            segments_per_episode: 200,
            voice_dim: 16,
            visual_dim: 16,
            sigma_v: 0.05,
            sigma_f: 0.05,
            grid_rows: 12,
            grid_cols: 12,
            heatmap_fps: 4.0,
            heatmap_noise: 0.3,
            multi_speaker_fraction: 0.0,
            offscreen_fraction: 0.0,
            laughter_fraction: 0.0,
            exemplarless_fraction: 0.0,
            short_fraction: 0.0,
            short_noise_multiplier: 1.0,
            asr_error_fraction: 0.0,
        }
    }

    /// Every difficulty knob turned on, with extra voice noise on short segments.
    pub fn noisy(seed: u64) -> Self {
        SynthConfig {
            sigma_v: 0.15,
            sigma_f: 0.1,
            multi_speaker_fraction: 0.15,
            offscreen_fraction: 0.3,
            laughter_fraction: 0.05,
            exemplarless_fraction: 0.125,
            short_fraction: 0.3,
            short_noise_multiplier: 3.0,
            asr_error_fraction: 0.02,
            ..SynthConfig::easy(seed)
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let config: SynthConfig = toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        for (name, v) in [
            ("multi_speaker_fraction", self.multi_speaker_fraction),
            ("offscreen_fraction", self.offscreen_fraction),
            ("laughter_fraction", self.laughter_fraction),
            ("exemplarless_fraction", self.exemplarless_fraction),
            ("short_fraction", self.short_fraction),
            ("asr_error_fraction", self.asr_error_fraction),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return bad(format!("{name} must be in [0, 1], got {v}"));
            }
        }
        for (name, v) in [
            ("sigma_v", self.sigma_v),
            ("sigma_f", self.sigma_f),
            ("short_noise_multiplier", self.short_noise_multiplier),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return bad(format!("{name} must be finite and >= 0, got {v}"));
            }
        }
        if self.multi_speaker_fraction + self.offscreen_fraction > 1.0 {
            return bad("multi_speaker_fraction + offscreen_fraction exceeds 1".into());
        }
        if self.n_characters == 0 || self.n_episodes == 0 || self.segments_per_episode == 0 {
            return bad("n_characters, n_episodes and segments_per_episode must be >= 1".into());
        }
        if self.exemplarless_count() > self.n_characters {
            return bad("more exemplar-less characters than characters".into());
        }
        if self.voice_dim < 2 || self.visual_dim < 2 {
            return bad("embedding dimensions must be >= 2".into());
        }
        if self.grid_rows < 3 || self.grid_cols < 3 {
            return bad("heatmap grid must be at least 3x3".into());
        }
        if !(self.heatmap_fps.is_finite() && self.heatmap_fps > 0.0) {
            return bad("heatmap_fps must be > 0".into());
        }
        if !(0.0..=0.5).contains(&self.heatmap_noise) {
            return bad("heatmap_noise must be in [0, 0.5]".into());
        }
        if self.series_id.trim().is_empty() {
            return bad("series_id must not be empty".into());
        }
        Ok(())
    }

    pub fn exemplarless_count(&self) -> usize {
        (self.exemplarless_fraction * self.n_characters as f64).round() as usize
    }

    pub fn embedding_dims(&self) -> EmbeddingDims {
        EmbeddingDims { voice: self.voice_dim, visual: self.visual_dim }
    }

    /// Pipeline defaults with this corpus's embedding dimensions.
    pub fn pipeline_config(&self) -> PipelineConfig {
        PipelineConfig { embedding_dims: self.embedding_dims(), ..PipelineConfig::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Visibility {
    /// The speaker alone is visible: one planted peak.
    OnScreen,
    /// Two visible faces: two planted peaks.
    MultiSpeaker,
    /// Nobody visible: no peak, unrelated faces.
    OffScreen,
}

/// What the generator decided for one segment.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantedSegment {
    pub id: SegmentId,
    pub speaker: CharacterId,
    pub visibility: Visibility,
    pub start: f64,
    pub end: f64,
    pub short: bool,
    pub laughter: bool,
    /// Planted `(row, col)` peak cells.
    pub peaks: Vec<(usize, usize)>,
}

#[derive(Debug, Clone)]
pub struct SynthEpisode {
    pub episode_id: String,
    pub words: Vec<WordToken>,
    pub laughter: Vec<LaughterInterval>,
    pub heatmaps: Vec<HeatmapFrame>,
    pub faces: Vec<FaceFrame>,
    pub voice: VoiceTable,
    pub transcript: String,
    pub truth: Vec<GtSegment>,
    pub planted: Vec<PlantedSegment>,
}

impl SynthEpisode {
    /// The episode as the pipeline would load it from disk.
    pub fn to_episode(&self, config: &PipelineConfig) -> Episode {
        let rules = SentenceRules::new(config.max_word_gap, &config.extra_abbreviations);
        Episode {
            episode_id: self.episode_id.clone(),
            segments: ingest::sentence_segments(&self.words, &rules),
            words: self.words.clone(),
            laughter: self.laughter.clone(),
            heatmaps: self.heatmaps.clone(),
            faces: self.faces.clone(),
            voice: self.voice.clone(),
        }
    }

    pub fn true_speaker(&self, id: SegmentId) -> Option<&CharacterId> {
        self.planted.get(id.0 as usize).map(|p| &p.speaker)
    }
}

#[derive(Debug, Clone)]
pub struct SynthCorpus {
    pub config: SynthConfig,
    pub cast: Vec<CastEntry>,
    pub voice_centers: BTreeMap<CharacterId, Vec<f64>>,
    /// Characters never on screen.
    pub exemplarless: BTreeSet<CharacterId>,
    pub episodes: Vec<SynthEpisode>,
}

impl SynthCorpus {
    pub fn episodes(&self, config: &PipelineConfig) -> Vec<Episode> {
        self.episodes.iter().map(|e| e.to_episode(config)).collect()
    }

    pub fn true_speaker(&self, episode_id: &str, id: SegmentId) -> Option<&CharacterId> {
        self.episodes.iter().find(|e| e.episode_id == episode_id).and_then(|e| e.true_speaker(id))
    }

    /// Writes the corpus under `dir` and returns the series config path.
    ///
    /// Layout: `series.toml`, `cast.ndjson` and one directory per episode
    /// holding its manifest and feature files.
    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut buf = Vec::new();
        ingest::write_cast(&mut buf, &self.cast).map_err(|e| Error::io(dir.join("cast.ndjson"), e))?;
        write_atomic(&dir.join("cast.ndjson"), &buf)?;

        let mut series = String::new();
        let _ = writeln!(series, "series_id = {:?}", self.config.series_id);
        let _ = writeln!(series, "cast = \"cast.ndjson\"");
        let _ = writeln!(series, "episodes = [");
        for ep in &self.episodes {
            let _ = writeln!(series, "    \"{}/manifest.json\",", ep.episode_id);
        }
        let _ = writeln!(series, "]\n\n[pipeline]");
        let _ = writeln!(
            series,
            "embedding_dims = {{ voice = {}, visual = {} }}",
            self.config.voice_dim, self.config.visual_dim
        );
        write_atomic(&dir.join("series.toml"), series.as_bytes())?;

        for ep in &self.episodes {
            let ep_dir = dir.join(&ep.episode_id);
            std::fs::create_dir_all(&ep_dir).map_err(|e| Error::io(&ep_dir, e))?;
            let file = |name: &str, f: &dyn Fn(&mut Vec<u8>) -> std::io::Result<()>| -> Result<()> {
                let path = ep_dir.join(name);
                let mut buf = Vec::new();
                f(&mut buf).map_err(|e| Error::io(&path, e))?;
                write_atomic(&path, &buf)
            };
            file("words.ndjson", &|b| ingest::write_words(b, &ep.words))?;
            file("laughter.ndjson", &|b| ingest::write_laughter(b, &ep.laughter))?;
            file("heatmaps.ndjson", &|b| ingest::write_heatmaps(b, &ep.heatmaps))?;
            file("faces.ndjson", &|b| ingest::write_face_embeddings(b, &ep.faces))?;
            file("voice.ndjson", &|b| ingest::write_voice_embeddings(b, &ep.voice))?;
            file("truth.ndjson", &|b| ingest::write_truth(b, &ep.truth))?;
            write_atomic(&ep_dir.join("transcript.txt"), ep.transcript.as_bytes())?;

            let manifest = EpisodeManifest {
                episode_id: ep.episode_id.clone(),
                series_id: self.config.series_id.clone(),
                words: "words.ndjson".into(),
                laughter: "laughter.ndjson".into(),
                heatmaps: "heatmaps.ndjson".into(),
                faces: "faces.ndjson".into(),
                voice: Some("voice.ndjson".into()),
                transcript: Some("transcript.txt".into()),
                truth: Some("truth.ndjson".into()),
                dims: self.config.embedding_dims(),
                heatmap_fps: self.config.heatmap_fps,
                models: [("features".to_string(), format!("castline-synth {}", env!("CARGO_PKG_VERSION")))].into(),
            };
            let mut json = serde_json::to_string_pretty(&manifest).expect("manifest serialises");
            json.push('\n');
            write_atomic(&ep_dir.join("manifest.json"), json.as_bytes())?;
        }
        Ok(dir.join("series.toml"))
    }
}

const NAMES: [&str; 16] = [
    "Amy", "Ben", "Cleo", "Dev", "Ezra", "Faye", "Gus", "Hana", "Ivo", "Jade", "Kit", "Lena", "Milo", "Nora", "Otto",
    "Pia",
];

const WORDS: [&str; 48] = [
    "the",
    "coffee",
    "is",
    "cold",
    "again",
    "we",
    "should",
    "talk",
    "about",
    "this",
    "apartment",
    "never",
    "said",
    "that",
    "you",
    "always",
    "know",
    "what",
    "i",
    "mean",
    "don't",
    "worry",
    "it's",
    "fine",
    "really",
    "maybe",
    "later",
    "tonight",
    "dinner",
    "with",
    "my",
    "parents",
    "can't",
    "believe",
    "he",
    "did",
    "it",
    "she",
    "left",
    "her",
    "keys",
    "at",
    "work",
    "so",
    "weird",
    "okay",
    "listen",
    "wait",
];

const TITLES: [&str; 3] = ["Mr.", "Dr.", "Mrs."];
const TERMINALS: [&str; 3] = [".", "?", "!"];

/// Gaussian blob width in cells; keeps neighbours of a full peak near 0.25.
const BLOB_SIGMA: f64 = 0.6;

fn q(x: f64, scale: f64) -> f64 {
    (x * scale).round() / scale
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

fn random_unit(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| gaussian(rng)).collect();
        if let Ok(u) = l2_normalize(&v) {
            return u;
        }
    }
}

/// `normalize(center + N(0, sigma))`, rounded to 6 decimals.
fn perturb(rng: &mut ChaCha8Rng, center: &[f64], sigma: f64) -> Vec<f64> {
    loop {
        let v: Vec<f64> = center.iter().map(|c| c + sigma * gaussian(rng)).collect();
        if let Ok(u) = l2_normalize(&v) {
            return u.into_iter().map(|x| q(x, 1e6)).collect();
        }
    }
}

/// A heatmap with Gaussian blobs of the given amplitude at each `(row, col)`
/// over uniform background noise. Values are rounded to 3 decimals.
pub fn plant_heatmap(rows: usize, cols: usize, peaks: &[(usize, usize, f64)], noise: f64, rng: &mut impl Rng) -> Grid {
    let mut values = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            let bg = if noise > 0.0 { rng.gen::<f64>() * noise } else { 0.0 };
            let blob = peaks
                .iter()
                .map(|&(pr, pc, amp)| {
                    let d2 = (r as f64 - pr as f64).powi(2) + (c as f64 - pc as f64).powi(2);
                    amp * (-d2 / (2.0 * BLOB_SIGMA * BLOB_SIGMA)).exp()
                })
                .fold(0.0, f64::max);
            values.push(q(bg.max(blob).clamp(0.0, 1.0), 1e3));
        }
    }
    Grid::new(rows, cols, values).expect("values in [0, 1]")
}

fn random_cell(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> (usize, usize) {
    (rng.gen_range(0..rows), rng.gen_range(0..cols))
}

fn plant_peaks(rng: &mut ChaCha8Rng, config: &SynthConfig, visibility: Visibility) -> Vec<(usize, usize)> {
    let (rows, cols) = (config.grid_rows, config.grid_cols);
    match visibility {
        Visibility::OffScreen => Vec::new(),
        Visibility::OnScreen => vec![random_cell(rng, rows, cols)],
        Visibility::MultiSpeaker => {
            // Far enough apart that suppression at the default radius keeps both.
            let radius = (rows.min(cols) / 8).max(1);
            let a = random_cell(rng, rows, cols);
            loop {
                let b = random_cell(rng, rows, cols);
                if a.0.abs_diff(b.0).max(a.1.abs_diff(b.1)) > radius + 1 {
                    return vec![a, b];
                }
            }
        }
    }
}

fn sentence(rng: &mut ChaCha8Rng, n_words: usize) -> Vec<String> {
    let mut words = Vec::with_capacity(n_words);
    for i in 0..n_words {
        let last = i + 1 == n_words;
        let mut w = if !last && i > 0 && rng.gen_bool(0.04) {
            TITLES[rng.gen_range(0..TITLES.len())].to_string()
        } else {
            WORDS[rng.gen_range(0..WORDS.len())].to_string()
        };
        if i == 0 {
            let mut chars = w.chars();
            w = chars.next().map(|c| c.to_uppercase().chain(chars).collect()).unwrap_or(w);
        }
        if last {
            w.push_str(TERMINALS[rng.gen_range(0..TERMINALS.len())]);
        } else if !w.ends_with('.') && rng.gen_bool(0.08) {
            w.push(',');
        }
        words.push(w);
    }
    words
}

/// Replaces the letters of a word, keeping trailing punctuation so sentence
/// boundaries survive.
fn misrecognise(rng: &mut ChaCha8Rng, word: &str) -> String {
    let core_len = word.trim_end_matches(|c: char| !c.is_alphanumeric()).len();
    let tail = &word[core_len..];
    loop {
        let candidate = WORDS[rng.gen_range(0..WORDS.len())];
        if !word.to_lowercase().starts_with(candidate) {
            return format!("{candidate}{tail}");
        }
    }
}

fn make_cast(rng: &mut ChaCha8Rng, config: &SynthConfig, episode_ids: &[String]) -> Vec<CastEntry> {
    (0..config.n_characters)
        .map(|i| {
            let name = if i < NAMES.len() {
                NAMES[i].to_string()
            } else {
                format!("{}{}", NAMES[i % NAMES.len()], i / NAMES.len() + 1)
            };
            CastEntry {
                id: CharacterId::new(name.to_lowercase()),
                aliases: Vec::new(),
                display_name: name,
                prototype: random_unit(rng, config.visual_dim).into_iter().map(|x| q(x, 1e6)).collect(),
                episodes: episode_ids.iter().cloned().collect(),
            }
        })
        .collect()
}

pub fn generate(config: &SynthConfig) -> Result<SynthCorpus> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let episode_ids: Vec<String> = (1..=config.n_episodes).map(|i| format!("e{i:02}")).collect();
    let cast = make_cast(&mut rng, config, &episode_ids);
    let voice_centers: BTreeMap<CharacterId, Vec<f64>> =
        cast.iter().map(|c| (c.id.clone(), random_unit(&mut rng, config.voice_dim))).collect();
    let exemplarless: BTreeSet<CharacterId> =
        cast.iter().rev().take(config.exemplarless_count()).map(|c| c.id.clone()).collect();

    let episodes = episode_ids
        .iter()
        .map(|id| generate_episode(&mut rng, config, id, &cast, &voice_centers, &exemplarless))
        .collect();
    Ok(SynthCorpus { config: config.clone(), cast, voice_centers, exemplarless, episodes })
}

fn generate_episode(
    rng: &mut ChaCha8Rng,
    config: &SynthConfig,
    episode_id: &str,
    cast: &[CastEntry],
    voice_centers: &BTreeMap<CharacterId, Vec<f64>>,
    exemplarless: &BTreeSet<CharacterId>,
) -> SynthEpisode {
    let mut words = Vec::new();
    let mut laughter = Vec::new();
    let mut voice = VoiceTable::new();
    let mut truth = Vec::new();
    let mut planted = Vec::new();
    let mut lines: Vec<(usize, String)> = Vec::new();
    let mut amplitudes: Vec<Vec<f64>> = Vec::new();

    let mut t = 0.5;
    for k in 0..config.segments_per_episode {
        let who = rng.gen_range(0..cast.len());
        let speaker = &cast[who].id;
        let short = rng.gen_bool(config.short_fraction);
        // Long segments last > 2.3 s, short ones < 1.8 s.
        let n_words = if short { rng.gen_range(2..=4) } else { rng.gen_range(8..=14) };
        let visibility = if exemplarless.contains(speaker) {
            Visibility::OffScreen
        } else {
            let u: f64 = rng.gen();
            if u < config.multi_speaker_fraction {
                Visibility::MultiSpeaker
            } else if u < config.multi_speaker_fraction + config.offscreen_fraction {
                Visibility::OffScreen
            } else {
                Visibility::OnScreen
            }
        };

        let spoken = sentence(rng, n_words);
        let start = q(t, 1e3);
        for w in &spoken {
            let dur = rng.gen_range(0.25..0.4);
            let garbled = rng.gen_bool(config.asr_error_fraction) && !TITLES.contains(&w.as_str());
            let text = if garbled { misrecognise(rng, w) } else { w.clone() };
            let ws = q(t, 1e3);
            let we = q(t + dur, 1e3);
            words.push(WordToken::new(text, ws, we));
            t = we + 0.05;
        }
        let end = words.last().expect("n_words >= 2").end;
        let gap = rng.gen_range(0.6..1.5);

        let laughs = rng.gen_bool(config.laughter_fraction);
        if laughs {
            laughter.push(LaughterInterval {
                start: q(start + 0.5 * (end - start), 1e3),
                end: q(end + 0.25 * gap, 1e3),
                score: q(rng.gen_range(0.85..1.0), 1e3),
            });
        } else if rng.gen_bool(config.laughter_fraction / 2.0) {
            // Below-threshold detections must not remove anything.
            laughter.push(LaughterInterval {
                start: q(start, 1e3),
                end: q(end, 1e3),
                score: q(rng.gen_range(0.2..0.7), 1e3),
            });
        }

        let sigma = if short { config.sigma_v * config.short_noise_multiplier } else { config.sigma_v };
        let id = SegmentId(k as u32);
        let v = perturb(rng, &voice_centers[speaker], sigma);
        voice.insert(id, crate::types::VoiceEmbedding::new(v).expect("finite"));

        let peaks = plant_peaks(rng, config, visibility);
        amplitudes.push(peaks.iter().map(|_| q(rng.gen_range(0.85..1.0), 1e3)).collect());

        let text = spoken.join(" ");
        match lines.last_mut() {
            Some((prev, line)) if *prev == who => {
                line.push(' ');
                line.push_str(&text);
            }
            _ => lines.push((who, text.clone())),
        }
        truth.push(GtSegment { start, end, speaker: speaker.clone(), text });
        planted.push(PlantedSegment {
            id,
            speaker: speaker.clone(),
            visibility,
            start,
            end,
            short,
            laughter: laughs,
            peaks,
        });
        t = end + gap;
    }

    // Frames on a fixed clock; only those inside a segment are written.
    let (mut heatmaps, mut faces) = (Vec::new(), Vec::new());
    let mut seg = 0;
    let mut frame = 0u64;
    loop {
        let ts = frame as f64 / config.heatmap_fps;
        frame += 1;
        while seg < planted.len() && planted[seg].end < ts {
            seg += 1;
        }
        let Some(p) = planted.get(seg) else { break };
        if ts < p.start {
            continue;
        }
        let peaks: Vec<(usize, usize, f64)> =
            p.peaks.iter().zip(&amplitudes[seg]).map(|(&(r, c), &a)| (r, c, a)).collect();
        heatmaps.push(HeatmapFrame {
            timestamp: ts,
            grid: plant_heatmap(config.grid_rows, config.grid_cols, &peaks, config.heatmap_noise, rng),
        });
        let who = cast.iter().find(|c| c.id == p.speaker).expect("speaker in cast");
        let embedding = match p.visibility {
            Visibility::OffScreen => random_unit(rng, config.visual_dim).into_iter().map(|x| q(x, 1e6)).collect(),
            _ => perturb(rng, &who.prototype, config.sigma_f),
        };
        faces.push(FaceFrame { timestamp: ts, embedding });
    }

    let mut transcript = String::new();
    for (who, line) in &lines {
        let _ = writeln!(transcript, "{}: {}", cast[*who].display_name.to_uppercase(), line);
    }
    SynthEpisode {
        episode_id: episode_id.to_string(),
        words,
        laughter,
        heatmaps,
        faces,
        voice,
        transcript,
        truth,
        planted,
    }
}

/// Relabels `round(fraction * n)` records to a different character drawn
/// uniformly from `characters`. Returns the indices that were changed.
pub fn inject_mislabels(
    records: &mut [ExemplarRecord],
    fraction: f64,
    characters: &[CharacterId],
    rng: &mut impl Rng,
) -> Vec<usize> {
    let n = ((fraction.clamp(0.0, 1.0) * records.len() as f64).round() as usize).min(records.len());
    if characters.len() < 2 {
        return Vec::new();
    }
    let mut picked = sample(rng, records.len(), n).into_vec();
    picked.sort_unstable();
    for &i in &picked {
        let others: Vec<&CharacterId> = characters.iter().filter(|c| **c != records[i].character).collect();
        records[i].character = others[rng.gen_range(0..others.len())].clone();
    }
    picked
}
