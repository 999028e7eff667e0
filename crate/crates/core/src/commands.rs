//! Subcommand bodies for the `castline` binary.
//!
//! Each command reads the series config plus the files named in it, writes
//! its outputs atomically under an output directory and returns the text it
//! wants printed. `run` is literally the composition of `exemplars`, `assign`,
//! `emit` and, when every episode has ground truth, `eval`.
//!
//! Output layout (all commands share one directory scheme):
//!
//! | file                          | written by  |
//! |-------------------------------|-------------|
//! | `exemplars.ndjson`            | exemplars   |
//! | `yield.txt`, `yield.json`     | exemplars   |
//! | `<episode>.segments.ndjson`   | segments    |
//! | `<episode>.assignments.ndjson`| assign      |
//! | `<episode>.truth.ndjson`      | align       |
//! | `<episode>.review.txt`        | align       |
//! | `<episode>.srt` / `.vtt`      | emit        |
//! | `metrics.txt`, `metrics.json` | eval        |
//! | `curve.tsv`, `oracle.tsv`     | sweep       |

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::align::{dtw_align, parse_transcript, render_review, transcript_words, words_to_gt_segments};
use crate::assign::{
    assign_episode, assignable_segments, build_centroids, oracle_point, sweep_thresholds, CharacterBank, EpisodeScores,
    ScoredSpan, SegmentClass,
};
use crate::config::PipelineConfig;
use crate::episode::{open, Episode};
use crate::error::{Error, Result};
use crate::exemplar::build_exemplars;
use crate::ingest::{self, EpisodeManifest, SentenceRules};
use crate::metrics::{best_match, MetricsAccumulator};
use crate::output::write_atomic;
use crate::report;
use crate::series::SeriesConfig;
use crate::subtitle::{emit_subtitles, Cue, SubtitleFormat};
use crate::synth::{generate, SynthConfig};
use crate::types::{
    Assignment, CastEntry, CharacterId, ExemplarRecord, GtSegment, HypSegment, Label, SpeechSegment, WordToken,
};

/// Command-line values that take precedence over the series config.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub unknown_distance: Option<f64>,
    pub collar: Option<f64>,
    /// `Some(false)` drops the DER(O) column.
    pub include_overlap: Option<bool>,
    /// Restrict evaluation and curves to segments longer than the cutoff.
    pub long_only: bool,
}

/// A loaded series config with overrides applied.
#[derive(Debug, Clone)]
pub struct Session {
    pub series: SeriesConfig,
    pub config: PipelineConfig,
    pub cast: Vec<CastEntry>,
    pub manifests: Vec<EpisodeManifest>,
    pub include_overlap: bool,
    pub long_only: bool,
}

impl Session {
    pub fn open(config_path: &Path, overrides: &Overrides) -> Result<Self> {
        let series = SeriesConfig::load(config_path)?;
        let mut config = series.pipeline.clone();
        if let Some(d) = overrides.unknown_distance {
            config.unknown_distance = d;
        }
        if let Some(c) = overrides.collar {
            config.der_collar = c;
        }
        config.validate()?;
        let cast = series.load_cast()?;
        let manifests = series.manifests()?;
        for m in &manifests {
            m.check_dims(&config)?;
        }
        Ok(Session {
            series,
            config,
            cast,
            manifests,
            include_overlap: overrides.include_overlap.unwrap_or(true),
            long_only: overrides.long_only,
        })
    }

    /// Full episodes, loaded in parallel on the current pool.
    fn episodes(&self) -> Result<Vec<Episode>> {
        self.manifests.par_iter().map(|m| Episode::load(m, &self.config)).collect()
    }

    fn words(&self, m: &EpisodeManifest) -> Result<(Vec<WordToken>, Vec<SpeechSegment>)> {
        let words = ingest::parse_words(open(&m.words)?, &m.words.display().to_string())?;
        let rules = SentenceRules::new(self.config.max_word_gap, &self.config.extra_abbreviations);
        let segments = ingest::sentence_segments(&words, &rules);
        Ok((words, segments))
    }

    /// Only what assignment needs: segments, laughter and voice.
    fn voice_episode(&self, m: &EpisodeManifest) -> Result<Episode> {
        let (words, segments) = self.words(m)?;
        let voice_path = m.voice.as_ref().ok_or_else(|| {
            Error::Invalid(format!("episode {}: manifest names no voice embeddings file", m.episode_id))
        })?;
        Ok(Episode {
            episode_id: m.episode_id.clone(),
            words,
            segments,
            laughter: ingest::parse_laughter(open(&m.laughter)?, &m.laughter.display().to_string())?,
            heatmaps: Vec::new(),
            faces: Vec::new(),
            voice: ingest::parse_voice_embeddings(
                open(voice_path)?,
                &voice_path.display().to_string(),
                self.config.embedding_dims.voice,
            )?,
        })
    }

    /// Ground truth from `truth_dir/<episode>.truth.ndjson` when given,
    /// otherwise from the manifest. `None` if neither exists.
    fn truth(&self, m: &EpisodeManifest, truth_dir: Option<&Path>) -> Result<Option<Vec<GtSegment>>> {
        let path = match truth_dir {
            Some(dir) => dir.join(format!("{}.truth.ndjson", m.episode_id)),
            None => match &m.truth {
                Some(p) => p.clone(),
                None => return Ok(None),
            },
        };
        ingest::parse_truth(open(&path)?, &path.display().to_string()).map(Some)
    }

    fn require_truth(&self, m: &EpisodeManifest, truth_dir: Option<&Path>) -> Result<Vec<GtSegment>> {
        self.truth(m, truth_dir)?.ok_or_else(|| {
            Error::Invalid(format!(
                "episode {}: no ground truth (set `truth` in the manifest or pass --truth)",
                m.episode_id
            ))
        })
    }

    fn has_truth(&self) -> bool {
        self.manifests.iter().all(|m| m.truth.is_some())
    }

    fn bank(&self, exemplars_path: &Path) -> Result<CharacterBank> {
        let exemplars = ingest::parse_exemplars(open(exemplars_path)?, &exemplars_path.display().to_string())?;
        let bank = build_centroids(&exemplars)?;
        if let Some(dim) = bank.dim() {
            if dim != self.config.embedding_dims.voice {
                return Err(Error::DimensionMismatch { expected: self.config.embedding_dims.voice, actual: dim });
            }
        }
        Ok(bank)
    }

    fn display_names(&self) -> BTreeMap<&CharacterId, &str> {
        self.cast.iter().map(|c| (&c.id, c.display_name.as_str())).collect()
    }
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn save_with(path: &Path, f: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>) -> Result<()> {
    let mut buf = Vec::new();
    f(&mut buf).map_err(|e| Error::io(path, e))?;
    write_atomic(path, &buf)
}

fn assignments_path(dir: &Path, episode: &str) -> PathBuf {
    dir.join(format!("{episode}.assignments.ndjson"))
}

/// Stage 1 over the whole series.
pub fn exemplars(session: &Session, out: &Path) -> Result<String> {
    ensure_dir(out)?;
    let episodes = session.episodes()?;
    let set = build_exemplars(&episodes, &session.cast, &session.config)?;
    save_with(&out.join("exemplars.ndjson"), |b| ingest::write_exemplars(b, &set.exemplars))?;
    let table = report::yield_table(&set.stage_yield);
    write_atomic(&out.join("yield.txt"), table.as_bytes())?;
    let mut record = serde_json::to_string_pretty(&report::yield_record(&set.stage_yield)).expect("json");
    record.push('\n');
    write_atomic(&out.join("yield.json"), record.as_bytes())?;

    let mut text = table;
    if session.has_truth() {
        let mut rows: BTreeMap<CharacterId, (usize, usize)> = BTreeMap::new();
        for (m, ep) in session.manifests.iter().zip(&episodes) {
            let truth = session.require_truth(m, None)?;
            for r in set.exemplars.iter().filter(|r| r.episode_id == ep.episode_id) {
                let row = rows.entry(r.character.clone()).or_default();
                row.0 += 1;
                if exemplar_is_correct(r, ep, &truth) {
                    row.1 += 1;
                }
            }
        }
        text.push('\n');
        text.push_str(&report::exemplar_table(&rows));
    }
    Ok(text)
}

fn exemplar_is_correct(r: &ExemplarRecord, ep: &Episode, truth: &[GtSegment]) -> bool {
    ep.segments
        .iter()
        .find(|s| s.id == r.segment_id)
        .and_then(|s| best_match(s.start, s.end, truth))
        .is_some_and(|i| truth[i].speaker == r.character)
}

/// Stage 2: label every non-laughter segment.
pub fn assign(session: &Session, exemplars_path: &Path, out: &Path) -> Result<String> {
    ensure_dir(out)?;
    let bank = session.bank(exemplars_path)?;
    let per_episode = session
        .manifests
        .par_iter()
        .map(|m| {
            let ep = session.voice_episode(m)?;
            assign_episode(&ep, &bank, &session.config).map(|a| (m.episode_id.clone(), a))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut text = String::new();
    for (episode, assignments) in &per_episode {
        save_with(&assignments_path(out, episode), |b| ingest::write_assignments(b, assignments))?;
        let unknown = assignments.iter().filter(|a| a.label.is_unknown()).count();
        let _ = writeln!(
            text,
            "{episode}: {} segments, {} labelled, {unknown} UNKNOWN",
            assignments.len(),
            assignments.len() - unknown
        );
    }
    Ok(text)
}

/// Segment lists for the voice-embedding adapter.
pub fn segments(session: &Session, out: &Path) -> Result<String> {
    ensure_dir(out)?;
    let mut text = String::new();
    for m in &session.manifests {
        let (_, segs) = session.words(m)?;
        save_with(&out.join(format!("{}.segments.ndjson", m.episode_id)), |b| ingest::write_segments(b, &segs))?;
        let _ = writeln!(text, "{}: {} segments", m.episode_id, segs.len());
    }
    Ok(text)
}

/// Parses every input of the series and reports what was found.
pub fn validate(session: &Session) -> Result<String> {
    let mut text = format!("cast: {} characters\n", session.cast.len());
    let aliases = session.series.speaker_aliases(&session.cast)?;
    for m in &session.manifests {
        let ep = if m.voice.is_some() {
            Episode::load(m, &session.config)?
        } else {
            Episode::load_without_voice(m, &session.config)?
        };
        let _ = write!(
            text,
            "{}: {} words, {} segments, {} laughter, {} heatmaps, {} faces, {} voice",
            m.episode_id,
            ep.words.len(),
            ep.segments.len(),
            ep.laughter.len(),
            ep.heatmaps.len(),
            ep.faces.len(),
            ep.voice.len(),
        );
        if let Some(path) = &m.transcript {
            let raw = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            let _ = write!(text, ", {} transcript lines", parse_transcript(&raw, &aliases)?.len());
        }
        if let Some(truth) = session.truth(m, None)? {
            let _ = write!(text, ", {} truth segments", truth.len());
        }
        if !m.models.is_empty() {
            let models: Vec<String> = m.models.iter().map(|(k, v)| format!("{k}={v}")).collect();
            let _ = write!(text, " [{}]", models.join(", "));
        }
        text.push('\n');
    }
    Ok(text)
}

/// Ground truth from transcripts aligned to timed words.
pub fn align(session: &Session, out: &Path) -> Result<String> {
    ensure_dir(out)?;
    let aliases = session.series.speaker_aliases(&session.cast)?;
    let mut text = String::new();
    for m in &session.manifests {
        let path = m
            .transcript
            .as_ref()
            .ok_or_else(|| Error::Invalid(format!("episode {}: manifest names no transcript", m.episode_id)))?;
        let raw = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let lines = parse_transcript(&raw, &aliases)?;
        let (words, segs) = session.words(m)?;
        let alignment = dtw_align(&transcript_words(&lines), &words)?;
        let gt = words_to_gt_segments(&segs, &alignment.words);
        save_with(&out.join(format!("{}.truth.ndjson", m.episode_id)), |b| ingest::write_truth(b, &gt.segments))?;
        write_atomic(&out.join(format!("{}.review.txt", m.episode_id)), render_review(&gt.review).as_bytes())?;
        let _ = writeln!(
            text,
            "{}: {} truth segments, {} for review, alignment cost {}",
            m.episode_id,
            gt.segments.len(),
            gt.review.len(),
            alignment.cost
        );
    }
    Ok(text)
}

fn hypothesis(segs: &[SpeechSegment], assignments: &[Assignment], episode: &str) -> Result<Vec<HypSegment>> {
    let by_id: BTreeMap<_, _> = segs.iter().map(|s| (s.id, s)).collect();
    assignments
        .iter()
        .map(|a| {
            let s = by_id.get(&a.segment_id).ok_or_else(|| {
                Error::Invalid(format!("episode {episode}: assignment for unknown segment {}", a.segment_id))
            })?;
            Ok(HypSegment { start: s.start, end: s.end, label: a.label.clone() })
        })
        .collect()
}

fn read_assignments(dir: &Path, episode: &str) -> Result<Vec<Assignment>> {
    let path = assignments_path(dir, episode);
    ingest::parse_assignments(open(&path)?, &path.display().to_string())
}

/// Scores assignments against ground truth.
pub fn eval(session: &Session, assignments_dir: &Path, truth_dir: Option<&Path>, out: &Path) -> Result<String> {
    ensure_dir(out)?;
    let cutoff = session.config.long_segment_cutoff;
    let keep = |start: f64, end: f64| !session.long_only || end - start > cutoff;
    let mut acc = MetricsAccumulator::new();
    for m in &session.manifests {
        let (words, segs) = session.words(m)?;
        let mut hyp = hypothesis(&segs, &read_assignments(assignments_dir, &m.episode_id)?, &m.episode_id)?;
        let mut reference = session.require_truth(m, truth_dir)?;
        hyp.retain(|h| keep(h.start, h.end));
        reference.retain(|r| keep(r.start, r.end));
        let transcript: Vec<&str> = words.iter().map(|w| w.text.as_str()).collect();
        acc.add_episode(
            &reference,
            &hyp,
            &transcript.join(" "),
            session.config.der_collar,
            session.config.unknown_as_miss,
        )?;
    }
    let metrics = acc.finish()?;
    let rows = [(session.series.series_id.clone(), metrics.clone())];
    let table = report::metrics_table(&rows, session.include_overlap);
    let full = format!("{table}\n{}", report::character_table(&metrics));
    write_atomic(&out.join("metrics.txt"), full.as_bytes())?;
    let mut record =
        serde_json::to_string_pretty(&report::metrics_record(&session.series.series_id, &metrics)).expect("json");
    record.push('\n');
    write_atomic(&out.join("metrics.json"), record.as_bytes())?;
    Ok(table)
}

/// Precision against POCS over the configured threshold grid.
pub fn sweep(session: &Session, exemplars_path: &Path, truth_dir: Option<&Path>, out: &Path) -> Result<String> {
    ensure_dir(out)?;
    let bank = session.bank(exemplars_path)?;
    let scores = session
        .manifests
        .par_iter()
        .map(|m| {
            let ep = session.voice_episode(m)?;
            let truth = session.require_truth(m, truth_dir)?;
            let mut spans = Vec::new();
            for seg in assignable_segments(&ep, &session.config) {
                let v = ep
                    .voice
                    .get(&seg.id)
                    .ok_or_else(|| Error::MissingEmbeddings { episode: ep.episode_id.clone(), ids: vec![seg.id.0] })?;
                let (nearest, distance) = match bank.nearest(v.as_slice())? {
                    Some((c, d)) => (Label::Character(c), d),
                    None => (Label::Unknown, f64::INFINITY),
                };
                spans.push(ScoredSpan { start: seg.start, end: seg.end, nearest, distance });
            }
            Ok(EpisodeScores { spans, truth })
        })
        .collect::<Result<Vec<_>>>()?;
    let cutoff = session.config.long_segment_cutoff;
    let mut curve = sweep_thresholds(&scores, &session.config.sweep_grid(), cutoff);
    let classes: Vec<SegmentClass> = if session.long_only {
        curve.retain(|p| p.class == SegmentClass::Long);
        vec![SegmentClass::Long]
    } else {
        vec![SegmentClass::All, SegmentClass::Long]
    };
    let covered: BTreeSet<CharacterId> = bank.characters().cloned().collect();
    let oracle: Vec<_> = classes.iter().map(|&c| (c, oracle_point(&scores, &covered, c, cutoff))).collect();
    write_atomic(&out.join("curve.tsv"), report::curve_tsv(&curve).as_bytes())?;
    let oracle_text = report::oracle_tsv(&oracle);
    write_atomic(&out.join("oracle.tsv"), oracle_text.as_bytes())?;
    Ok(format!("{} curve points\n{oracle_text}", curve.len()))
}

/// Character-tagged subtitles from assignments.
pub fn emit(session: &Session, assignments_dir: &Path, out: &Path, format: SubtitleFormat) -> Result<String> {
    ensure_dir(out)?;
    let names = session.display_names();
    let mut text = String::new();
    for m in &session.manifests {
        let (_, segs) = session.words(m)?;
        let assignments = read_assignments(assignments_dir, &m.episode_id)?;
        let by_id: BTreeMap<_, _> = segs.iter().map(|s| (s.id, s)).collect();
        let mut cues = Vec::with_capacity(assignments.len());
        for a in &assignments {
            let s = by_id.get(&a.segment_id).ok_or_else(|| {
                Error::Invalid(format!("episode {}: assignment for unknown segment {}", m.episode_id, a.segment_id))
            })?;
            let speaker = a.label.character().map(|c| names.get(c).map_or_else(|| c.to_string(), |n| n.to_string()));
            cues.push(Cue::from_seconds(s.start, s.end, speaker, s.text.clone()));
        }
        let rendered = emit_subtitles(&cues, format, session.config.vtt_voice_spans)?;
        let path = out.join(format!("{}.{}", m.episode_id, format.extension()));
        write_atomic(&path, rendered.as_bytes())?;
        let _ = writeln!(text, "{}: {} cues -> {}", m.episode_id, cues.len(), path.display());
    }
    Ok(text)
}

/// Writes a synthetic corpus and returns the path of its series config.
pub fn synth(config: &SynthConfig, out: &Path) -> Result<(PathBuf, String)> {
    let corpus = generate(config)?;
    let series = corpus.write(out)?;
    let segments: usize = corpus.episodes.iter().map(|e| e.planted.len()).sum();
    let text = format!(
        "{} characters, {} episodes, {segments} segments -> {}\n",
        corpus.cast.len(),
        corpus.episodes.len(),
        series.display()
    );
    Ok((series, text))
}

/// exemplars, then assign, then emit, then eval when ground truth exists.
pub fn run(session: &Session, out: &Path, format: SubtitleFormat) -> Result<String> {
    let mut text = exemplars(session, out)?;
    text.push('\n');
    text.push_str(&assign(session, &out.join("exemplars.ndjson"), out)?);
    text.push_str(&emit(session, out, out, format)?);
    if session.has_truth() {
        text.push('\n');
        text.push_str(&eval(session, out, None, out)?);
    } else {
        log::warn!("skipping evaluation: not every episode names ground truth");
    }
    Ok(text)
}
