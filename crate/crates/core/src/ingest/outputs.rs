use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::{read_records, write_records};
use crate::error::{Error, Result};
use crate::types::{Assignment, CharacterId, ExemplarRecord, GtSegment, Label, SegmentId, VoiceEmbedding};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExemplarLine {
    segment_id: SegmentId,
    episode_id: String,
    character_id: CharacterId,
    v: Vec<f64>,
}

pub fn write_exemplars(writer: impl Write, records: &[ExemplarRecord]) -> std::io::Result<()> {
    write_records(
        writer,
        records.iter().map(|r| ExemplarLine {
            segment_id: r.segment_id,
            episode_id: r.episode_id.clone(),
            character_id: r.character.clone(),
            v: r.embedding.as_slice().to_vec(),
        }),
    )
}

pub fn parse_exemplars(reader: impl BufRead, source: &str) -> Result<Vec<ExemplarRecord>> {
    let mut out = Vec::new();
    let mut dim = None;
    for (line, r) in read_records::<ExemplarLine>(reader, source)? {
        if *dim.get_or_insert(r.v.len()) != r.v.len() {
            return Err(Error::parse(source, line, "exemplar embeddings differ in dimension"));
        }
        out.push(ExemplarRecord {
            episode_id: r.episode_id,
            segment_id: r.segment_id,
            character: r.character_id,
            embedding: VoiceEmbedding::new(r.v).map_err(|e| Error::parse(source, line, e.to_string()))?,
        });
    }
    Ok(out)
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AssignmentLine {
    segment_id: SegmentId,
    label: String,
    /// `null` when the bank was empty.
    distance: Option<f64>,
}

pub fn write_assignments(writer: impl Write, assignments: &[Assignment]) -> std::io::Result<()> {
    write_records(
        writer,
        assignments.iter().map(|a| AssignmentLine {
            segment_id: a.segment_id,
            label: a.label.to_string(),
            distance: a.distance.is_finite().then_some(a.distance),
        }),
    )
}

pub fn parse_assignments(reader: impl BufRead, source: &str) -> Result<Vec<Assignment>> {
    let mut out = Vec::new();
    for (line, r) in read_records::<AssignmentLine>(reader, source)? {
        if r.label.trim().is_empty() {
            return Err(Error::parse(source, line, "empty label"));
        }
        let distance = r.distance.unwrap_or(f64::INFINITY);
        if distance.is_nan() || distance < 0.0 {
            return Err(Error::parse(source, line, format!("invalid distance {distance}")));
        }
        out.push(Assignment { segment_id: r.segment_id, label: Label::parse(&r.label), distance });
    }
    Ok(out)
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TruthLine {
    s: f64,
    e: f64,
    speaker: CharacterId,
    #[serde(default)]
    text: String,
}

pub fn write_truth(writer: impl Write, segments: &[GtSegment]) -> std::io::Result<()> {
    write_records(
        writer,
        segments.iter().map(|g| TruthLine { s: g.start, e: g.end, speaker: g.speaker.clone(), text: g.text.clone() }),
    )
}

/// Ground-truth speaker turns, sorted by start time on load.
pub fn parse_truth(reader: impl BufRead, source: &str) -> Result<Vec<GtSegment>> {
    let mut out = Vec::new();
    for (line, r) in read_records::<TruthLine>(reader, source)? {
        if !(r.s.is_finite() && r.e.is_finite() && 0.0 <= r.s && r.s < r.e) {
            return Err(Error::parse(source, line, "truth segment needs 0 <= s < e"));
        }
        if r.speaker.as_str().is_empty() || r.speaker.as_str() == Label::UNKNOWN {
            return Err(Error::parse(source, line, "truth speaker must be a character id"));
        }
        out.push(GtSegment { start: r.s, end: r.e, speaker: r.speaker, text: r.text });
    }
    out.sort_by(|a, b| a.start.total_cmp(&b.start));
    Ok(out)
}
