use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::{read_records, write_records};
use crate::error::{Error, Result};
use crate::types::{
    CastEntry, CharacterId, FaceFrame, Grid, HeatmapFrame, LaughterInterval, SegmentId, SpeechSegment, VoiceEmbedding,
};
use crate::vector::l2_normalize;

fn check_time(source: &str, line: usize, t: f64) -> Result<()> {
    if t.is_finite() && t >= 0.0 {
        Ok(())
    } else {
        Err(Error::parse(source, line, format!("invalid timestamp {t}")))
    }
}

fn check_dim(source: &str, line: usize, expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::parse(source, line, format!("embedding dimension {actual}, expected {expected}")))
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LaughterRecord {
    s: f64,
    e: f64,
    score: f64,
}

pub fn parse_laughter(reader: impl BufRead, source: &str) -> Result<Vec<LaughterInterval>> {
    let mut out = Vec::new();
    for (line, r) in read_records::<LaughterRecord>(reader, source)? {
        check_time(source, line, r.s)?;
        check_time(source, line, r.e)?;
        if r.s >= r.e {
            return Err(Error::parse(source, line, "laughter interval must have start < end"));
        }
        if !(0.0..=1.0).contains(&r.score) {
            return Err(Error::parse(source, line, format!("score {} outside [0, 1]", r.score)));
        }
        out.push(LaughterInterval { start: r.s, end: r.e, score: r.score });
    }
    out.sort_by(|a, b| a.start.total_cmp(&b.start));
    Ok(out)
}

pub fn write_laughter(writer: impl Write, intervals: &[LaughterInterval]) -> std::io::Result<()> {
    write_records(writer, intervals.iter().map(|l| LaughterRecord { s: l.start, e: l.end, score: l.score }))
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct HeatmapRecord {
    t: f64,
    h: usize,
    w: usize,
    v: Vec<f64>,
}

/// Parses heatmap frames. All frames in one file must share a grid shape.
pub fn parse_heatmaps(reader: impl BufRead, source: &str) -> Result<Vec<HeatmapFrame>> {
    let mut out: Vec<HeatmapFrame> = Vec::new();
    for (line, r) in read_records::<HeatmapRecord>(reader, source)? {
        check_time(source, line, r.t)?;
        let grid = Grid::new(r.h, r.w, r.v).map_err(|e| Error::parse(source, line, e.to_string()))?;
        if let Some(first) = out.first() {
            if (first.grid.rows(), first.grid.cols()) != (grid.rows(), grid.cols()) {
                return Err(Error::parse(
                    source,
                    line,
                    format!(
                        "grid {}x{} differs from first frame {}x{}",
                        grid.rows(),
                        grid.cols(),
                        first.grid.rows(),
                        first.grid.cols()
                    ),
                ));
            }
        }
        out.push(HeatmapFrame { timestamp: r.t, grid });
    }
    out.sort_by(|a, b| a.timestamp.total_cmp(&b.timestamp));
    Ok(out)
}

pub fn write_heatmaps(writer: impl Write, frames: &[HeatmapFrame]) -> std::io::Result<()> {
    write_records(
        writer,
        frames.iter().map(|f| HeatmapRecord {
            t: f.timestamp,
            h: f.grid.rows(),
            w: f.grid.cols(),
            v: f.grid.values().to_vec(),
        }),
    )
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FaceRecord {
    t: f64,
    v: Vec<f64>,
}

pub fn parse_face_embeddings(reader: impl BufRead, source: &str, visual_dim: usize) -> Result<Vec<FaceFrame>> {
    let mut out = Vec::new();
    for (line, r) in read_records::<FaceRecord>(reader, source)? {
        check_time(source, line, r.t)?;
        check_dim(source, line, visual_dim, r.v.len())?;
        if r.v.iter().any(|x| !x.is_finite()) {
            return Err(Error::parse(source, line, "non-finite embedding value"));
        }
        out.push(FaceFrame { timestamp: r.t, embedding: r.v });
    }
    out.sort_by(|a, b| a.timestamp.total_cmp(&b.timestamp));
    Ok(out)
}

pub fn write_face_embeddings(writer: impl Write, frames: &[FaceFrame]) -> std::io::Result<()> {
    write_records(writer, frames.iter().map(|f| FaceRecord { t: f.timestamp, v: f.embedding.clone() }))
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct VoiceRecord {
    segment_id: SegmentId,
    v: Vec<f64>,
}

/// Voice embeddings keyed by episode-local segment id.
pub type VoiceTable = BTreeMap<SegmentId, VoiceEmbedding>;

pub fn parse_voice_embeddings(reader: impl BufRead, source: &str, voice_dim: usize) -> Result<VoiceTable> {
    let mut out = VoiceTable::new();
    for (line, r) in read_records::<VoiceRecord>(reader, source)? {
        check_dim(source, line, voice_dim, r.v.len())?;
        let emb = VoiceEmbedding::new(r.v).map_err(|e| Error::parse(source, line, e.to_string()))?;
        if out.insert(r.segment_id, emb).is_some() {
            return Err(Error::parse(source, line, format!("duplicate segment_id {}", r.segment_id)));
        }
    }
    Ok(out)
}

pub fn write_voice_embeddings(writer: impl Write, table: &VoiceTable) -> std::io::Result<()> {
    write_records(writer, table.iter().map(|(id, v)| VoiceRecord { segment_id: *id, v: v.as_slice().to_vec() }))
}

/// Segment list handed to the voice-embedding adapter.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SegmentRecord {
    id: SegmentId,
    s: f64,
    e: f64,
    text: String,
    words: [usize; 2],
}

pub fn write_segments(writer: impl Write, segments: &[SpeechSegment]) -> std::io::Result<()> {
    write_records(
        writer,
        segments.iter().map(|s| SegmentRecord {
            id: s.id,
            s: s.start,
            e: s.end,
            text: s.text.clone(),
            words: [s.word_range.start, s.word_range.end],
        }),
    )
}

pub fn parse_segments(reader: impl BufRead, source: &str) -> Result<Vec<SpeechSegment>> {
    let records = read_records::<SegmentRecord>(reader, source)?;
    let mut out: Vec<SpeechSegment> = Vec::with_capacity(records.len());
    for (line, r) in records {
        if r.words[0] >= r.words[1] {
            return Err(Error::parse(source, line, "empty word range"));
        }
        if let Some(prev) = out.last() {
            if r.s < prev.start || r.id <= prev.id {
                return Err(Error::parse(source, line, "segments must be sorted with increasing ids"));
            }
        }
        out.push(SpeechSegment { id: r.id, start: r.s, end: r.e, text: r.text, word_range: r.words[0]..r.words[1] });
    }
    Ok(out)
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CastRecord {
    id: CharacterId,
    name: String,
    v: Vec<f64>,
    episodes: BTreeSet<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    aliases: Vec<String>,
}

/// Parses a cast list. Prototypes are L2-normalised on load.
pub fn parse_cast(reader: impl BufRead, source: &str, visual_dim: usize) -> Result<Vec<CastEntry>> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for (line, r) in read_records::<CastRecord>(reader, source)? {
        if r.id.as_str().trim().is_empty() {
            return Err(Error::parse(source, line, "empty character id"));
        }
        if !seen.insert(r.id.clone()) {
            return Err(Error::parse(source, line, format!("duplicate character id {}", r.id)));
        }
        check_dim(source, line, visual_dim, r.v.len())?;
        let prototype = l2_normalize(&r.v).map_err(|e| Error::parse(source, line, e.to_string()))?;
        out.push(CastEntry { id: r.id, display_name: r.name, prototype, episodes: r.episodes, aliases: r.aliases });
    }
    Ok(out)
}

pub fn write_cast(writer: impl Write, cast: &[CastEntry]) -> std::io::Result<()> {
    write_records(
        writer,
        cast.iter().map(|c| CastRecord {
            id: c.id.clone(),
            name: c.display_name.clone(),
            v: c.prototype.clone(),
            episodes: c.episodes.clone(),
            aliases: c.aliases.clone(),
        }),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn heatmap_value_out_of_range() {
        let text = r#"{"t":0.0,"h":1,"w":2,"v":[0.5,1.2]}"#;
        assert!(matches!(parse_heatmaps(text.as_bytes(), "hm"), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn heatmap_shape_mismatch() {
        let text = r#"{"t":0.0,"h":2,"w":2,"v":[0.5,0.2]}"#;
        assert!(parse_heatmaps(text.as_bytes(), "hm").is_err());
        let text = "{\"t\":0.0,\"h\":1,\"w\":2,\"v\":[0.5,0.2]}\n{\"t\":0.5,\"h\":2,\"w\":1,\"v\":[0.5,0.2]}\n";
        assert!(matches!(parse_heatmaps(text.as_bytes(), "hm"), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn two_frames_sorted_by_time() {
        let text = "{\"t\":1.5,\"h\":1,\"w\":2,\"v\":[0.1,0.2]}\n{\"t\":0.5,\"h\":1,\"w\":2,\"v\":[0.3,0.4]}\n";
        let frames = parse_heatmaps(text.as_bytes(), "hm").unwrap();
        assert_eq!(frames.len(), 2);
        assert_eq!(frames[0].timestamp, 0.5);
        assert_eq!(frames[0].grid.values(), &[0.3, 0.4]);
        assert_eq!(frames[1].timestamp, 1.5);
    }

    #[test]
    fn voice_dimension_mismatch() {
        let text = r#"{"segment_id":0,"v":[0.1,0.2,0.3]}"#;
        assert!(parse_voice_embeddings(text.as_bytes(), "voice", 3).is_ok());
        assert!(matches!(parse_voice_embeddings(text.as_bytes(), "voice", 4), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn voice_duplicate_segment() {
        let text = "{\"segment_id\":0,\"v\":[1.0]}\n{\"segment_id\":0,\"v\":[1.0]}\n";
        assert!(parse_voice_embeddings(text.as_bytes(), "voice", 1).is_err());
    }

    #[test]
    fn face_dimension_mismatch() {
        let text = r#"{"t":0.0,"v":[0.1,0.2]}"#;
        assert!(parse_face_embeddings(text.as_bytes(), "faces", 3).is_err());
    }

    #[test]
    fn laughter_validation() {
        assert!(parse_laughter(r#"{"s":1.0,"e":1.0,"score":0.9}"#.as_bytes(), "l").is_err());
        assert!(parse_laughter(r#"{"s":1.0,"e":2.0,"score":1.5}"#.as_bytes(), "l").is_err());
        let ok = parse_laughter(r#"{"s":1.0,"e":2.0,"score":0.9}"#.as_bytes(), "l").unwrap();
        assert_eq!(ok[0].score, 0.9);
    }

    #[test]
    fn renamed_field_is_rejected() {
        assert!(parse_laughter(r#"{"s":1.0,"e":2.0,"conf":0.9}"#.as_bytes(), "l").is_err());
        assert!(parse_laughter(r#"{"s":1.0,"e":2.0,"score":0.9,"extra":1}"#.as_bytes(), "l").is_err());
    }

    #[test]
    fn cast_prototypes_are_normalised() {
        let text = r#"{"id":"jerry","name":"Jerry Seinfeld","v":[3.0,4.0],"episodes":["e1"]}"#;
        let cast = parse_cast(text.as_bytes(), "cast", 2).unwrap();
        assert_eq!(cast[0].prototype, vec![0.6, 0.8]);
        assert!(cast[0].appears_in("e1"));
        let dup = format!("{text}\n{text}\n");
        assert!(parse_cast(dup.as_bytes(), "cast", 2).is_err());
    }

    #[test]
    fn canonical_files_round_trip() {
        let heat = "{\"t\":0.25,\"h\":1,\"w\":2,\"v\":[0.1,0.75]}\n";
        let frames = parse_heatmaps(heat.as_bytes(), "hm").unwrap();
        let mut out = Vec::new();
        write_heatmaps(&mut out, &frames).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), heat);

        let voice = "{\"segment_id\":0,\"v\":[0.1,-0.3]}\n{\"segment_id\":2,\"v\":[1.0,0.0]}\n";
        let table = parse_voice_embeddings(voice.as_bytes(), "v", 2).unwrap();
        let mut out = Vec::new();
        write_voice_embeddings(&mut out, &table).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), voice);

        let segs = "{\"id\":0,\"s\":0.5,\"e\":1.25,\"text\":\"Hi there.\",\"words\":[0,2]}\n";
        let parsed = parse_segments(segs.as_bytes(), "s").unwrap();
        let mut out = Vec::new();
        write_segments(&mut out, &parsed).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), segs);
    }
}
