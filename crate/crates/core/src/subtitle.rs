//! Character-tagged SRT and WebVTT.
//!
//! The speaker is written as an uppercase `NAME: ` prefix on the cue text, or
//! optionally as a WebVTT `<v Name>` span. Times are whole milliseconds.

use std::fmt::Write as _;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubtitleFormat {
    Srt,
    Vtt,
}

impl SubtitleFormat {
    pub fn extension(self) -> &'static str {
        match self {
            SubtitleFormat::Srt => "srt",
            SubtitleFormat::Vtt => "vtt",
        }
    }
}

impl FromStr for SubtitleFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "srt" => Ok(SubtitleFormat::Srt),
            "vtt" | "webvtt" => Ok(SubtitleFormat::Vtt),
            other => Err(Error::Invalid(format!("unknown subtitle format {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cue {
    pub start_ms: u64,
    pub end_ms: u64,
    pub speaker: Option<String>,
    pub text: String,
}

impl Cue {
    /// Rounds second timestamps to the nearest millisecond.
    pub fn from_seconds(start: f64, end: f64, speaker: Option<String>, text: impl Into<String>) -> Self {
        Cue { start_ms: seconds_to_ms(start), end_ms: seconds_to_ms(end), speaker, text: text.into() }
    }

    pub fn start_seconds(&self) -> f64 {
        self.start_ms as f64 / 1000.0
    }

    pub fn end_seconds(&self) -> f64 {
        self.end_ms as f64 / 1000.0
    }
}

pub fn seconds_to_ms(t: f64) -> u64 {
    (t.max(0.0) * 1000.0).round() as u64
}

fn timestamp(ms: u64, sep: char) -> String {
    let (h, rem) = (ms / 3_600_000, ms % 3_600_000);
    let (m, rem) = (rem / 60_000, rem % 60_000);
    let (s, milli) = (rem / 1000, rem % 1000);
    format!("{h:02}:{m:02}:{s:02}{sep}{milli:03}")
}

/// Renders cues, numbered from 1. Cues must be sorted by start time.
pub fn emit_subtitles(cues: &[Cue], format: SubtitleFormat, voice_spans: bool) -> Result<String> {
    let mut out = String::new();
    let sep = match format {
        SubtitleFormat::Srt => ',',
        SubtitleFormat::Vtt => {
            out.push_str("WEBVTT\n\n");
            '.'
        }
    };
    for (i, cue) in cues.iter().enumerate() {
        if cue.end_ms < cue.start_ms {
            return Err(Error::Subtitle { cue: i + 1, message: "cue ends before it starts".into() });
        }
        if i > 0 && cue.start_ms < cues[i - 1].start_ms {
            return Err(Error::Subtitle { cue: i + 1, message: "cues are not sorted by start".into() });
        }
        let body = match (&cue.speaker, format) {
            (Some(name), SubtitleFormat::Vtt) if voice_spans => format!("<v {name}>{}", cue.text),
            (Some(name), _) => format!("{}: {}", name.to_uppercase(), cue.text),
            (None, _) => cue.text.clone(),
        };
        let _ =
            write!(out, "{}\n{} --> {}\n{}\n\n", i + 1, timestamp(cue.start_ms, sep), timestamp(cue.end_ms, sep), body);
    }
    Ok(out)
}

fn parse_timestamp(s: &str) -> Option<u64> {
    let s = s.trim();
    let (clock, milli) = s.rsplit_once([',', '.'])?;
    if milli.len() != 3 {
        return None;
    }
    let milli: u64 = milli.parse().ok()?;
    let parts: Vec<&str> = clock.split(':').collect();
    let nums: Vec<u64> = parts.iter().map(|p| p.parse().ok()).collect::<Option<_>>()?;
    let (h, m, sec) = match nums[..] {
        [h, m, s] => (h, m, s),
        [m, s] => (0, m, s),
        _ => return None,
    };
    if m >= 60 || sec >= 60 {
        return None;
    }
    Some(((h * 60 + m) * 60 + sec) * 1000 + milli)
}

fn parse_timing(line: &str) -> Option<(u64, u64)> {
    let (a, rest) = line.split_once("-->")?;
    // WebVTT may append cue settings after the end time.
    let b = rest.split_whitespace().next()?;
    Some((parse_timestamp(a)?, parse_timestamp(b)?))
}

/// Splits a leading `NAME: ` prefix (no lowercase letters in NAME) or a
/// `<v Name>` span from the cue text.
fn split_speaker(body: &str) -> (Option<String>, String) {
    if let Some(rest) = body.strip_prefix("<v") {
        if let Some((name, text)) = rest.split_once('>') {
            // `<v.class Name>`: drop the class list.
            let name = match name.strip_prefix('.') {
                Some(classed) => classed.split_once(' ').map_or("", |(_, n)| n),
                None => name,
            };
            let text = text.strip_suffix("</v>").unwrap_or(text);
            return (Some(name.trim().to_string()), text.to_string());
        }
    }
    if let Some((name, text)) = body.split_once(": ") {
        let plausible = !name.is_empty()
            && !name.contains('\n')
            && name.chars().any(char::is_alphabetic)
            && !name.chars().any(char::is_lowercase);
        if plausible {
            return (Some(name.to_string()), text.to_string());
        }
    }
    (None, body.to_string())
}

pub fn parse_subtitles(text: &str, format: SubtitleFormat) -> Result<Vec<Cue>> {
    let normalized = text.replace("\r\n", "\n");
    let mut blocks = normalized.split("\n\n").map(|b| b.trim_matches('\n')).filter(|b| !b.is_empty()).peekable();
    if format == SubtitleFormat::Vtt {
        match blocks.next() {
            Some(header) if header.starts_with("WEBVTT") => {}
            _ => return Err(Error::Subtitle { cue: 0, message: "missing WEBVTT header".into() }),
        }
    }
    let mut cues = Vec::new();
    for block in blocks {
        let index = cues.len() + 1;
        let err = |m: &str| Error::Subtitle { cue: index, message: m.to_string() };
        let mut lines = block.lines();
        let first = lines.next().ok_or_else(|| err("empty cue"))?;
        if format == SubtitleFormat::Vtt && ["NOTE", "STYLE", "REGION"].iter().any(|k| first.starts_with(k)) {
            continue;
        }
        let timing_line = if first.contains("-->") {
            if format == SubtitleFormat::Srt {
                return Err(err("missing cue number"));
            }
            first
        } else {
            if format == SubtitleFormat::Srt && first.trim().parse::<u64>().is_err() {
                return Err(err("cue number is not an integer"));
            }
            lines.next().ok_or_else(|| err("missing timing line"))?
        };
        let (start_ms, end_ms) = parse_timing(timing_line).ok_or_else(|| err("malformed timing line"))?;
        if end_ms < start_ms {
            return Err(err("cue ends before it starts"));
        }
        let body: Vec<&str> = lines.collect();
        let (speaker, text) = split_speaker(&body.join("\n"));
        cues.push(Cue { start_ms, end_ms, speaker, text });
    }
    Ok(cues)
}
