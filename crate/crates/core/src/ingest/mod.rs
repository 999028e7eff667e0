//! Feature-file parsing and sentence segmentation.
//!
//! Every feature file is newline-delimited JSON, one record per line. Field
//! names are fixed and unknown fields are rejected so that a renamed field on
//! the producer side fails loudly instead of being silently dropped.

mod features;
mod manifest;
mod outputs;
mod words;

use std::io::{BufRead, Write};

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};

pub use features::{
    parse_cast, parse_face_embeddings, parse_heatmaps, parse_laughter, parse_segments, parse_voice_embeddings,
    write_cast, write_face_embeddings, write_heatmaps, write_laughter, write_segments, write_voice_embeddings,
    VoiceTable,
};
pub use manifest::EpisodeManifest;
pub use outputs::{parse_assignments, parse_exemplars, parse_truth, write_assignments, write_exemplars, write_truth};
pub use words::{parse_words, sentence_segments, write_words, SentenceRules, DEFAULT_ABBREVIATIONS};

/// Reads one JSON record per non-blank line, keeping the 1-based line number.
pub(crate) fn read_records<T: DeserializeOwned>(reader: impl BufRead, source_name: &str) -> Result<Vec<(usize, T)>> {
    let mut out = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::parse(source_name, lineno, e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let record = serde_json::from_str(&line).map_err(|e| Error::parse(source_name, lineno, e.to_string()))?;
        out.push((lineno, record));
    }
    Ok(out)
}

pub(crate) fn write_records<T: Serialize>(
    mut writer: impl Write,
    records: impl IntoIterator<Item = T>,
) -> std::io::Result<()> {
    for record in records {
        serde_json::to_writer(&mut writer, &record)?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}
