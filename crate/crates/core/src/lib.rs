//! Character-aware subtitling from precomputed audio-visual features.
//!
//! The pipeline mines per-character voice exemplars from segments where a
//! single visible speaker can be recognised ([`exemplar`]), then labels every
//! speech segment by its nearest exemplar centroid ([`assign`]). Ground truth
//! is built by aligning transcripts to timed words ([`align`]) and scored with
//! [`metrics`]. [`synth`] generates planted-truth corpora for testing.

pub mod align;
pub mod assign;
pub mod commands;
pub mod config;
pub mod episode;
pub mod error;
pub mod exemplar;
pub mod ingest;
pub mod metrics;
pub mod output;
pub mod report;
pub mod series;
pub mod subtitle;
pub mod synth;
pub mod types;
pub mod vector;

pub use config::PipelineConfig;
pub use episode::Episode;
pub use error::{Error, Result};
