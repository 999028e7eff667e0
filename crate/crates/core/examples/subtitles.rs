//! Character-tagged SRT and WebVTT, written and read back.

use castline::subtitle::{emit_subtitles, parse_subtitles, Cue, SubtitleFormat};

fn main() -> castline::Result<()> {
    let cues = vec![
        Cue::from_seconds(1.0, 2.4, Some("Jerry".into()), "What's the deal with airline food?"),
        Cue::from_seconds(2.6, 3.1, None, "(laughter)"),
        Cue::from_seconds(3.2, 5.0, Some("Elaine".into()), "Get out!"),
    ];
    for (format, spans) in [(SubtitleFormat::Srt, false), (SubtitleFormat::Vtt, true)] {
        let text = emit_subtitles(&cues, format, spans)?;
        println!("--- {}{}\n{text}", format.extension(), if spans { " with voice spans" } else { "" });
        let back = parse_subtitles(&text, format)?;
        assert_eq!(back.len(), cues.len());
        for c in &back {
            println!("  {:>6}ms {:<8} {}", c.start_ms, c.speaker.as_deref().unwrap_or("-"), c.text);
        }
    }
    Ok(())
}
