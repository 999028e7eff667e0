//! The whole pipeline as the command line runs it: write a synthetic series,
//! open it as a session and run exemplars, assignment, subtitles and scoring.
//!
//!     cargo run --release --example end_to_end -- noisy

use castline::commands::{self, Overrides, Session};
use castline::subtitle::SubtitleFormat;
use castline::synth::SynthConfig;

fn main() -> castline::Result<()> {
    let cfg = match std::env::args().nth(1).as_deref() {
        Some("noisy") => SynthConfig::noisy(0),
        _ => SynthConfig::easy(0),
    };
    let dir = tempfile::tempdir().map_err(|e| castline::Error::io(std::env::temp_dir(), e))?;
    let (series, summary) = commands::synth(&cfg, &dir.path().join("series"))?;
    print!("{summary}");

    let session = Session::open(&series, &Overrides::default())?;
    let out = dir.path().join("out");
    print!("{}", commands::run(&session, &out, SubtitleFormat::Srt)?);

    let srt = std::fs::read_to_string(out.join("e01.srt")).map_err(|e| castline::Error::io(out.join("e01.srt"), e))?;
    println!("\n{}", srt.split("\n\n").take(3).collect::<Vec<_>>().join("\n\n"));
    Ok(())
}
