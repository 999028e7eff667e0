//! Generate a synthetic series on disk and show what a preset plants.
//!
//!     cargo run --example synth_corpus -- /tmp/demo noisy 7

use castline::synth::{generate, SynthConfig, Visibility};

fn main() -> castline::Result<()> {
    let mut args = std::env::args().skip(1);
    let out = args.next().unwrap_or_else(|| "target/synth-demo".into());
    let preset = args.next().unwrap_or_else(|| "easy".into());
    let seed: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(0);
    let cfg = match preset.as_str() {
        "noisy" => SynthConfig::noisy(seed),
        _ => SynthConfig::easy(seed),
    };

    let corpus = generate(&cfg)?;
    for ep in &corpus.episodes {
        let count = |v: Visibility| ep.planted.iter().filter(|p| p.visibility == v).count();
        println!(
            "{}: {} segments ({} on screen, {} multi-speaker, {} off screen), {} laughing, {} short",
            ep.episode_id,
            ep.planted.len(),
            count(Visibility::OnScreen),
            count(Visibility::MultiSpeaker),
            count(Visibility::OffScreen),
            ep.planted.iter().filter(|p| p.laughter).count(),
            ep.planted.iter().filter(|p| p.short).count(),
        );
    }
    if !corpus.exemplarless.is_empty() {
        let names: Vec<&str> = corpus.exemplarless.iter().map(|c| c.as_str()).collect();
        println!("never on screen: {}", names.join(", "));
    }
    let series = corpus.write(std::path::Path::new(&out))?;
    println!("wrote {}", series.display());
    Ok(())
}
