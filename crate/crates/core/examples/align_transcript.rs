//! Build speaker ground truth by aligning a name-tagged transcript to the
//! ASR words of one episode.

use castline::align::{
    dtw_align, parse_transcript, render_review, transcript_words, words_to_gt_segments, SpeakerAliases,
};
use castline::synth::{generate, SynthConfig};

fn main() -> castline::Result<()> {
    let cfg = SynthConfig::noisy(2);
    let corpus = generate(&cfg)?;
    let pc = cfg.pipeline_config();
    let ep = corpus.episodes[0].to_episode(&pc);

    let aliases = SpeakerAliases::from_cast(&corpus.cast);
    let lines = parse_transcript(&corpus.episodes[0].transcript, &aliases)?;
    let words = transcript_words(&lines);
    let alignment = dtw_align(&words, &ep.words)?;
    println!(
        "{} transcript lines, {} transcript words, {} ASR words, alignment cost {}",
        lines.len(),
        words.len(),
        ep.words.len(),
        alignment.cost
    );

    let gt = words_to_gt_segments(&ep.segments, &alignment.words);
    let agree = gt.segments.iter().zip(&corpus.episodes[0].truth).filter(|(a, b)| a.speaker == b.speaker).count();
    println!("{} ground-truth segments, {agree} agree with the generator", gt.segments.len());
    for g in gt.segments.iter().take(3) {
        println!("  {:7.2}-{:7.2} {:<6} {}", g.start, g.end, g.speaker.as_str(), g.text);
    }
    print!("{}", render_review(&gt.review));
    Ok(())
}
