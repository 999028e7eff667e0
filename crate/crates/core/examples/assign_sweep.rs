//! Nearest-centroid labelling at the default threshold, then the
//! precision / POCS trade-off as the threshold moves.

use std::collections::BTreeSet;

use castline::assign::{
    assign_episode, assignable_segments, build_centroids, oracle_point, sweep_thresholds, CurvePoint, EpisodeScores,
    ScoredSpan, SegmentClass,
};
use castline::exemplar::build_exemplars;
use castline::synth::{generate, SynthConfig};
use castline::types::Label;

fn main() -> castline::Result<()> {
    let cfg = SynthConfig::noisy(1);
    let corpus = generate(&cfg)?;
    let pc = cfg.pipeline_config();
    let episodes = corpus.episodes(&pc);
    let set = build_exemplars(&episodes, &corpus.cast, &pc)?;
    let bank = build_centroids(&set.exemplars)?;
    println!("{} centroids from {} exemplars", bank.len(), set.exemplars.len());

    let mut scores = Vec::new();
    for (ep, truth) in episodes.iter().zip(&corpus.episodes) {
        let assignments = assign_episode(ep, &bank, &pc)?;
        let unknown = assignments.iter().filter(|a| a.label.is_unknown()).count();
        println!("{}: {} segments, {unknown} UNKNOWN at d={}", ep.episode_id, assignments.len(), pc.unknown_distance);

        let mut spans = Vec::new();
        for seg in assignable_segments(ep, &pc) {
            let (nearest, distance) = match bank.nearest(ep.voice[&seg.id].as_slice())? {
                Some((c, d)) => (Label::Character(c), d),
                None => (Label::Unknown, f64::INFINITY),
            };
            spans.push(ScoredSpan { start: seg.start, end: seg.end, nearest, distance });
        }
        scores.push(EpisodeScores { spans, truth: truth.truth.clone() });
    }

    println!("\n    d   pocs  prec  (all)   pocs  prec  (long)");
    let curve = sweep_thresholds(&scores, &pc.sweep_grid(), pc.long_segment_cutoff);
    let (all, long): (Vec<&CurvePoint>, Vec<&CurvePoint>) = curve.iter().partition(|p| p.class == SegmentClass::All);
    for (a, l) in all.iter().zip(&long).step_by(7) {
        println!("{:5.2}  {:.3} {:.3}         {:.3} {:.3}", a.d, a.pocs, a.precision, l.pocs, l.precision);
    }

    let covered: BTreeSet<_> = bank.characters().cloned().collect();
    for class in [SegmentClass::All, SegmentClass::Long] {
        let o = oracle_point(&scores, &covered, class, pc.long_segment_cutoff);
        println!("oracle ({class}): pocs {:.3} precision {:.3}", o.pocs, o.precision);
    }
    Ok(())
}
